"""Gauss-Jacobi rules mapped onto [0, pi/2r] through y = cos 2rx.

A rule with Jacobi exponents (a, b) absorbs the weight
(sin rx)^{2a+1} (cos rx)^{2b+1} on [0, pi/2r], since

    int_0^{pi/2r} (sin rx)^{2a+1} (cos rx)^{2b+1} F(cos 2rx) dx
        = 2^{-(a+b+2)} / r * int_{-1}^{1} (1-y)^a (1+y)^b F(y) dy.

With a = g0 - 1/2, b = g1 - 1/2 the absorbed factor is exactly the
trigonometric weight (sin rx)^{2 g0} (cos rx)^{2 g1}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

__all__ = ["QuadratureRule", "jacobi_recurrence", "jacobi_rule", "orthonormal_jacobi"]


def jacobi_recurrence(n: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray, float]:
    """Monic Jacobi recurrence: diagonal alpha_k (k < n), beta_k (1 <= k < n), and mu_0.

    p_{k+1}(y) = (y - alpha_k) p_k(y) - beta_k p_{k-1}(y).
    """
    k = np.arange(n, dtype=float)
    ab = a + b
    diag = np.empty(n)
    diag[0] = (b - a) / (ab + 2.0)
    if n > 1:
        kk = k[1:]
        diag[1:] = (b * b - a * a) / ((2 * kk + ab) * (2 * kk + ab + 2))
    beta = np.empty(max(n - 1, 0))
    if n > 1:
        beta[0] = 4.0 * (1 + a) * (1 + b) / ((2 + ab) ** 2 * (3 + ab))
        kk = k[2:]
        beta[1:] = (
            4.0 * kk * (kk + a) * (kk + b) * (kk + ab)
            / ((2 * kk + ab) ** 2 * (2 * kk + ab + 1) * (2 * kk + ab - 1))
        )
    log_mu0 = (ab + 1) * math.log(2.0) + gammaln(a + 1) + gammaln(b + 1) - gammaln(ab + 2)
    return diag, beta, math.exp(log_mu0)


def orthonormal_jacobi(n: int, a: float, b: float, y) -> np.ndarray:
    """Orthonormal Jacobi polynomials p_0..p_{n-1} at y, shape (n, *y.shape).

    Normalized against (1-y)^a (1+y)^b dy with positive leading coefficients.
    """
    y = np.asarray(y, dtype=float)
    diag, beta, mu0 = jacobi_recurrence(max(n, 1), a, b)
    out = np.empty((n,) + y.shape)
    if n == 0:
        return out
    out[0] = 1.0 / math.sqrt(mu0)
    if n > 1:
        sb = np.sqrt(beta)
        out[1] = (y - diag[0]) * out[0] / sb[0]
        for k in range(1, n - 1):
            out[k + 1] = ((y - diag[k]) * out[k] - sb[k - 1] * out[k - 1]) / sb[k]
    return out


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes in (0, pi/2r) sorted ascending, with weights absorbing the endpoint factor.

    ``sum(weights * f(nodes))`` approximates
    ``int (sin rx)^{2a+1} (cos rx)^{2b+1} f(x) dx`` and is exact when f is a
    polynomial of degree <= 2*order - 1 in cos 2rx.
    """

    nodes: np.ndarray
    weights: np.ndarray
    endpoint_exponents: tuple[float, float]
    order: int
    r: float
    y_nodes: np.ndarray
    y_weights: np.ndarray

    def absorbed_weight(self, x=None) -> np.ndarray:
        """(sin rx)^{2a+1} (cos rx)^{2b+1}, at the nodes by default."""
        x = self.nodes if x is None else np.asarray(x, dtype=float)
        a, b = self.endpoint_exponents
        return np.sin(self.r * x) ** (2 * a + 1) * np.cos(self.r * x) ** (2 * b + 1)

    def plain_weights(self) -> np.ndarray:
        """Weights for ordinary dx integrals of functions with the absorbed endpoint behavior."""
        return self.weights / self.absorbed_weight()

    def orthonormal_basis(self, n: int, x=None) -> np.ndarray:
        """Polynomials in cos 2rx, orthonormal under the absorbed weight dx, shape (n, len(x))."""
        a, b = self.endpoint_exponents
        y = self.y_nodes if x is None else np.cos(2.0 * self.r * np.asarray(x, dtype=float))
        scale = math.sqrt(self.r * 2.0 ** (a + b + 2))
        return orthonormal_jacobi(n, a, b, y) * scale


def jacobi_rule(m: int, a: float, b: float, r: float = 1.0) -> QuadratureRule:
    """M-point Gauss-Jacobi rule (Golub-Welsch) for weight (1-y)^a (1+y)^b, mapped to x."""
    if m < 1:
        raise ValueError(f"rule needs at least one node, got {m}")
    if a <= -1 or b <= -1:
        raise ValueError(f"Jacobi exponents must exceed -1 (got a={a}, b={b}): weight not integrable")
    diag, beta, mu0 = jacobi_recurrence(m, a, b)
    jac = np.diag(diag) + np.diag(np.sqrt(beta), 1) + np.diag(np.sqrt(beta), -1)
    y, vecs = np.linalg.eigh(jac)
    wy = mu0 * vecs[0] ** 2
    # descending y is ascending x
    order = np.argsort(-y)
    y, wy = y[order], wy[order]
    x = np.arccos(np.clip(y, -1.0, 1.0)) / (2.0 * r)
    wx = wy / (r * 2.0 ** (a + b + 2))
    return QuadratureRule(
        nodes=x,
        weights=wx,
        endpoint_exponents=(float(a), float(b)),
        order=m,
        r=float(r),
        y_nodes=y,
        y_weights=wy,
    )
