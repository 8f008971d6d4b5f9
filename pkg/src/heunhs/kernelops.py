"""Weights, kernels and potentials built on the elliptic functions.

Kernels are accumulated in log space: the weight factors behave like
x^{2 g0} and (pi/2r - x)^{2 g1} at the endpoints and span many decades there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import elliptic as ell
from .couplings import CouplingVector, dual, mirror
from .elliptic import EllipticParams, PoleError
from .quadrature import jacobi_rule

__all__ = [
    "KernelEval",
    "endpoint_exponents",
    "hs_norm_finite",
    "log_s_kernel",
    "log_weight",
    "log_weight_reduced",
    "potential",
    "potential_diff",
    "potential_trig",
    "psi_kernel",
    "psi_matrix",
    "s_kernel",
    "weight",
    "weight_via_c",
]


def _g(g) -> CouplingVector:
    return CouplingVector.of(g)


def _log_r_shifted(x: np.ndarray, params: EllipticParams) -> np.ndarray:
    """ln R(x + pi/2r) = ln R(pi/2r - x)."""
    n = params._n
    cosines = np.cos(2.0 * params.r * np.multiply.outer(x, n)) * (-1.0) ** n
    return -(cosines @ params.coef_r)


def log_weight_reduced(g, x, params: EllipticParams) -> np.ndarray:
    """ln w(g;x) - ln[(sin rx)^{2 g0} (cos rx)^{2 g1}]; analytic on the closed interval."""
    g0, g1, g2, g3 = _g(g).g
    x = np.asarray(x, dtype=float)
    out = (2 * g0 + 2 * g1) * math.log(params.p) + np.zeros_like(x)
    if g0:
        out = out + 2 * g0 * ell.log_s_reduced(x, params)
    if g1:
        out = out + 2 * g1 * ell.log_s_reduced(x, params, shifted=True)
    if g2:
        out = out + 2 * g2 * ell.log_r_real(x, params)
    if g3:
        out = out + 2 * g3 * _log_r_shifted(x, params)
    return out


def _log_trig_weight(g0: float, g1: float, x: np.ndarray, r: float) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.zeros_like(x)
        if g0:
            out = out + 2 * g0 * np.log(np.sin(r * x))
        if g1:
            # cos rx as sin(r(w1 - x)): exact zero at w1, no cancellation near it
            out = out + 2 * g1 * np.log(np.sin(r * (math.pi / (2 * r) - x)))
    return out


def log_weight(g, x, params: EllipticParams) -> np.ndarray:
    """ln w(g;x); -inf / +inf at endpoints with positive / negative exponent."""
    gv = _g(g)
    x = np.asarray(x, dtype=float)
    return log_weight_reduced(gv, x, params) + _log_trig_weight(gv[0], gv[1], x, params.r)


def weight(g, x, params: EllipticParams) -> np.ndarray:
    """w(g;x) = p^{2g0+2g1} s(x)^{2g0} s(w1-x)^{2g1} R(x)^{2g2} R(w1-x)^{2g3}.

    Endpoint limits: 0 for a positive local exponent, ``inf`` for a negative one.
    """
    with np.errstate(over="ignore"):
        return np.exp(log_weight(g, x, params))


def weight_via_c(g, x, params: EllipticParams) -> np.ndarray:
    """w(g;x) = 1/(c(g;x) c(g;-x)) from the product form of R at complex arguments.

    c(g;x) = R(x+ia/2)^{-g0} R(x+ia/2-w1)^{-g1} R(x)^{-g2} R(x-w1)^{-g3},
    principal branches throughout.
    """
    g0, g1, g2, g3 = _g(g).g
    x = np.asarray(x, dtype=float)
    half = 0.5j * params.alpha
    w1 = params.omega1

    def c_fn(u):
        factors = (
            (u + half, g0),
            (u + half - w1, g1),
            (u + 0j, g2),
            (u - w1 + 0j, g3),
        )
        out = np.ones(np.shape(u), dtype=complex)
        for arg, power in factors:
            out = out * np.power(ell.r_function(arg, params, form="product"), -power)
        return out

    return np.real(1.0 / (c_fn(x) * c_fn(-x)))


def log_s_kernel(s_g: float, x, y, params: EllipticParams, outer: bool = False) -> np.ndarray:
    """ln S = 2 s_g sum_n cos(2nrx) cos(2nry) / (n sinh(n r alpha))."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = params._n
    cx = np.cos(2.0 * params.r * np.multiply.outer(x, n)) * params.coef_r
    cy = np.cos(2.0 * params.r * np.multiply.outer(y, n))
    if outer:
        return 2.0 * s_g * (cx @ cy.T)
    return 2.0 * s_g * np.sum(cx * cy, axis=-1)


def s_kernel(g, x, y, params: EllipticParams, form: str = "fourier") -> np.ndarray:
    """S(g;x,y) = exp(-s_g ln[R(x+y) R(x-y)]); depends on g only through s_g."""
    s_g = _g(g).s_g
    if form == "fourier":
        return np.exp(log_s_kernel(s_g, x, y, params))
    if form == "product":
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        prod = ell.r_function(x + y, params, form="product") * ell.r_function(x - y, params, form="product")
        return np.exp(-s_g * np.log(np.real(prod)))
    raise ValueError(f"unknown form {form!r}")


def psi_kernel(g, x, y, params: EllipticParams) -> np.ndarray:
    """Psi(g;x,y) = w(g;x)^{1/2} S(g;x,y) w(g';y)^{1/2}, broadcasting x against y."""
    gv = _g(g)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    log_psi = (
        0.5 * log_weight(gv, x, params)
        + log_s_kernel(gv.s_g, x, y, params)
        + 0.5 * log_weight(dual(gv), y, params)
    )
    with np.errstate(over="ignore"):
        return np.exp(log_psi)


def psi_matrix(g, x, y, params: EllipticParams) -> np.ndarray:
    """Psi(g; x_i, y_j) for all pairs."""
    gv = _g(g)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    log_psi = (
        0.5 * log_weight(gv, x, params)[:, None]
        + log_s_kernel(gv.s_g, x, y, params, outer=True)
        + 0.5 * log_weight(dual(gv), y, params)[None, :]
    )
    with np.errstate(over="ignore"):
        return np.exp(log_psi)


@dataclass(frozen=True)
class KernelEval:
    """Bundle of (g, params, form) for repeated kernel evaluation."""

    g: CouplingVector
    params: EllipticParams
    form: str = "fourier"

    def s(self, x, y):
        return s_kernel(self.g, x, y, self.params, form=self.form)

    def psi(self, x, y):
        return psi_kernel(self.g, x, y, self.params)

    def weight(self, x):
        return weight(self.g, x, self.params)


# ---------------------------------------------------------------------------
# Hilbert-Schmidt norm
# ---------------------------------------------------------------------------


def endpoint_exponents(g, params: EllipticParams, h: float = 1e-7) -> tuple[float, float]:
    """Numerical log-log slopes of w(g;.) at x = 0 and x = pi/2r.

    The right endpoint is probed at 0 through w(g; pi/2r - x) = w(mirror(g); x),
    which avoids evaluating cos near its zero.
    """
    xs = np.array([h, 2 * h])
    ln2 = math.log(2.0)
    slopes = []
    for gv in (_g(g), mirror(g)):
        lw = log_weight(gv, xs, params)
        slopes.append(float(lw[1] - lw[0]) / ln2)
    return slopes[0], slopes[1]


def hs_norm_finite(g, params: EllipticParams, n: int = 96) -> tuple[bool, float]:
    """Decide whether Psi(g) is square integrable and estimate its squared HS norm.

    Finiteness is read off the numerically measured endpoint exponents of w(g)
    and w(g'): the double integral of Psi^2 factorizes up to the bounded S^2, so
    it is finite iff every exponent exceeds -1. The estimate is an n x n tensor
    Gauss-Jacobi quadrature of Psi^2 (``inf`` when not finite).
    """
    gv = _g(g)
    gp = dual(gv)
    exps = endpoint_exponents(gv, params) + endpoint_exponents(gp, params)
    # an exponent of exactly -1 diverges logarithmically
    finite = all(e > -1.0 + 1e-9 for e in exps)
    if not finite:
        return False, math.inf
    left = jacobi_rule(n, gv[0] - 0.5, gv[1] - 0.5, params.r)
    right = jacobi_rule(n, gp[0] - 0.5, gp[1] - 0.5, params.r)
    lx = log_weight_reduced(gv, left.nodes, params)
    ly = log_weight_reduced(gp, right.nodes, params)
    ls = log_s_kernel(gv.s_g, left.nodes, right.nodes, params, outer=True)
    integrand = np.exp(lx[:, None] + 2.0 * ls + ly[None, :])
    return True, float(left.weights @ integrand @ right.weights)


# ---------------------------------------------------------------------------
# potentials
# ---------------------------------------------------------------------------


def potential(g, x, params: EllipticParams) -> np.ndarray:
    """V(g;x) = sum_t g_t(g_t-1) wp(x + omega_t) on the real axis."""
    gv = _g(g)
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for t, gt in enumerate(gv.g):
        coupling = gt * (gt - 1.0)
        if coupling:
            out = out + coupling * ell.wp_shifted_real(x, t, params)
    return out


def potential_trig(g0: float, g1: float, x, r: float = 1.0) -> np.ndarray:
    """V_t = r^2 g0(g0-1)/sin^2 rx + r^2 g1(g1-1)/cos^2 rx."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for coupling, trig, label in ((g0 * (g0 - 1), np.sin, 0), (g1 * (g1 - 1), np.cos, 1)):
        if coupling:
            den = trig(r * x) ** 2
            if np.any(den == 0):
                raise PoleError(f"trigonometric potential singular at endpoint {label}", 0j)
            out = out + r * r * coupling / den
    return out


def potential_diff(g, x, params: EllipticParams) -> np.ndarray:
    """V_d = V_t - V, from the analytically regularized wp pieces; bounded on [0, pi/2r]."""
    gv = _g(g)
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for t, gt in enumerate(gv.g):
        coupling = gt * (gt - 1.0)
        if coupling:
            out = out - coupling * ell.wp_regularized(x, t, params)
    return out
