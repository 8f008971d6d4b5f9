"""Discretized Heun operator and Hilbert-Schmidt integral operator.

The Heun operator is discretized by Galerkin projection onto the eigenbasis of
the trigonometric comparison operator,

    phi_m(x) = (sin rx)^{g0} (cos rx)^{g1} p_m(cos 2rx),

with p_m orthonormal Jacobi polynomials of parameters (g0 - 1/2, g1 - 1/2).
In that basis the comparison operator is diagonal with entries
r^2 (g0 + g1 + 2m)^2 and the difference potential V_d is bounded and analytic,
so low eigenvalues converge exponentially in the basis size.

The integral operator is discretized by a Nystrom scheme whose Gauss-Jacobi
rules absorb the endpoint powers of the weights on both sides.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .couplings import CouplingVector, dual, membership
from .elliptic import DomainError, EllipticParams, wp_shifted_real
from .elliptic import log_derivatives
from .kernelops import log_s_kernel, log_weight_reduced, potential_diff
from .quadrature import QuadratureRule, jacobi_rule

__all__ = [
    "DiscretizedOperator",
    "RankOneResult",
    "SpectrumResult",
    "SvdResult",
    "TransportResult",
    "commutator_defect",
    "eigenfunction_transport",
    "galerkin_quad_size",
    "heun_matrix",
    "heun_spectrum",
    "hs_matrix",
    "hs_svd",
    "rank_one_case",
    "transport_modes",
    "trig_basis",
]

DEFAULT_SIZE = 48
CONVERGENCE_RTOL = 1e-9


@dataclass
class DiscretizedOperator:
    matrix: np.ndarray
    basis_tag: tuple
    size: int
    rules: tuple[QuadratureRule, ...] = ()

    def symmetry_defect(self) -> float:
        a = self.matrix
        return float(np.linalg.norm(a - a.T) / np.linalg.norm(a))


@dataclass
class SpectrumResult:
    g: CouplingVector
    eigenvalues: np.ndarray
    converged_count: int
    basis_size: int
    reference_size: int
    eigenvectors: np.ndarray = field(repr=False)
    proven_regime: bool = True

    def converged(self) -> np.ndarray:
        return self.eigenvalues[: self.converged_count]

    def to_json(self) -> dict:
        return {
            "g": self.g.to_json(),
            "eigenvalues": self.eigenvalues.tolist(),
            "converged_count": self.converged_count,
            "basis_size": self.basis_size,
            "reference_size": self.reference_size,
            "proven_regime": self.proven_regime,
        }


@dataclass
class SvdResult:
    g: CouplingVector
    singular_values: np.ndarray
    converged_count: int
    quad_size: int
    left_nodes: np.ndarray = field(repr=False)
    right_nodes: np.ndarray = field(repr=False)
    # e_n(g; x_i) and e_n(g'; y_j), one column per n
    left_vectors: np.ndarray = field(repr=False)
    right_vectors: np.ndarray = field(repr=False)
    d0_left: np.ndarray = field(repr=False)
    d0_right: np.ndarray = field(repr=False)
    rank_one: bool = False
    signed_values: np.ndarray = field(default_factory=lambda: np.zeros(0))
    pairing: list[int] = field(default_factory=list)

    @property
    def sign_convention_ok(self) -> bool:
        k = self.converged_count
        return bool(np.all(self.d0_left[:k] > 0))

    @property
    def signs_consistent(self) -> bool:
        """Whether d_n(g'; 0) > 0 also holds after fixing d_n(g; 0) > 0."""
        k = self.converged_count
        return bool(np.all(self.d0_right[:k] > 0))

    def to_json(self) -> dict:
        return {
            "g": self.g.to_json(),
            "singular_values": self.singular_values.tolist(),
            "converged_count": self.converged_count,
            "quad_size": self.quad_size,
            "rank_one": self.rank_one,
            "sign_convention_ok": self.sign_convention_ok,
            "signs_consistent": self.signs_consistent,
            "signed_values": np.asarray(self.signed_values).tolist(),
            "pairing": list(self.pairing),
        }


# ---------------------------------------------------------------------------
# trigonometric basis
# ---------------------------------------------------------------------------


def _check_tilde_pi(g0: float, g1: float) -> None:
    if not (g0 > -0.5 and g1 > -0.5):
        raise DomainError(f"need g0, g1 > -1/2 for a square-integrable basis (got {g0}, {g1})")


def trig_basis(g0: float, g1: float, m: int, x, r: float = 1.0) -> np.ndarray:
    """m-th normalized eigenfunction of the trigonometric comparison operator at x."""
    _check_tilde_pi(g0, g1)
    x = np.asarray(x, dtype=float)
    rule = jacobi_rule(1, g0 - 0.5, g1 - 0.5, r)
    poly = rule.orthonormal_basis(m + 1, x.ravel())[m].reshape(x.shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        env = np.where(g0 == 0, 1.0, np.sin(r * x) ** g0) * np.where(g1 == 0, 1.0, np.cos(r * x) ** g1)
    return env * poly


def galerkin_quad_size(m: int, params: EllipticParams) -> int:
    # V_d has Jacobi coefficients decaying like e^{-k r alpha}
    return m + math.ceil(20.0 / (params.r * params.alpha)) + 8


def _basis_at_zero(g0: float, g1: float, m: int, r: float) -> np.ndarray:
    rule = jacobi_rule(1, g0 - 0.5, g1 - 0.5, r)
    return rule.orthonormal_basis(m, np.zeros(1))[:, 0]


def heun_matrix(g, m: int, params: EllipticParams, quad_size: int | None = None) -> DiscretizedOperator:
    """Galerkin matrix of H(g) = H_t - V_d in the first m comparison eigenfunctions."""
    gv = CouplingVector.of(g)
    g0, g1 = gv[0], gv[1]
    _check_tilde_pi(g0, g1)
    if m < 2:
        raise ValueError("basis size must be at least 2")
    q = quad_size or galerkin_quad_size(m, params)
    rule = jacobi_rule(q, g0 - 0.5, g1 - 0.5, params.r)
    basis = rule.orthonormal_basis(m)
    vd = potential_diff(gv, rule.nodes, params)
    k = np.arange(m)
    diag = params.r**2 * (g0 + g1 + 2 * k) ** 2
    mat = np.diag(diag) - (basis * (rule.weights * vd)) @ basis.T
    return DiscretizedOperator(mat, ("jacobi", g0, g1), m, (rule,))


def _eigh_signed(op: DiscretizedOperator, r: float):
    evals, evecs = np.linalg.eigh(op.matrix)
    _, g0, g1 = op.basis_tag
    # d_m(g; 0) has the sign of the polynomial part at y = 1
    at_zero = _basis_at_zero(g0, g1, op.size, r) @ evecs
    evecs = evecs * np.where(at_zero < 0, -1.0, 1.0)
    return evals, evecs


def _converged_prefix(a: np.ndarray, b: np.ndarray, rtol: float, floor: float) -> int:
    k = min(len(a), len(b))
    ok = np.abs(a[:k] - b[:k]) <= rtol * np.maximum(np.abs(a[:k]), floor)
    bad = np.flatnonzero(~ok)
    return int(bad[0]) if bad.size else k


def heun_spectrum(g, m: int, params: EllipticParams, rtol: float = CONVERGENCE_RTOL) -> SpectrumResult:
    """Sorted Galerkin eigenvalues; convergence certified by a re-solve at ceil(1.5 m)."""
    gv = CouplingVector.of(g)
    op = heun_matrix(gv, m, params)
    evals, evecs = _eigh_signed(op, params.r)
    m_ref = math.ceil(1.5 * m)
    ref = np.linalg.eigvalsh(heun_matrix(gv, m_ref, params).matrix)
    count = _converged_prefix(evals, ref, rtol, params.r**2)
    return SpectrumResult(
        g=gv,
        eigenvalues=evals,
        converged_count=count,
        basis_size=m,
        reference_size=m_ref,
        eigenvectors=evecs,
        proven_regime=membership(gv).in_pi_r,
    )


# ---------------------------------------------------------------------------
# integral operator
# ---------------------------------------------------------------------------


def _hs_rules(gv: CouplingVector, n: int, params: EllipticParams):
    gp = dual(gv)
    left = jacobi_rule(n, gv[0] - 0.5, gv[1] - 0.5, params.r)
    right = jacobi_rule(n, gp[0] - 0.5, gp[1] - 0.5, params.r)
    return gp, left, right


def hs_matrix(g, n: int, params: EllipticParams) -> DiscretizedOperator:
    """Nystrom matrix sqrt(u_i) Psi(x_i, y_j) sqrt(v_j) of the integral operator.

    u, v are plain dx-weights of Gauss-Jacobi rules carrying the endpoint
    exponents (g0, g1) on the left and (g0', g1') on the right; the endpoint
    powers cancel analytically, so entries are formed from smooth factors only.
    """
    gv = CouplingVector.of(g)
    if not membership(gv).in_pi:
        raise DomainError(f"g = {gv.g} is outside Pi: kernel not square integrable")
    gp, left, right = _hs_rules(gv, n, params)
    lx = 0.5 * log_weight_reduced(gv, left.nodes, params) + 0.5 * np.log(left.weights)
    ly = 0.5 * log_weight_reduced(gp, right.nodes, params) + 0.5 * np.log(right.weights)
    mat = np.exp(lx[:, None] + log_s_kernel(gv.s_g, left.nodes, right.nodes, params, outer=True) + ly[None, :])
    return DiscretizedOperator(mat, ("nystrom", gv.g, gp.g), n, (left, right))


def _svd_core(gv: CouplingVector, n: int, params: EllipticParams):
    op = hs_matrix(gv, n, params)
    left, right = op.rules
    gp = dual(gv)
    u, sv, vt = np.linalg.svd(op.matrix)
    v = vt.T
    # d_n(g;0) = (1/nu_n) sum_j S(0,y_j) w(g';y_j)^{1/2} v_j e_n(g';y_j)
    fy = np.exp(log_s_kernel(gv.s_g, 0.0, right.nodes, params) + 0.5 * log_weight_reduced(gp, right.nodes, params))
    fx = np.exp(log_s_kernel(gv.s_g, left.nodes, 0.0, params) + 0.5 * log_weight_reduced(gv, left.nodes, params))
    with np.errstate(divide="ignore", invalid="ignore"):
        d0_left = (fy * np.sqrt(right.weights)) @ v / sv
        d0_right = (fx * np.sqrt(left.weights)) @ u / sv
    sign = np.where(d0_left < 0, -1.0, 1.0)
    return op, sv, u * sign, v * sign, d0_left * sign, d0_right * sign


def _rank_one_svd(gv: CouplingVector, n: int, params: EllipticParams) -> SvdResult:
    gp, left, right = _hs_rules(gv, n, params)
    # Psi = w(g;x)^{1/2} w(g';y)^{1/2}: a single singular triple
    fl = np.exp(0.5 * log_weight_reduced(gv, left.nodes, params))
    fr = np.exp(0.5 * log_weight_reduced(gp, right.nodes, params))
    norm_l = math.sqrt(float(left.weights @ fl**2))
    norm_r = math.sqrt(float(right.weights @ fr**2))
    env_l = np.sqrt(left.absorbed_weight())
    env_r = np.sqrt(right.absorbed_weight())
    return SvdResult(
        g=gv,
        singular_values=np.array([norm_l * norm_r]),
        converged_count=1,
        quad_size=n,
        left_nodes=left.nodes,
        right_nodes=right.nodes,
        left_vectors=(env_l * fl / norm_l)[:, None],
        right_vectors=(env_r * fr / norm_r)[:, None],
        d0_left=np.array([math.exp(0.5 * float(log_weight_reduced(gv, 0.0, params))) / norm_l]),
        d0_right=np.array([math.exp(0.5 * float(log_weight_reduced(gp, 0.0, params))) / norm_r]),
        rank_one=True,
    )


def hs_svd(
    g,
    n: int,
    params: EllipticParams,
    modes: int = 0,
    basis_size: int | None = None,
    rtol: float = CONVERGENCE_RTOL,
) -> SvdResult:
    """Singular values and sign-fixed singular functions of the integral operator.

    With ``modes > 0`` the first ``modes`` Heun eigenvectors are also transported
    through the adjoint operator to obtain the signed coefficients mu_m, and
    each is paired with the singular function it overlaps most (the pairing
    permutation).
    """
    gv = CouplingVector.of(g)
    flags = membership(gv)
    if not flags.in_pi:
        raise DomainError(f"g = {gv.g} is outside Pi: kernel not square integrable")
    if abs(gv.s_g) < 1e-14:
        return _rank_one_svd(gv, n, params)
    op, sv, u, v, d0l, d0r = _svd_core(gv, n, params)
    left, right = op.rules
    n_ref = math.ceil(1.5 * n)
    ref = np.linalg.svd(hs_matrix(gv, n_ref, params).matrix, compute_uv=False)
    count = _converged_prefix(sv, ref, rtol, 0.0)
    res = SvdResult(
        g=gv,
        singular_values=sv,
        converged_count=count,
        quad_size=n,
        left_nodes=left.nodes,
        right_nodes=right.nodes,
        left_vectors=u / np.sqrt(left.plain_weights())[:, None],
        right_vectors=v / np.sqrt(right.plain_weights())[:, None],
        d0_left=d0l,
        d0_right=d0r,
    )
    if modes > 0:
        m = basis_size or n
        k = min(modes, count)
        trans = transport_modes(gv, k, n, m, params)
        res.signed_values = np.array([t.mu for t in trans])
        spec = heun_spectrum(gv, m, params)
        basis = left.orthonormal_basis(m)
        # overlap <e_n(g), b_m(g)> = sum_i sqrt(weights_i) U_in p(x_i) . c_m
        overlaps = (u.T * np.sqrt(left.weights)) @ basis.T @ spec.eigenvectors[:, :k]
        res.pairing = [int(np.argmax(np.abs(overlaps[:, j]))) for j in range(k)]
    return res


# ---------------------------------------------------------------------------
# transport of eigenfunctions
# ---------------------------------------------------------------------------


@dataclass
class TransportResult:
    g: CouplingVector
    mode: int
    energy: float
    mu: float
    residual: float
    nodes: np.ndarray = field(repr=False)
    samples: np.ndarray = field(repr=False)
    coefficients: np.ndarray = field(repr=False)
    ambiguous: bool = False

    def to_json(self) -> dict:
        return {
            "g": self.g.to_json(),
            "mode": self.mode,
            "energy": self.energy,
            "mu": self.mu,
            "residual": self.residual,
            "ambiguous": self.ambiguous,
        }


def transport_modes(g, modes: int, n: int, m: int, params: EllipticParams) -> list[TransportResult]:
    """Apply the adjoint integral operator I(g') to the Heun eigenvectors b_k(g), k < modes.

    Each image is expanded in the comparison basis for g', compared with the
    sign-fixed Galerkin eigenvector b_k(g') (giving mu_k) and tested as an
    eigenvector of the Galerkin matrix of H(g') at energy E_k(g).
    """
    gv = CouplingVector.of(g)
    if not membership(gv).in_pi_r:
        raise DomainError(f"g = {gv.g} is outside Pi_r")
    gp = dual(gv)
    spec = heun_spectrum(gv, m, params)
    op_p = heun_matrix(gp, m, params)
    evals_p, evecs_p = _eigh_signed(op_p, params.r)
    if modes > spec.converged_count:
        raise ValueError(f"only {spec.converged_count} converged modes available, asked for {modes}")

    y_rule = jacobi_rule(n, gv[0] - 0.5, gv[1] - 0.5, params.r)
    x_rule = jacobi_rule(n, gp[0] - 0.5, gp[1] - 0.5, params.r)
    # q_k(y_j) = polynomial part of b_k(g) at the y nodes
    q = y_rule.orthonormal_basis(m).T @ spec.eigenvectors[:, :modes]
    ky = np.exp(
        log_s_kernel(gv.s_g, x_rule.nodes, y_rule.nodes, params, outer=True)
        + 0.5 * log_weight_reduced(gv, y_rule.nodes, params)[None, :]
    )
    # I(g') b_k(g) = w(g';x)^{1/2} F_k(x)
    f = ky @ (y_rule.weights[:, None] * q)
    fx = np.exp(0.5 * log_weight_reduced(gp, x_rule.nodes, params))[:, None] * f
    coeffs = x_rule.orthonormal_basis(m) @ (x_rule.weights[:, None] * fx)

    gaps = np.diff(spec.eigenvalues[: modes + 1])
    scale = np.maximum(np.abs(spec.eigenvalues), params.r**2)
    env = np.sqrt(x_rule.absorbed_weight())
    out = []
    for k in range(modes):
        t = coeffs[:, k]
        norm = float(np.linalg.norm(t))
        t_hat = t / norm
        energy = float(spec.eigenvalues[k])
        resid = float(np.linalg.norm(op_p.matrix @ t_hat - energy * t_hat) / scale[k])
        mu = float(evecs_p[:, k] @ t)
        near = [gaps[j] for j in (k - 1, k) if 0 <= j < len(gaps)]
        ambiguous = bool(near) and min(near) < 1e-6 * scale[k]
        samples = env * fx[:, k] / norm * math.copysign(1.0, mu)
        out.append(TransportResult(gv, k, energy, mu, resid, x_rule.nodes, samples, t_hat, ambiguous))
    return out


def eigenfunction_transport(g, m: int, n: int, basis_size: int, params: EllipticParams) -> TransportResult:
    """Transport of the single mode m; see :func:`transport_modes`."""
    return transport_modes(g, m + 1, n, basis_size, params)[m]


# ---------------------------------------------------------------------------
# rank-one case and commutation diagnostic
# ---------------------------------------------------------------------------


@dataclass
class RankOneResult:
    g: CouplingVector
    e0_closed_form: float
    e0_dual: float
    e0_galerkin: float
    identity_constant: float
    identity_residual: float
    eigen_residual: float

    def max_route_spread(self) -> float:
        vals = [self.e0_closed_form, self.e0_dual, self.e0_galerkin]
        return (max(vals) - min(vals)) / max(1.0, abs(self.e0_closed_form))

    def to_json(self) -> dict:
        return {
            "g": self.g.to_json(),
            "e0_closed_form": self.e0_closed_form,
            "e0_dual": self.e0_dual,
            "e0_galerkin": self.e0_galerkin,
            "identity_constant": self.identity_constant,
            "identity_residual": self.identity_residual,
            "eigen_residual": self.eigen_residual,
        }


def ground_energy_closed_form(g, params: EllipticParams) -> float:
    """E_0(g) = sum_{j=1}^3 g_j e_j (g_j + 2 g0), valid when sum(g) = 0."""
    g0, *rest = CouplingVector.of(g).g
    return float(sum(gj * ej * (gj + 2 * g0) for gj, ej in zip(rest, params.e)))


def functional_identity(g, x, params: EllipticParams) -> np.ndarray:
    """sum_t g_t^2 wp(x+w_t) - (sum_{t=0,1} g_t s'/s(x+w_t) + g_{t+2} R'/R(x+w_t))^2."""
    g0, g1, g2, g3 = CouplingVector.of(g).g
    x = np.asarray(x, dtype=float)
    w1 = math.pi / (2 * params.r)
    ds0, dr0 = log_derivatives(x, params)
    ds1, dr1 = log_derivatives(x + w1, params)
    drift = g0 * ds0 + g2 * dr0 + g1 * ds1 + g3 * dr1
    pot = sum(gt * gt * wp_shifted_real(x, t, params) for t, gt in enumerate((g0, g1, g2, g3)))
    return np.real(pot - drift**2)


def rank_one_case(g, params: EllipticParams, m: int = DEFAULT_SIZE, grid: int = 201) -> RankOneResult:
    """Ground state data for s_g = 0, where w(g)^{1/2} is an exact eigenfunction."""
    gv = CouplingVector.of(g)
    if abs(gv.s_g) > 1e-14:
        raise ValueError(f"rank-one case needs s_g = 0 (got {gv.s_g})")
    if not membership(gv).in_pi:
        raise DomainError(f"g = {gv.g} is outside Pi")
    w1 = params.omega1
    x = np.linspace(0.02 * w1, 0.98 * w1, grid)
    vals = functional_identity(gv, x, params)

    op = heun_matrix(gv, m, params)
    evals = np.linalg.eigvalsh(op.matrix)
    rule = op.rules[0]
    # Galerkin coefficients of w(g)^{1/2} = w_t^{1/2} exp(red/2)
    c = rule.orthonormal_basis(m) @ (rule.weights * np.exp(0.5 * log_weight_reduced(gv, rule.nodes, params)))
    c /= np.linalg.norm(c)
    e0 = ground_energy_closed_form(gv, params)
    resid = float(np.linalg.norm(op.matrix @ c - e0 * c) / max(1.0, abs(e0)))
    return RankOneResult(
        g=gv,
        e0_closed_form=e0,
        e0_dual=ground_energy_closed_form(dual(gv), params),
        e0_galerkin=float(evals[0]),
        identity_constant=float(np.mean(vals)),
        identity_residual=float(np.max(vals) - np.min(vals)),
        eigen_residual=resid,
    )


def commutator_defect(g, m: int, params: EllipticParams, n: int | None = None, shift: float | None = None) -> float:
    """Relative norm of [(B + c)^{-1}, T] with B the Heun Galerkin matrix and T the
    same-basis matrix of I(g) I(g)^*; it vanishes for the exact operators."""
    gv = CouplingVector.of(g)
    n = n or 2 * m
    op = heun_matrix(gv, m, params)
    b = op.matrix
    a = hs_matrix(gv, n, params)
    left = a.rules[0]
    phi = (left.orthonormal_basis(m) * np.sqrt(left.weights)).T
    t = phi.T @ a.matrix @ a.matrix.T @ phi
    if shift is None:
        shift = params.r**2 - float(np.linalg.eigvalsh(b)[0])
    res = np.linalg.inv(b + shift * np.eye(m))
    comm = res @ t - t @ res
    return float(np.linalg.norm(comm) / (np.linalg.norm(res) * np.linalg.norm(t)))
