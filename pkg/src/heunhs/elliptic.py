"""Elliptic building blocks on the lattice with half-periods pi/2r and i*alpha/2.

Every quantity needed downstream is assembled from two entire functions:

    R(z) = prod_{l>=0} (1 - q^{2l+1} e^{2irz}) (1 - q^{2l+1} e^{-2irz}),   q = e^{-r alpha}
    s(z) = (sin rz / r) prod_{k>=1} (1 - q^{2k} e^{2irz}) (1 - q^{2k} e^{-2irz}) / (1 - q^{2k})^2

with R(z + i alpha/2) = i p e^{-irz} s(z). On the real axis both logarithms are
evaluated through their cosine series, which is what keeps kernels and
potentials accurate up to the interval endpoints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ConditioningError",
    "DomainError",
    "EllipticParams",
    "PoleError",
    "lattice_constants",
    "log_derivatives",
    "log_r_real",
    "log_s_real",
    "log_s_reduced",
    "r_function",
    "s_function",
    "wp",
    "wp_prime",
    "wp_regularized",
    "wp_shifted_real",
    "wp_tilde",
]

# rα below this makes every series crawl; a modular transformation would be needed.
MIN_R_ALPHA = 0.05


class DomainError(ValueError):
    """Argument outside the region where the requested representation is valid."""


class ConditioningError(ValueError):
    """Lattice too close to degenerate (nome near 1) for the truncated series."""


class PoleError(ZeroDivisionError):
    """Evaluation at a pole; ``location`` holds the offending argument."""

    def __init__(self, message: str, location: complex):
        super().__init__(message)
        self.location = location


@dataclass(frozen=True)
class EllipticParams:
    """Period data plus derived lattice constants and truncation orders.

    Build with :func:`lattice_constants`; direct construction skips validation.
    """

    r: float
    alpha: float
    epsilon: float
    nome: float
    p: float
    eta: float
    e: tuple[float, float, float]
    fourier_truncation: int
    product_truncation: int
    fourier_tail_bound: float
    _n: np.ndarray = field(repr=False, compare=False)

    @property
    def omega1(self) -> float:
        return math.pi / (2.0 * self.r)

    @property
    def wp_shift(self) -> float:
        """The additive constant 2*eta*r/pi relating wp to -(ln s)''."""
        return 2.0 * self.eta * self.r / math.pi

    @property
    def coef_r(self) -> np.ndarray:
        """1/(n sinh(n r alpha)): cosine coefficients of -ln R."""
        n = self._n
        return 1.0 / (n * np.sinh(n * self.r * self.alpha))

    @property
    def coef_s(self) -> np.ndarray:
        """2/(n (e^{2 n r alpha} - 1)): coefficients of ln(s(x) r / sin rx)."""
        n = self._n
        return 2.0 / (n * np.expm1(2.0 * n * self.r * self.alpha))


def _fourier_terms(rate: float, tol: float) -> int:
    # smallest N with sum_{n>N} e^{-n*rate} = e^{-N rate} e^{-rate}/(1-e^{-rate}) < tol
    tail_factor = -math.expm1(-rate)
    return max(1, math.ceil(math.log(tol * tail_factor) / -rate))


def lattice_constants(r: float, alpha: float, epsilon: float = 1e-15) -> EllipticParams:
    """Assemble :class:`EllipticParams` for half-periods (pi/2r, i alpha/2).

    ``eta`` is fixed by the Laurent condition z^2 wp(z) -> 1: with
    wp(x) = r^2/sin^2(rx) - sum_n 8 n r^2 cos(2nrx)/(e^{2nr alpha}-1) - 2 eta r/pi,
    the constant term of the expansion at 0 must vanish.
    """
    if not (r > 0 and alpha > 0 and epsilon > 0):
        raise DomainError(f"need r, alpha, epsilon > 0 (got {r}, {alpha}, {epsilon})")
    ra = r * alpha
    if ra < MIN_R_ALPHA:
        raise ConditioningError(f"r*alpha = {ra:.3g} < {MIN_R_ALPHA}: nome too close to 1")
    q = math.exp(-ra)
    tol = epsilon * 1e-2
    n_f = _fourier_terms(ra, tol)
    tail = math.exp(-n_f * ra) * math.exp(-ra) / -math.expm1(-ra)
    # product factors (1 - q^{2k}) differ from 1 by q^{2k}
    n_p = max(1, math.ceil(math.log(tol) / (-2.0 * ra)))
    k = np.arange(1, n_p + 1, dtype=float)
    log_p = math.log(2.0 * r) + 2.0 * float(np.sum(np.log1p(-np.exp(-2.0 * k * ra))))
    n = np.arange(1, n_f + 1, dtype=float)
    # constant term of wp - r^2/sin^2 at 0 must cancel r^2/3
    shift = r * r / 3.0 - 8.0 * r * r * float(np.sum(n / np.expm1(2.0 * n * ra)))
    eta = shift * math.pi / (2.0 * r)
    params = EllipticParams(
        r=float(r),
        alpha=float(alpha),
        epsilon=float(epsilon),
        nome=q,
        p=math.exp(log_p),
        eta=eta,
        e=(0.0, 0.0, 0.0),
        fourier_truncation=n_f,
        product_truncation=n_p,
        fourier_tail_bound=tail,
        _n=n,
    )
    w1 = math.pi / (2.0 * r)
    e1 = float(wp_shifted_real(0.0, 1, params))
    e2 = float(np.real(wp_tilde(0.0, params)))
    e3 = float(np.real(wp_tilde(-w1, params)))
    return EllipticParams(**{**params.__dict__, "e": (e1, e2, e3)})


# ---------------------------------------------------------------------------
# R and s
# ---------------------------------------------------------------------------


def _strip_terms(params: EllipticParams, imag_abs: float, width: float) -> np.ndarray:
    """Harmonic indices needed for a cosine series whose terms decay like
    e^{-n r (width - 2|Im z|)}."""
    rate = params.r * (width - 2.0 * imag_abs)
    n_max = _fourier_terms(rate, params.epsilon * 1e-2)
    return np.arange(1, n_max + 1, dtype=float)


def _r_fourier(z: np.ndarray, params: EllipticParams) -> np.ndarray:
    imag = float(np.max(np.abs(z.imag))) if z.size else 0.0
    if imag >= params.alpha / 2:
        raise DomainError("Fourier form of R requires |Im z| < alpha/2")
    n = _strip_terms(params, imag, params.alpha)
    coef = 1.0 / (n * np.sinh(n * params.r * params.alpha))
    series = np.cos(2.0 * params.r * np.multiply.outer(z, n)) @ coef
    return np.exp(-series)


def _theta_product(z: np.ndarray, params: EllipticParams, offset: int) -> np.ndarray:
    """prod_{l>=0} (1 - q^{2l+offset} e^{2irz})(1 - q^{2l+offset} e^{-2irz})."""
    ra = params.r * params.alpha
    imag = float(np.max(np.abs(z.imag))) if z.size else 0.0
    # factor l differs from 1 by about exp(-(2l+offset) ra + 2 r |Im z|)
    tol = params.epsilon * 1e-2
    n_terms = max(1, math.ceil((2.0 * params.r * imag - math.log(tol)) / (2.0 * ra)) + 1)
    powers = np.exp(-(2.0 * np.arange(n_terms) + offset) * ra)
    phase = np.exp(2j * params.r * z)
    fac = (1.0 - np.multiply.outer(phase, powers)) * (1.0 - np.multiply.outer(1.0 / phase, powers))
    return np.prod(fac, axis=-1)


def r_function(z, params: EllipticParams, form: str = "auto"):
    """Evaluate R(z).

    ``form`` is ``"fourier"`` (strip |Im z| < alpha/2 only), ``"product"``
    (entire), or ``"auto"``: Fourier inside the strip, product elsewhere.
    """
    zc = np.asarray(z, dtype=complex)
    flat = zc.ravel()
    if form == "product":
        out = _theta_product(flat, params, offset=1)
    elif form == "fourier":
        out = _r_fourier(flat, params)
    elif form == "auto":
        out = np.empty(flat.shape, dtype=complex)
        inside = np.abs(flat.imag) < params.alpha / 4
        if inside.any():
            out[inside] = _r_fourier(flat[inside], params)
        if (~inside).any():
            out[~inside] = _theta_product(flat[~inside], params, offset=1)
    else:
        raise ValueError(f"unknown form {form!r}")
    out = out.reshape(zc.shape)
    return out if out.ndim else complex(out)


def s_function(z, params: EllipticParams):
    """s(z) from its own product; odd, real on the real axis, s(x)/x -> 1."""
    zc = np.asarray(z, dtype=complex)
    flat = zc.ravel()
    ra = params.r * params.alpha
    k = np.arange(1, params.product_truncation + 1, dtype=float)
    norm = np.prod((-np.expm1(-2.0 * k * ra)) ** 2)
    out = np.sin(params.r * flat) / params.r * _theta_product(flat, params, offset=2) / norm
    out = out.reshape(zc.shape)
    return out if out.ndim else complex(out)


def log_r_real(x, params: EllipticParams) -> np.ndarray:
    """ln R(x) for real x (R is positive on the real axis)."""
    x = np.asarray(x, dtype=float)
    return -(np.cos(2.0 * params.r * np.multiply.outer(x, params._n)) @ params.coef_r)


def log_s_reduced(x, params: EllipticParams, shifted: bool = False) -> np.ndarray:
    """Smooth part of ln s at real x.

    Returns ln(s(x) / sin rx) or, with ``shifted``, ln(s(x + pi/2r) / cos rx);
    both are analytic through the endpoints of [0, pi/2r].
    """
    x = np.asarray(x, dtype=float)
    n = params._n
    cosines = np.cos(2.0 * params.r * np.multiply.outer(x, n))
    if shifted:
        cosines = cosines * (-1.0) ** n
    return -math.log(params.r) + (1.0 - cosines) @ params.coef_s


def log_s_real(x, params: EllipticParams) -> np.ndarray:
    """ln s(x) for real x in (0, pi/r)."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        return np.log(np.sin(params.r * x)) + log_s_reduced(x, params)


# ---------------------------------------------------------------------------
# derivatives and Weierstrass functions
# ---------------------------------------------------------------------------


def _reduce(z: np.ndarray, params: EllipticParams) -> np.ndarray:
    """Shift by lattice periods so Re z in [-pi/2r, pi/2r), Im z in [-alpha/2, alpha/2)."""
    period = math.pi / params.r
    re = z.real - period * np.floor(z.real / period + 0.5)
    im = z.imag - params.alpha * np.floor(z.imag / params.alpha + 0.5)
    return re + 1j * im


def _check_lattice(z: np.ndarray, params: EllipticParams, scale: float = 1e-13) -> None:
    zr = _reduce(z, params)
    hit = np.abs(zr) < scale * params.omega1
    if hit.any():
        loc = complex(z.ravel()[np.argmax(hit.ravel())])
        raise PoleError(f"lattice point at z = {loc}", loc)


def log_derivatives(z, params: EllipticParams):
    """Return (s'/s, R'/R) at z.

    s'/s = r cot rz + sum_n 4r sin(2nrz)/(e^{2nr alpha}-1) needs |Im z| < alpha;
    R'/R = sum_n 2r sin(2nrz)/sinh(nr alpha) needs |Im z| < alpha/2.
    """
    zc = np.asarray(z, dtype=complex)
    imag = float(np.max(np.abs(zc.imag))) if zc.size else 0.0
    if imag >= params.alpha / 2:
        raise DomainError("term-wise R'/R needs |Im z| < alpha/2")
    _check_lattice(zc, params)
    r, ra = params.r, params.r * params.alpha
    n = _strip_terms(params, imag, params.alpha)
    sines = np.sin(2.0 * r * np.multiply.outer(zc, n))
    ds = r / np.tan(r * zc) + sines @ (4.0 * r / np.expm1(2.0 * n * ra))
    dr = sines @ (2.0 * r / np.sinh(n * ra))
    if ds.ndim == 0:
        return complex(ds), complex(dr)
    return ds, dr


def wp(z, params: EllipticParams):
    """Weierstrass wp(z; pi/2r, i alpha/2) for complex z off the lattice."""
    zc = np.asarray(z, dtype=complex)
    _check_lattice(zc, params)
    zr = _reduce(zc, params)
    r, ra = params.r, params.r * params.alpha
    n = _strip_terms(params, params.alpha / 2, 2 * params.alpha)
    series = np.cos(2.0 * r * np.multiply.outer(zr, n)) @ (8.0 * n * r * r / np.expm1(2.0 * n * ra))
    out = r * r / np.sin(r * zr) ** 2 - series - params.wp_shift
    return out if out.ndim else complex(out)


def wp_prime(z, params: EllipticParams):
    """Derivative of :func:`wp` by term-wise differentiation."""
    zc = np.asarray(z, dtype=complex)
    _check_lattice(zc, params)
    zr = _reduce(zc, params)
    r, ra = params.r, params.r * params.alpha
    n = _strip_terms(params, params.alpha / 2, 2 * params.alpha)
    series = np.sin(2.0 * r * np.multiply.outer(zr, n)) @ (16.0 * n * n * r**3 / np.expm1(2.0 * n * ra))
    out = -2.0 * r**3 * np.cos(r * zr) / np.sin(r * zr) ** 3 + series
    return out if out.ndim else complex(out)


def wp_tilde(z, params: EllipticParams):
    """wp(z + i alpha/2) = -(ln R)''(z) - 2 eta r / pi, for |Im z| < alpha/2."""
    zc = np.asarray(z, dtype=complex)
    imag = float(np.max(np.abs(zc.imag))) if zc.size else 0.0
    if imag >= params.alpha / 2:
        raise PoleError("wp_tilde has poles on |Im z| = alpha/2", complex(zc.ravel()[0]))
    r = params.r
    n = _strip_terms(params, imag, params.alpha)
    coef = 4.0 * r * r * n / np.sinh(n * r * params.alpha)
    out = -(np.cos(2.0 * r * np.multiply.outer(zc, n)) @ coef) - params.wp_shift
    return out if out.ndim else complex(out)


def wp_regularized(x, t: int, params: EllipticParams) -> np.ndarray:
    """wp(x + omega_t) on the real axis with its real-axis pole removed.

    For t = 0 the subtracted part is r^2/sin^2 rx, for t = 1 it is r^2/cos^2 rx;
    t = 2, 3 have no real poles and nothing is subtracted. The subtraction is
    done analytically, so the result is accurate at x = 0 and x = pi/2r.
    """
    x = np.asarray(x, dtype=float)
    r, ra = params.r, params.r * params.alpha
    n = params._n
    cosines = np.cos(2.0 * r * np.multiply.outer(x, n))
    if t in (1, 3):
        cosines = cosines * (-1.0) ** n
    if t in (0, 1):
        coef = 8.0 * n * r * r / np.expm1(2.0 * n * ra)
    elif t in (2, 3):
        coef = 4.0 * n * r * r / np.sinh(n * ra)
    else:
        raise ValueError(f"half-period index must be 0..3, got {t}")
    return -(cosines @ coef) - params.wp_shift


def wp_shifted_real(x, t: int, params: EllipticParams) -> np.ndarray:
    """wp(x + omega_t) for real x, omega = (0, pi/2r, i alpha/2, -pi/2r - i alpha/2)."""
    x = np.asarray(x, dtype=float)
    reg = wp_regularized(x, t, params)
    r = params.r
    if t == 0:
        s = np.sin(r * x)
        if np.any(s == 0):
            raise PoleError("wp(x) at a real lattice point", complex(x.ravel()[np.argmin(np.abs(s))]))
        return reg + r * r / s**2
    if t == 1:
        c = np.cos(r * x)
        if np.any(np.abs(c) < 1e-300):
            raise PoleError("wp(x + omega_1) at a real lattice point", complex(x.ravel()[np.argmin(np.abs(c))]))
        return reg + r * r / c**2
    return reg
