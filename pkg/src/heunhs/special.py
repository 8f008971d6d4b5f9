"""Closed-form singular values and eigenvalues for the exactly solvable couplings."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .couplings import CouplingVector, dual
from .elliptic import EllipticParams

__all__ = ["CLOSED_FORM_EIGENVALUES", "CLOSED_FORM_SINGULAR_VALUES", "PRESETS", "ClosedForm", "resolve_preset"]


@dataclass(frozen=True)
class ClosedForm:
    g: tuple[float, float, float, float]
    formula_id: str
    formula: str
    values: Callable[[np.ndarray, EllipticParams], np.ndarray]

    def __call__(self, n, params: EllipticParams) -> np.ndarray:
        return self.values(np.asarray(n, dtype=float), params)


def _ra(params: EllipticParams) -> float:
    return params.r * params.alpha


CLOSED_FORM_SINGULAR_VALUES = {
    (0, 0, 1, 1): ClosedForm(
        (0, 0, 1, 1), "nu[0011]", "pi / (p cosh(n r alpha))",
        lambda n, P: math.pi / (P.p * np.cosh(n * _ra(P))),
    ),
    (1, 1, 0, 0): ClosedForm(
        (1, 1, 0, 0), "nu[1100]", "pi e^{r alpha} / (p cosh((n+1) r alpha))",
        lambda n, P: math.pi * math.exp(_ra(P)) / (P.p * np.cosh((n + 1) * _ra(P))),
    ),
    (1, 1, 1, 1): ClosedForm(
        (1, 1, 1, 1), "nu[1111]", "2 pi (n+1) r e^{r alpha} / (p^2 sinh((n+1) r alpha))",
        lambda n, P: 2 * math.pi * (n + 1) * P.r * math.exp(_ra(P)) / (P.p**2 * np.sinh((n + 1) * _ra(P))),
    ),
    (1, 0, 0, 1): ClosedForm(
        (1, 0, 0, 1), "nu[1001]", "pi e^{r alpha/2} / (p cosh((n+1/2) r alpha))",
        lambda n, P: math.pi * math.exp(_ra(P) / 2) / (P.p * np.cosh((n + 0.5) * _ra(P))),
    ),
    (1, 0, 1, 0): ClosedForm(
        (1, 0, 1, 0), "nu[1010]", "pi e^{r alpha/2} / (p sinh((n+1/2) r alpha))",
        lambda n, P: math.pi * math.exp(_ra(P) / 2) / (P.p * np.sinh((n + 0.5) * _ra(P))),
    ),
}


def _free(offset: int, label: str, g) -> ClosedForm:
    return ClosedForm(
        tuple(g), f"E[{label}]", f"({'2n' if not offset else f'2n+{offset}'})^2 r^2",
        lambda n, P: (2 * n + offset) ** 2 * P.r**2,
    )


# the sixteen couplings with entries in {0, 1} have V = 0; their duals are isospectral
CLOSED_FORM_EIGENVALUES = {
    (1.5, 0.5, 0.5, 0.5): _free(2, "(3,1,1,1)/2", (1.5, 0.5, 0.5, 0.5)),
    (0.5, 0.5, 0.5, 1.5): _free(1, "(1,1,1,3)/2", (0.5, 0.5, 0.5, 1.5)),
    (0.5, 0.5, -0.5, 0.5): _free(1, "(1,1,-1,1)/2", (0.5, 0.5, -0.5, 0.5)),
}
for _g in itertools.product((0, 1), repeat=4):
    CLOSED_FORM_EIGENVALUES[tuple(map(float, _g))] = _free(_g[0] + _g[1], "".join(map(str, _g)), _g)


def closed_form_eigenvalues(g) -> ClosedForm | None:
    return CLOSED_FORM_EIGENVALUES.get(tuple(float(v) for v in CouplingVector.of(g).g))


def closed_form_singular_values(g) -> ClosedForm | None:
    key = tuple(CouplingVector.of(g).g)
    for k, cf in CLOSED_FORM_SINGULAR_VALUES.items():
        if tuple(float(v) for v in k) == key:
            return cf
    return None


PRESETS = {
    "0011": (0, 0, 1, 1),
    "1100": (1, 1, 0, 0),
    "1111": (1, 1, 1, 1),
    "1001": (1, 0, 0, 1),
    "1010": (1, 0, 1, 0),
    "1101": (1, 1, 0, 1),
    "1101-dual": (1.5, 0.5, 0.5, 0.5),
    "1011": (1, 0, 1, 1),
    "1011-dual": (0.5, 0.5, 0.5, 1.5),
    "1000": (1, 0, 0, 0),
    "1000-dual": (0.5, 0.5, -0.5, 0.5),
    "generic": (0.9, 0.8, 0.7, 0.6),
    "rank-one": (0.3, -0.3, 0.3, -0.3),
}


def resolve_preset(name: str) -> CouplingVector:
    try:
        return CouplingVector(PRESETS[name])
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None


# (g, kind) pairs checked by the special-cases experiment: kind "svd" compares
# singular values, "spectrum" compares eigenvalues of g and of its dual.
SPECIAL_CASES = [
    ((0, 0, 1, 1), "svd"),
    ((1, 1, 0, 0), "svd"),
    ((1, 1, 1, 1), "svd"),
    ((1, 0, 0, 1), "svd"),
    ((1, 0, 1, 0), "svd"),
    ((1, 1, 0, 1), "spectrum"),
    ((1, 0, 1, 1), "spectrum"),
    ((1, 0, 0, 0), "spectrum"),
]


def dual_closed_form(g) -> ClosedForm | None:
    return closed_form_eigenvalues(dual(g))
