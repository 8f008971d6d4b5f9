"""Coupling algebra: g <-> lambda <-> c, the dual map, the S4 action and parameter sets."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

__all__ = [
    "CouplingVector",
    "GroupElement",
    "MembershipFlags",
    "NAMED_ELEMENTS",
    "J_N",
    "dual",
    "from_c",
    "membership",
    "mirror",
    "s4_orbit",
    "tilde",
    "to_c",
]

J_N = 0.5 * np.array(
    [
        [1, 1, -1, 1],
        [1, 1, 1, -1],
        [-1, 1, 1, 1],
        [1, -1, 1, 1],
    ],
    dtype=float,
)

# c = C_MAT @ g + C_OFF
_C_MAT = np.array(
    [
        [1, 0, 0, 1],
        [0, 1, 1, 0],
        [0, 1, -1, 0],
        [1, 0, 0, -1],
    ],
    dtype=float,
)
_C_OFF = np.array([-1.0, -1.0, 0.0, 0.0])


@dataclass(frozen=True)
class CouplingVector:
    g: tuple[float, float, float, float]

    def __post_init__(self):
        g = tuple(float(v) for v in self.g)
        if len(g) != 4:
            raise ValueError(f"coupling vector needs 4 entries, got {len(g)}")
        object.__setattr__(self, "g", g)

    @classmethod
    def of(cls, g) -> "CouplingVector":
        return g if isinstance(g, cls) else cls(tuple(g))

    def __getitem__(self, i: int) -> float:
        return self.g[i]

    def __iter__(self):
        return iter(self.g)

    def as_array(self) -> np.ndarray:
        return np.array(self.g)

    @property
    def lam(self) -> tuple[float, ...]:
        return tuple(v - 0.5 for v in self.g)

    @property
    def c(self) -> tuple[float, ...]:
        return to_c(self)

    @property
    def s_g(self) -> float:
        return 0.5 * sum(self.g)

    @property
    def dual(self) -> "CouplingVector":
        return dual(self)

    @property
    def is_self_dual(self) -> bool:
        g0, g1, g2, g3 = self.g
        return g0 + g2 == g1 + g3

    def to_json(self) -> list[float]:
        return list(self.g)


def dual(g) -> CouplingVector:
    """g' = J_N g. Exact on dyadic inputs since J_N has entries +-1/2."""
    g0, g1, g2, g3 = CouplingVector.of(g).g
    return CouplingVector(
        (
            0.5 * (g0 + g1 - g2 + g3),
            0.5 * (g0 + g1 + g2 - g3),
            0.5 * (-g0 + g1 + g2 + g3),
            0.5 * (g0 - g1 + g2 + g3),
        )
    )


def to_c(g) -> tuple[float, float, float, float]:
    g0, g1, g2, g3 = CouplingVector.of(g).g
    return (g0 + g3 - 1.0, g1 + g2 - 1.0, g1 - g2, g0 - g3)


def from_c(c) -> CouplingVector:
    c0, c1, c2, c3 = (float(v) for v in c)
    return CouplingVector(
        (
            0.5 * (c0 + c3) + 0.5,
            0.5 * (c1 + c2) + 0.5,
            0.5 * (c1 - c2) + 0.5,
            0.5 * (c0 - c3) + 0.5,
        )
    )


def mirror(g) -> CouplingVector:
    g0, g1, g2, g3 = CouplingVector.of(g).g
    return CouplingVector((g1, g0, g3, g2))


def tilde(g) -> CouplingVector:
    """Third coset representative, written directly in g."""
    g0, g1, g2, g3 = CouplingVector.of(g).g
    return CouplingVector(
        (
            0.5 * (g0 + g1 + g2 + g3 - 1),
            0.5 * (g0 + g1 - g2 - g3 + 1),
            0.5 * (-g0 + g1 - g2 + g3 + 1),
            0.5 * (g0 - g1 - g2 + g3 + 1),
        )
    )


# ---------------------------------------------------------------------------
# parameter sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MembershipFlags:
    in_tilde_pi: bool
    in_pi: bool
    in_pi_r: bool
    in_pi_g: bool
    margins: dict

    def to_json(self) -> dict:
        return {
            "in_tilde_pi": self.in_tilde_pi,
            "in_pi": self.in_pi,
            "in_pi_r": self.in_pi_r,
            "in_pi_g": self.in_pi_g,
            "margins": dict(self.margins),
        }


def membership(g) -> MembershipFlags:
    """Classify g against the nested sets; boundary points are excluded.

    Margins are the slacks of the defining strict inequalities. The Pi_G test is
    evaluated twice, from the g-form constraints and from the six pairwise
    c-sums c_mu + c_nu > -2; disagreement raises ``AssertionError``.
    """
    gv = CouplingVector.of(g)
    g0, g1, g2, g3 = gv.g
    gp = dual(gv)
    margins = {
        "g0": g0 + 0.5,
        "g1": g1 + 0.5,
        "g0_dual": gp[0] + 0.5,
        "g1_dual": gp[1] + 0.5,
        "s_g": gv.s_g,
        "pi_g_extra": g0 + g1 + 2.0 - g2 - g3,
    }
    in_tilde = margins["g0"] > 0 and margins["g1"] > 0
    in_pi = in_tilde and margins["g0_dual"] > 0 and margins["g1_dual"] > 0
    in_pi_r = in_pi and margins["s_g"] > 0
    in_pi_g = in_pi_r and margins["pi_g_extra"] > 0

    c = to_c(gv)
    pair_sums = [c[i] + c[j] + 2.0 for i, j in itertools.combinations(range(4), 2)]
    margins["c_pairs"] = min(pair_sums)
    via_c = all(m > 0 for m in pair_sums)
    if via_c != in_pi_g and abs(margins["c_pairs"]) > 1e-12:
        raise AssertionError(f"g-form and c-form Pi_G tests disagree at g={gv.g}")
    return MembershipFlags(in_tilde, in_pi, in_pi_r, in_pi_g, margins)


# ---------------------------------------------------------------------------
# S4 acting on c by permutation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GroupElement:
    """Permutation acting on c by (w c)_i = c_{perm[i]}."""

    perm: tuple[int, int, int, int]

    def apply_c(self, c) -> tuple[float, ...]:
        return tuple(float(c[k]) for k in self.perm)

    def apply(self, g) -> CouplingVector:
        return from_c(self.apply_c(to_c(g)))

    def compose(self, other: "GroupElement") -> "GroupElement":
        """self after other: (self*other)(c) = self(other(c))."""
        return GroupElement(tuple(other.perm[k] for k in self.perm))

    def inverse(self) -> "GroupElement":
        inv = [0] * 4
        for i, k in enumerate(self.perm):
            inv[k] = i
        return GroupElement(tuple(inv))

    @property
    def name(self) -> str | None:
        return _NAMES.get(self.perm)

    def one_line(self) -> str:
        return "".join(str(k) for k in self.perm)


NAMED_ELEMENTS = {
    "identity": GroupElement((0, 1, 2, 3)),
    "dual": GroupElement((0, 1, 3, 2)),  # c2 <-> c3
    "flip_g2": GroupElement((0, 2, 1, 3)),  # g2 -> 1 - g2: c1 <-> c2
    "flip_g3": GroupElement((3, 1, 2, 0)),  # g3 -> 1 - g3: c0 <-> c3
    "mirror": GroupElement((1, 0, 3, 2)),
    "tilde": GroupElement((0, 2, 3, 1)),
}
_NAMES = {e.perm: name for name, e in NAMED_ELEMENTS.items()}


def group_elements() -> list[GroupElement]:
    """All 24 elements, lexicographic in one-line notation."""
    return [GroupElement(p) for p in itertools.permutations(range(4))]


def s4_orbit(g) -> list[tuple[GroupElement, CouplingVector]]:
    gv = CouplingVector.of(g)
    return [(w, w.apply(gv)) for w in group_elements()]
