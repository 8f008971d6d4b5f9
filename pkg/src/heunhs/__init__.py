"""Numerical spectra of the elliptic Heun operator and its Hilbert-Schmidt integral operator."""

from .couplings import CouplingVector, dual, membership, s4_orbit
from .elliptic import ConditioningError, DomainError, EllipticParams, PoleError, lattice_constants
from .spectra import heun_spectrum, hs_svd, rank_one_case, transport_modes

__version__ = "0.1.0"

__all__ = [
    "ConditioningError",
    "CouplingVector",
    "DomainError",
    "EllipticParams",
    "PoleError",
    "dual",
    "heun_spectrum",
    "hs_svd",
    "lattice_constants",
    "membership",
    "rank_one_case",
    "s4_orbit",
    "transport_modes",
]
