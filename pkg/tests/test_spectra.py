import math

import numpy as np
import pytest

from heunhs import spectra as sp
from heunhs.couplings import dual
from heunhs.elliptic import DomainError, wp_shifted_real
from heunhs.kernelops import hs_norm_finite, potential_trig
from heunhs.special import CLOSED_FORM_SINGULAR_VALUES, closed_form_eigenvalues

from conftest import rel


def sine_basis_spectrum(g2, g3, P, m=60, q=200):
    """Dirichlet sine-basis Galerkin for g0 = g1 = 1: H = -d^2 + sum_{t=2,3} g_t(g_t-1) wp(x + w_t)."""
    y, w = np.polynomial.legendre.leggauss(q)
    x = (y + 1) * P.omega1 / 2
    w = w * P.omega1 / 2
    k = np.arange(1, m + 1)
    phi = np.sqrt(2 / P.omega1) * np.sin(np.outer(k, x) * math.pi / P.omega1)
    v = g2 * (g2 - 1) * wp_shifted_real(x, 2, P) + g3 * (g3 - 1) * wp_shifted_real(x, 3, P)
    mat = np.diag((k * math.pi / P.omega1) ** 2) + (phi * (w * v)) @ phi.T
    return np.linalg.eigvalsh(mat)


def test_trig_basis_orthonormal_and_eigen(params):
    g0, g1, r = 1.7, 0.3, params.r
    x = np.linspace(0.2, params.omega1 - 0.2, 7)
    h = 1e-4
    for m in range(4):
        f = lambda t: sp.trig_basis(g0, g1, m, t, r)
        second = (f(x + h) - 2 * f(x) + f(x - h)) / h**2
        lhs = -second + potential_trig(g0, g1, x, r) * f(x)
        assert np.allclose(lhs, r**2 * (g0 + g1 + 2 * m) ** 2 * f(x), rtol=1e-5, atol=1e-5)
    rule = sp.jacobi_rule(40, g0 - 0.5, g1 - 0.5, r)
    vals = np.array([sp.trig_basis(g0, g1, m, rule.nodes, r) for m in range(5)])
    gram = (vals * rule.plain_weights()) @ vals.T
    assert np.allclose(gram, np.eye(5), atol=1e-12)


def test_heun_matrix_symmetric_and_free_case(params):
    op = sp.heun_matrix((0.9, 0.8, 0.7, 0.6), 24, params)
    assert op.symmetry_defect() < 1e-14
    free = sp.heun_matrix((1, 0, 1, 0), 10, params)
    assert np.allclose(free.matrix, np.diag((1 + 2 * np.arange(10)) ** 2.0), atol=1e-12)


def test_domain_errors(params):
    with pytest.raises(DomainError):
        sp.heun_matrix((-0.5, 0.5, 0.5, 0.5), 10, params)
    with pytest.raises(DomainError):
        sp.hs_matrix((0.0, 0.0, 3.0, -3.0), 10, params)
    with pytest.raises(DomainError):
        sp.transport_modes((0.3, -0.3, 0.3, -0.3), 2, 24, 24, params)
    with pytest.raises(ValueError):
        sp.rank_one_case((1, 0, 0, 0), params)


@pytest.mark.parametrize("g2,g3", [(0.3, 1.6), (2.2, -0.4), (1.5, 1.5)])
def test_galerkin_matches_sine_basis_oracle(params_alt, g2, g3):
    ours = sp.heun_spectrum((1.0, 1.0, g2, g3), 48, params_alt)
    ref = sine_basis_spectrum(g2, g3, params_alt)
    assert ours.converged_count >= 6
    assert rel(ours.eigenvalues[:6], ref[:6]) < 1e-10


@pytest.mark.parametrize("g", [(1.5, 0.5, 0.5, 0.5), (0.5, 0.5, 0.5, 1.5), (0.5, 0.5, -0.5, 0.5)])
def test_closed_form_eigenvalues(params_alt, g):
    res = sp.heun_spectrum(g, 48, params_alt)
    cf = closed_form_eigenvalues(g)
    assert res.converged_count >= 7
    assert rel(res.eigenvalues[:7], cf(np.arange(7), params_alt)) < 1e-8


def test_spectrum_simple_and_flagged(params):
    res = sp.heun_spectrum((0.9, 0.8, 0.7, 0.6), 48, params)
    assert np.all(np.diff(res.converged()) > 0)
    assert res.proven_regime
    outside = sp.heun_spectrum((0.3, -0.3, 0.3, -0.3), 32, params)
    assert not outside.proven_regime
    assert set(res.to_json()) >= {"eigenvalues", "converged_count", "basis_size"}


def test_eigenvalue_asymptotics(params):
    res = sp.heun_spectrum((0.9, 0.8, 0.7, 0.6), 48, params)
    m = np.arange(10, res.converged_count)
    ratio = res.eigenvalues[m] / (4 * params.r**2 * m**2)
    assert np.all(np.abs(ratio - 1) < 5 / m)


@pytest.mark.parametrize("g", sorted(CLOSED_FORM_SINGULAR_VALUES))
def test_closed_form_singular_values(params_alt, g):
    res = sp.hs_svd(g, 48, params_alt)
    cf = CLOSED_FORM_SINGULAR_VALUES[g]
    assert res.converged_count >= 9
    assert rel(res.singular_values[:9], cf(np.arange(9), params_alt)) < 1e-8
    assert res.sign_convention_ok and res.signs_consistent


def test_parseval(params):
    g = (0.9, 0.8, 0.7, 0.6)
    res = sp.hs_svd(g, 48, params)
    _, norm2 = hs_norm_finite(g, params)
    partial = float(np.sum(res.singular_values[: res.converged_count] ** 2))
    tail = float(np.sum(res.singular_values[res.converged_count:] ** 2))
    assert partial <= norm2 * (1 + 1e-12)
    assert norm2 - partial <= tail + 1e-12 * norm2


def test_singular_functions_orthonormal(params):
    res = sp.hs_svd((0.9, 0.8, 0.7, 0.6), 40, params)
    left = sp.jacobi_rule(40, 0.4, 0.3, params.r)
    k = res.converged_count
    e = res.left_vectors[:, :k]
    gram = (e * left.plain_weights()[:, None]).T @ e
    assert np.allclose(gram, np.eye(k), atol=1e-10)


def test_rank_one_svd(params):
    res = sp.hs_svd((0.3, -0.3, 0.3, -0.3), 40, params)
    assert res.rank_one and len(res.singular_values) == 1
    _, norm2 = hs_norm_finite((0.3, -0.3, 0.3, -0.3), params)
    assert res.singular_values[0] ** 2 == pytest.approx(norm2, rel=1e-12)


@pytest.mark.parametrize("g", [(1, 1, 0, 1), (1, 0, 1, 1), (1, 0, 0, 0)])
def test_transport(params, g):
    out = sp.transport_modes(g, 6, 48, 48, params)
    for t in out:
        assert t.residual < 1e-8
        assert t.mu > 0
        assert not t.ambiguous
    mus = [t.mu for t in out]
    assert np.all(np.diff(mus) < 0)
    spec_p = sp.heun_spectrum(dual(g), 48, params)
    assert rel([t.energy for t in out], spec_p.eigenvalues[:6]) < 1e-12


def test_svd_pairing_and_mu(params):
    res = sp.hs_svd((0.9, 0.8, 0.7, 0.6), 48, params, modes=5)
    assert res.pairing == list(range(5))
    # |mu_m| equals the paired singular value
    assert rel(np.abs(res.signed_values), res.singular_values[:5]) < 1e-8


def test_rank_one_case(params):
    res = sp.rank_one_case((0.3, -0.3, 0.3, -0.3), params)
    assert res.identity_residual < 1e-10
    assert res.max_route_spread() < 1e-8
    assert res.eigen_residual < 1e-8
    assert res.identity_constant == pytest.approx(res.e0_closed_form, rel=1e-9)


def test_commutator_defect(params):
    g = (0.9, 0.8, 0.7, 0.6)
    d16 = sp.commutator_defect(g, 16, params)
    d24 = sp.commutator_defect(g, 24, params)
    d32 = sp.commutator_defect(g, 32, params)
    # decays until it reaches the roundoff floor
    assert d24 < d16
    assert max(d24, d32) < 1e-13
