import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heunhs import kernelops as ko
from heunhs.couplings import dual, membership
from heunhs.elliptic import PoleError
from heunhs.special import closed_form_singular_values

from conftest import rel


def interior(P, n=25, pad=0.03):
    return np.linspace(pad, P.omega1 - pad, n)


@pytest.mark.parametrize("g", [(0.9, 0.8, 0.7, 0.6), (1.0, 0.0, 0.0, 1.0), (0.3, -0.2, 1.4, 0.4)])
def test_weight_routes_agree(params, g):
    x = interior(params)
    assert rel(ko.weight_via_c(g, x, params), ko.weight(g, x, params)) < 1e-12


def test_weight_endpoint_limits(params):
    ends = np.array([0.0, params.omega1])
    assert np.all(ko.weight((1.0, 0.5, 0.2, 0.1), ends, params) == 0)
    assert np.all(np.isinf(ko.weight((-0.3, -0.2, 0.2, 0.1), ends, params)))


def test_endpoint_exponents(params):
    e0, e1 = ko.endpoint_exponents((0.7, -0.3, 1.1, 0.4), params)
    assert e0 == pytest.approx(1.4, abs=1e-6)
    assert e1 == pytest.approx(-0.6, abs=1e-6)


def test_s_kernel_fourier_matches_product(params_alt):
    P = params_alt
    x = interior(P, 16)
    X, Y = np.meshgrid(x, x, indexing="ij")
    g = (0.9, 0.8, 0.7, 0.6)
    assert rel(ko.s_kernel(g, X, Y, P), ko.s_kernel(g, X, Y, P, form="product")) < 1e-12


def test_s_kernel_depends_only_on_s_g(params):
    x = interior(params, 7)
    X, Y = np.meshgrid(x, x)
    a = ko.s_kernel((1.0, 0.5, 0.2, 0.3), X, Y, params)
    b = ko.s_kernel((0.0, 1.0, 1.0, 0.0), X, Y, params)
    assert np.array_equal(a, b)
    # symmetric in its arguments
    assert rel(a, a.T) < 1e-15


def test_s_kernel_is_one_when_s_g_vanishes(params):
    x = interior(params, 5)
    assert np.all(ko.s_kernel((0.3, -0.3, 0.3, -0.3), x, x[::-1], params) == 1.0)


def test_psi_broadcast_matches_matrix(params):
    g = (0.9, 0.8, 0.7, 0.6)
    x = interior(params, 9)
    y = interior(params, 6, 0.1)
    assert rel(ko.psi_kernel(g, x[:, None], y[None, :], params), ko.psi_matrix(g, x, y, params)) < 1e-14


@pytest.mark.parametrize("g", [(0.9, 0.8, 0.7, 0.6), (1.0, 1.0, 0.0, 1.0), (0.2, 1.3, -0.4, 0.8)])
def test_adjoint_symmetry(params, g):
    x = interior(params, 12)
    y = interior(params, 10, 0.07)
    lhs = ko.psi_matrix(g, x, y, params)
    rhs = ko.psi_matrix(dual(g), y, x, params).T
    assert rel(lhs, rhs) < 1e-12


def test_rank_one_minors(params):
    g = (0.4, 0.1, -0.2, -0.3)
    x = interior(params, 8)
    psi = ko.psi_matrix(g, x, x, params)
    minors = psi[:-1, :-1] * psi[1:, 1:] - psi[:-1, 1:] * psi[1:, :-1]
    scale = np.abs(psi[:-1, :-1] * psi[1:, 1:])
    assert np.max(np.abs(minors) / scale) < 1e-13
    # and for s_g != 0 they do not vanish
    psi = ko.psi_matrix((0.9, 0.8, 0.7, 0.6), x, x, params)
    minors = psi[:-1, :-1] * psi[1:, 1:] - psi[:-1, 1:] * psi[1:, :-1]
    assert np.max(np.abs(minors) / np.abs(psi[:-1, :-1] * psi[1:, 1:])) > 1e-3


@pytest.mark.parametrize("g", [(0, 0, 1, 1), (1, 1, 1, 1), (1, 0, 1, 0)])
def test_hs_norm_matches_closed_form_parseval(params, g):
    cf = closed_form_singular_values(g)
    total = float(np.sum(cf(np.arange(400), params) ** 2))
    finite, est = ko.hs_norm_finite(g, params)
    assert finite
    assert est == pytest.approx(total, rel=1e-12)


def test_hs_norm_infinite_outside_pi(params):
    finite, est = ko.hs_norm_finite((-0.6, 0.5, 0.5, 0.5), params)
    assert not finite and math.isinf(est)
    # dual exponent below -1/2
    assert not ko.hs_norm_finite((0.0, 0.0, 3.0, -3.0), params)[0]


def test_membership_matches_hs_finiteness_on_boundary_grid(params):
    # 100 points straddling g0 = -1/2 and g0' = -1/2 boundaries
    offsets = np.concatenate([-np.logspace(-1, -5, 25), np.logspace(-5, -1, 25)])
    pts = [(-0.5 + d, 0.4, 0.3, 0.2) for d in offsets]
    pts += [(0.1, 0.2, 1.4 - d, 0.6 - d) for d in offsets]  # g0' = 0.15 - ... crosses -1/2
    assert len(pts) == 100
    disagree = [g for g in pts if membership(g).in_pi != ko.hs_norm_finite(g, params, n=8)[0]]
    assert not disagree


def test_potential_decomposition(params_alt):
    P = params_alt
    g = (1.3, 0.6, 1.7, -0.4)
    x = interior(P)
    lhs = ko.potential(g, x, P)
    rhs = ko.potential_trig(g[0], g[1], x, P.r) - ko.potential_diff(g, x, P)
    assert rel(lhs, rhs) < 1e-12


def test_potential_trig_pole_and_vd_bounded(params):
    with pytest.raises(PoleError):
        ko.potential_trig(1.5, 0.0, np.array([0.0]))
    ends = np.array([0.0, params.omega1])
    vd = ko.potential_diff((1.5, 2.5, 0.7, 1.2), ends, params)
    assert np.all(np.isfinite(vd))
    # free couplings give no potential at all
    assert np.all(ko.potential((1, 0, 1, 0), interior(params), params) == 0)


def test_kernel_eval_bundle(params):
    from heunhs.couplings import CouplingVector

    k = ko.KernelEval(CouplingVector((0.9, 0.8, 0.7, 0.6)), params)
    x = interior(params, 4)
    assert np.array_equal(k.weight(x), ko.weight(k.g, x, params))
    assert np.array_equal(k.psi(x, x), ko.psi_kernel(k.g, x, x, params))


@settings(max_examples=30, deadline=None)
@given(st.tuples(*[st.floats(-0.4, 2.0)] * 4))
def test_property_weight_positive_inside(g):
    from heunhs.elliptic import lattice_constants

    P = lattice_constants(1.0, 1.0)
    w = ko.weight(g, np.linspace(0.1, P.omega1 - 0.1, 9), P)
    assert np.all(w > 0) and np.all(np.isfinite(w))
