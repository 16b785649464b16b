import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from cavity_dressed.broadening import BinSpec, Strategy, build_bins, convergence_probe, gaussian_density
from cavity_dressed.errors import ValidationError
from cavity_dressed.params import KHZ, paper_params


def test_density_peak_and_sigma_point():
    assert gaussian_density(0.0, 1.0) == pytest.approx(1 / math.sqrt(2 * math.pi), rel=1e-15)
    dw = 3.7
    assert gaussian_density(dw, dw) == pytest.approx(math.exp(-0.5) / math.sqrt(2 * math.pi * dw**2), rel=1e-15)


def test_density_normalized_at_fig2_width():
    dw = 900 * KHZ
    total, _ = quad(gaussian_density, -8 * dw, 8 * dw, args=(dw,), epsabs=0, epsrel=1e-13, points=[0.0])
    assert abs(total - 1) < 1e-10


def test_density_zero_width_rejected():
    with pytest.raises(ValidationError, match="delta"):
        gaussian_density(0.0, 0.0)


def test_delta_bins():
    b = build_bins(0.0, 1, "delta")
    assert b.nodes.tolist() == [0.0] and b.weights.tolist() == [1.0]
    assert b.strategy is Strategy.DELTA


def test_two_point_rule():
    dw = 2.5
    b = build_bins(dw, 2, "gauss_hermite")
    np.testing.assert_allclose(b.nodes, [-dw, dw], rtol=1e-14)
    np.testing.assert_allclose(b.weights, [0.5, 0.5], rtol=1e-14)


def test_fig4_second_moment():
    dw = 620 * KHZ
    b = build_bins(dw, 257, "gauss_hermite")
    assert b.moment(2) == pytest.approx(dw**2, rel=1e-9)


@pytest.mark.parametrize("m", [4, 8, 16, 64])
def test_gauss_hermite_moments(m):
    dw = 1.3
    b = build_bins(dw, m, "gauss_hermite")
    assert abs(b.weights.sum() - 1) < 1e-12
    for k in range(1, 4):
        if 2 * k < 2 * m:
            double_fact = math.prod(range(2 * k - 1, 0, -2))
            assert b.moment(2 * k) == pytest.approx(double_fact * dw ** (2 * k), rel=1e-8)
        assert abs(b.moment(2 * k - 1)) < 1e-9 * dw ** (2 * k - 1)


@pytest.mark.parametrize("m,dw", [(0, 1.0), (2, 0.0)])
def test_invalid_counts(m, dw):
    with pytest.raises(ValidationError):
        build_bins(dw, m, "gauss_hermite")


def test_delta_strategy_needs_zero_width():
    with pytest.raises(ValidationError):
        build_bins(1.0, 1, "delta")


def test_adaptive_needs_width():
    with pytest.raises(ValidationError):
        build_bins(1.0, 8, "adaptive_lorentzian", center=0.0)


@settings(max_examples=60, deadline=None)
@given(center=st.floats(-20, 20), width=st.floats(1e-4, 2.0), order=st.integers(4, 12))
def test_adaptive_invariants(center, width, order):
    dw = 1.0
    b = build_bins(dw, order, "adaptive_lorentzian", center=center, width=width)
    assert abs(b.weights.sum() - 1) < 1e-12
    assert np.all(b.weights >= 0)
    assert abs(b.moment(1)) < 1e-9 * dw
    assert np.all(np.abs(b.nodes) <= 8 * dw)


def test_adaptive_resolves_narrow_lorentzian():
    # integral of a Lorentzian of half-width 1e-3 sigma centered at 0.4 sigma, against quad
    dw, w0, c = 1.0, 1e-3, 0.4
    b = build_bins(dw, 8, "adaptive_lorentzian", center=c, width=w0)
    approx = np.sum(b.weights * w0 / ((b.nodes - c) ** 2 + w0**2))
    exact, _ = quad(lambda o: gaussian_density(o, dw) * w0 / ((o - c) ** 2 + w0**2), -8, 8,
                    points=[c], limit=400, epsabs=0, epsrel=1e-12)
    assert approx == pytest.approx(exact, rel=1e-9)
    gh = build_bins(dw, 64, "gauss_hermite")
    gh_val = np.sum(gh.weights * w0 / ((gh.nodes - c) ** 2 + w0**2))
    assert abs(gh_val - exact) / exact > 1e-2  # plain Gauss-Hermite misses the resonance


def test_adaptive_low_order_rejected():
    with pytest.raises(ValidationError, match="m >= 4"):
        build_bins(1.0, 3, "adaptive_lorentzian", width=0.1)


def test_bin_spec_switches_to_delta():
    p = paper_params(n_atoms=10)
    assert BinSpec().build(p).strategy is Strategy.DELTA


def test_convergence_probe_reports_m(fig4_params):
    p = fig4_params
    spec = BinSpec("adaptive_lorentzian", 4)
    m_star = convergence_probe(p, 300 * KHZ, 10.0, spec, rtol=1e-8)
    from cavity_dressed.response import collective_gamma

    g1 = collective_gamma(10.0, 300 * KHZ, p, BinSpec(spec.strategy, m_star).build(p, 300 * KHZ)).gamma_coll
    g2 = collective_gamma(10.0, 300 * KHZ, p, BinSpec(spec.strategy, 2 * m_star).build(p, 300 * KHZ)).gamma_coll
    assert abs(g1 - g2) <= 1e-8 * abs(g2)
