import numpy as np
import pytest

from cavity_dressed import dynamics
from cavity_dressed.broadening import BinSpec, build_bins
from cavity_dressed.errors import IntegrationError, ValidationError
from cavity_dressed.params import KHZ, Detuning, paper_params
from cavity_dressed.steady_state import solve_intensity, steady_state

DELTA = build_bins(0.0, 1, "delta")


def test_undriven_ground_state_is_fixed():
    p = paper_params(n_atoms=100)
    bins = build_bins(300 * KHZ, 8, "gauss_hermite")
    d = dynamics.derivative(dynamics.ground_state(bins), Detuning(1e5, 2e5), p, bins)
    assert d.alpha == 0 and not np.any(d.s) and not np.any(d.z)


def test_drive_only_derivative():
    p = paper_params(n_atoms=100, eta=500)
    bins = build_bins(300 * KHZ, 8, "gauss_hermite")
    d = dynamics.derivative(dynamics.ground_state(bins), Detuning(0, 0), p, bins)
    assert d.alpha == pytest.approx(-0.5j * p.eta)
    assert not np.any(d.s) and not np.any(d.z)


def test_z_derivative_is_real(rng):
    p = paper_params(n_atoms=1e3, eta=100)
    a = complex(*rng.normal(0, 5, 2))
    s = rng.normal(0, 0.2, 16) + 1j * rng.normal(0, 0.2, 16)
    dz = 1j * p.g0 * (np.conj(a) * s - np.conj(s) * a)
    assert np.max(np.abs(dz.imag)) <= 1e-14 * np.max(np.abs(dz.real))


@pytest.mark.parametrize("det", [Detuning(0, 0), Detuning(2e5, -3e5), Detuning(0, 4e6)])
def test_derivative_vanishes_at_roots(fig4_params, det):
    p = fig4_params.replace(eta=2000 * KHZ, n_atoms=3000)
    bins = BinSpec("gauss_hermite", 32).build(p)
    for root in solve_intensity(det, p, bins):
        st = dynamics.state_from_root(root.x, det, p, bins)
        d = dynamics.derivative(st, det, p, bins)
        scale = max(
            abs(0.5 * p.eta),
            abs(p.kappa * st.alpha),
            p.g0 * np.max(np.abs(st.alpha * st.z)),
            p.gamma,
        )
        norm = max(abs(d.alpha), np.max(np.abs(d.s)), np.max(np.abs(d.z)))
        assert norm < 1e-8 * scale


def test_empty_cavity_closed_form():
    p = paper_params(n_atoms=0, eta=700)
    det = Detuning(50 * KHZ, 120 * KHZ)
    t_end = 3 / p.kappa
    traj = dynamics.evolve(dynamics.ground_state(DELTA), det, p, DELTA, t_end)
    a_ss = 0.5 * p.eta / ((det.delta_p - det.delta_c) + 0.5j * p.kappa)
    expected = a_ss * (1 - np.exp((1j * (det.delta_p - det.delta_c) - p.kappa / 2) * t_end))
    assert traj.final.alpha == pytest.approx(expected, rel=1e-6)


def test_excited_decay_closed_form():
    p = paper_params(n_atoms=10)
    bins = build_bins(200 * KHZ, 4, "gauss_hermite")
    start = dynamics.EnsembleState(0j, np.zeros(4, complex), np.zeros(4))
    t_end = 2 / p.gamma
    traj = dynamics.evolve(start, Detuning(0, 0), p, bins, t_end)
    np.testing.assert_allclose(traj.final.z, -1 + np.exp(-p.gamma * t_end), rtol=1e-7)


def test_settle_undriven_immediately():
    p = paper_params(n_atoms=10)
    traj = dynamics.settle(dynamics.ground_state(DELTA), Detuning(0, 0), p, DELTA, horizon=1.0)
    assert traj.settled and traj.final.t == 0.0


def test_settle_weak_drive_unique_root():
    p = paper_params(n_atoms=300, eta=700, delta_omega=150, gamma_d=30)
    det = Detuning(100 * KHZ, 900 * KHZ)
    bins = BinSpec("gauss_hermite", 16).build(p)
    res = steady_state(det, p, bins)
    assert len(res.roots) == 1
    traj = dynamics.settle(dynamics.ground_state(bins), det, p, bins)
    assert traj.settled
    assert traj.final.intensity == pytest.approx(res.x, rel=1e-5)


def test_bistable_two_seeds(bistable_params):
    det = Detuning(0, 0)
    roots = solve_intensity(det, bistable_params, DELTA)
    low = dynamics.settle(dynamics.ground_state(DELTA), det, bistable_params, DELTA)
    seed = dynamics.state_from_root(roots[-1].x, det, bistable_params, DELTA)
    seed = dynamics.EnsembleState(seed.alpha * 1.05, seed.s, seed.z)
    high = dynamics.settle(seed, det, bistable_params, DELTA)
    assert low.settled and high.settled
    assert low.final.intensity == pytest.approx(roots[0].x, rel=1e-5)
    assert high.final.intensity == pytest.approx(roots[-1].x, rel=1e-5)


def test_bloch_ball_along_trajectory():
    p = paper_params(n_atoms=500, eta=2000, delta_omega=200, gamma_d=50)
    bins = BinSpec("gauss_hermite", 12).build(p)
    traj = dynamics.evolve(dynamics.ground_state(bins), Detuning(0, 300 * KHZ), p, bins, 30e-6, snapshots=True)
    assert np.all(np.diff(traj.t) > 0)
    assert max(s.bloch_excess() for s in traj.snapshots) <= dynamics.BLOCH_EPS


def test_bloch_violation_aborts():
    p = paper_params(n_atoms=1)
    bad = dynamics.EnsembleState(0j, np.array([0.6 + 0j]), np.array([0.0]))
    with pytest.raises(IntegrationError, match="Bloch"):
        dynamics.evolve(bad, Detuning(0, 0), p, DELTA, 1e-7)


def test_rtol_halving_changes_little():
    p = paper_params(n_atoms=300, eta=1500, delta_omega=100)
    bins = BinSpec("gauss_hermite", 8).build(p)
    det = Detuning(0, 500 * KHZ)
    a = dynamics.evolve(dynamics.ground_state(bins), det, p, bins, 10e-6, rtol=1e-8).final.intensity
    b = dynamics.evolve(dynamics.ground_state(bins), det, p, bins, 10e-6, rtol=5e-9).final.intensity
    assert abs(a - b) <= 1e-6 * a


def test_invalid_arguments():
    p = paper_params(n_atoms=1)
    with pytest.raises(ValidationError):
        dynamics.evolve(dynamics.ground_state(DELTA), Detuning(0, 0), p, DELTA, 0.0)
    with pytest.raises(ValidationError):
        dynamics.evolve(dynamics.ground_state(build_bins(1.0, 4, "gauss_hermite")), Detuning(0, 0), p, DELTA, 1e-6)
