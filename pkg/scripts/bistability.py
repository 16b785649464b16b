"""Locate a bistable operating point and confirm it with the time-domain oracle.

Scans the drive on resonance for N = 200 until the residual has three sign
changes, then integrates from the ground state and from just above the upper
root and classifies every root.

    python3 scripts/bistability.py
"""
import numpy as np

from cavity_dressed import dynamics
from cavity_dressed.broadening import build_bins
from cavity_dressed.params import Detuning, paper_params
from cavity_dressed.steady_state import _residual_array, classify_stability, solve_intensity


def main():
    bins = build_bins(0.0, 1, "delta")
    det = Detuning(0.0, 0.0)
    for eta in np.geomspace(300, 30000, 21):
        p = paper_params(n_atoms=200, eta=eta)
        xs = np.geomspace(1e-9, 1.01, 200_000) * (p.eta / p.kappa) ** 2
        r = _residual_array(xs, det, p, bins)
        if np.count_nonzero(np.sign(r[:-1]) != np.sign(r[1:])) == 3:
            break
    else:
        raise SystemExit("no bistable drive found")
    print(f"eta = 2pi x {eta:.0f} kHz")
    roots = solve_intensity(det, p, bins)
    for r in roots:
        print(f"  x = {r.x:12.6g}  t_norm = {r.t_norm:.4g}  f_norm = {r.f_norm:.4g}  "
              f"{classify_stability(r, det, p, bins, others=roots).value}")
    low = dynamics.settle(dynamics.ground_state(bins), det, p, bins)
    seed = dynamics.state_from_root(roots[-1].x, det, p, bins)
    high = dynamics.settle(dynamics.EnsembleState(1.05 * seed.alpha, seed.s, seed.z), det, p, bins)
    print(f"from ground state: x = {low.final.intensity:.6g} after {low.final.t * 1e6:.1f} us")
    print(f"from upper seed:   x = {high.final.intensity:.6g} after {high.final.t * 1e6:.1f} us")


if __name__ == "__main__":
    main()
