"""Weak-drive normal-mode splitting against the g0*sqrt(N) prediction.

    python3 scripts/splitting_vs_n.py
"""
import argparse

from cavity_dressed.params import KHZ, paper_params
from cavity_dressed.spectra import splitting_vs_n

MHZ = 1e3 * KHZ


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=float, nargs="+", default=[250, 1000, 4000, 16000, 64000])
    ap.add_argument("--eta-khz", type=float, default=0.7, help="drive; default kappa/100")
    args = ap.parse_args()
    p = paper_params(eta=args.eta_khz)
    print("       N   measured [MHz]  g0 sqrt(N) [MHz]   ratio  resolved")
    for e in splitting_vs_n(args.n, p):
        print(f"{e.n:8.0f}  {e.measured_splitting / MHZ:14.4f}  {e.sqrtN_prediction / MHZ:16.4f}"
              f"  {e.measured_splitting / e.sqrtN_prediction:6.4f}  {e.resolved}")


if __name__ == "__main__":
    main()
