"""Central fluorescence maximum at delta_c = 0: dependence on broadening, dephasing and drive.

    python3 scripts/central_feature.py --out results/central
"""
import argparse
from pathlib import Path

import numpy as np

from cavity_dressed.io import table_to_csv
from cavity_dressed.params import KHZ, paper_params
from cavity_dressed.spectra import central_feature, probe_spectrum

MHZ = 1e3 * KHZ
BASE = dict(n_atoms=22500, eta=80000, delta_omega=620, gamma_d=1)


def profile(axis, **overrides):
    p = paper_params(**{**BASE, **overrides})
    return probe_spectrum(0.0, axis, p).f_norm[0]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/central")
    ap.add_argument("--points", type=int, default=241)
    args = ap.parse_args()
    axis = np.linspace(-6, 6, args.points) * MHZ
    rows = {"scan": [], "value_khz": [], "ratio": [], "fwhm_mhz": []}

    def report(scan, value, f):
        cf = central_feature(axis, f)
        rows["scan"].append(scan)
        rows["value_khz"].append(value)
        rows["ratio"].append(cf.ratio)
        rows["fwhm_mhz"].append(cf.fwhm / MHZ)
        print(f"{scan:12s} {value:9.0f} kHz  peak/valley {cf.ratio:6.3f}  FWHM {cf.fwhm / MHZ:6.3f} MHz")

    for dw in (300, 450, 600, 750, 900):
        report("delta_omega", dw, profile(axis, delta_omega=dw))
    for gd in (1, 155, 310, 620, 900, 1240):
        report("gamma_d", gd, profile(axis, gamma_d=gd))
    for eta in (800, 8000, 80000):
        report("eta", eta, profile(axis, eta=eta))

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "central_feature.csv").write_text(table_to_csv(rows))

    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    for gd in (1, 310, 620, 1240):
        ax.plot(axis / MHZ, profile(axis, gamma_d=gd), label=f"gamma_d = 2pi x {gd} kHz")
    ax.set_xlabel("probe detuning delta_p / 2pi [MHz]")
    ax.set_ylabel("F / (N gamma)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out / "central_feature.png", metadata={"Software": None})


if __name__ == "__main__":
    main()
