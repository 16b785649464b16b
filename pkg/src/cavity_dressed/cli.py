"""Command-line front end.

    cavity-dressed {sweep,spectrum,dynamics,roots} --config RUN.ini [--out DIR]
    cavity-dressed check

Exit codes: 0 success, 2 configuration error, 3 numerical or I/O failure.
"""
from __future__ import annotations

import argparse
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import dynamics
from .broadening import BinSpec, build_bins
from .errors import ConfigError, IntegrationError, SolverError, ValidationError
from .io import RunConfig, axis_from_block, load_config, render_heatmap, write_metadata, write_tabular
from .params import KHZ, Detuning, paper_params
from .response import collective_gamma
from .spectra import probe_spectrum, resolve_threads, sweep_map
from .steady_state import SolverOptions, steady_state

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def _detuning(block: dict) -> Detuning:
    try:
        return Detuning(float(block.get("delta_c", 0.0)) * KHZ, float(block.get("delta_p", 0.0)) * KHZ)
    except ValueError as exc:
        raise ConfigError(f"bad detuning: {exc}") from None


def _run_sweep(cfg: RunConfig, threads):
    m = sweep_map(axis_from_block(cfg.block, "delta_c"), axis_from_block(cfg.block, "delta_p"),
                  cfg.params, cfg.bins, cfg.solver, threads=threads)
    return m, "map"


def _run_spectrum(cfg: RunConfig, threads):
    try:
        dc = float(cfg.block.get("delta_c", 0.0)) * KHZ
    except ValueError as exc:
        raise ConfigError(f"bad delta_c: {exc}") from None
    m = probe_spectrum(dc, axis_from_block(cfg.block, "delta_p"), cfg.params, cfg.bins, cfg.solver,
                       threads=threads)
    return m, "spectrum"


def _run_roots(cfg: RunConfig, threads):
    det = _detuning(cfg.block)
    opts = cfg.solver
    if "classify" in cfg.block:
        opts = SolverOptions(**{**opts.__dict__, "classify": cfg.block["classify"].lower() in ("1", "true", "yes")})
    return steady_state(det, cfg.params, cfg.bins.build(cfg.params, det.delta_p), opts), "roots"


def _run_dynamics(cfg: RunConfig, threads):
    det = _detuning(cfg.block)
    bins = cfg.bins.build(cfg.params, det.delta_p)
    seed = cfg.block.get("seed", "ground")
    if seed == "ground":
        state = dynamics.ground_state(bins)
    elif seed in ("lowest", "highest"):
        roots = steady_state(det, cfg.params, bins, cfg.solver).roots
        root = roots[0] if seed == "lowest" else roots[-1]
        state = dynamics.state_from_root(root.x, det, cfg.params, bins)
    else:
        raise ConfigError(f"[dynamics] seed = {seed!r} must be ground, lowest or highest")
    try:
        t_end = float(cfg.block.get("t_end_us", 100.0)) * 1e-6
    except ValueError as exc:
        raise ConfigError(f"bad t_end_us: {exc}") from None
    if cfg.block.get("settle", "false").lower() in ("1", "true", "yes"):
        traj = dynamics.settle(state, det, cfg.params, bins, horizon=t_end)
    else:
        traj = dynamics.evolve(state, det, cfg.params, bins, t_end)
    return traj, "trajectory"


RUNNERS = {"sweep": _run_sweep, "spectrum": _run_spectrum, "roots": _run_roots, "dynamics": _run_dynamics}


def run_check(out=None) -> bool:
    """Built-in invariant suite; prints one PASS/FAIL line per check."""
    out = sys.stdout if out is None else out
    results = []

    p = paper_params(n_atoms=0, eta=700)
    axis = np.linspace(-500, 500, 21) * KHZ
    m = sweep_map(axis, axis, p)
    dc, dp = np.meshgrid(axis, axis, indexing="ij")
    lorentz = (p.kappa**2 / 4) / ((dp - dc) ** 2 + p.kappa**2 / 4)
    err = float(np.max(np.abs(m.t_norm - lorentz)))
    results.append(("empty cavity Lorentzian", err <= 1e-10, f"max err {err:.2e}"))

    p = paper_params(n_atoms=25000)
    gam = collective_gamma(0.0, 0.0, p, build_bins(0.0, 1, "delta")).gamma_coll
    expected = p.n_atoms * p.g0**2 / p.gamma
    rel = abs(gam - expected) / expected
    results.append(("Gamma = N C kappa", rel <= 1e-12, f"rel err {rel:.2e}, {gam.real / KHZ / 1e3:.1f} MHz"))

    p = paper_params(n_atoms=200, eta=3000, delta_omega=100)
    bins = BinSpec("gauss_hermite", 8).build(p)
    det = Detuning(0.0, 50 * KHZ)
    try:
        traj = dynamics.evolve(dynamics.ground_state(bins), det, p, bins, 20e-6, snapshots=True)
        excess = max(s.bloch_excess() for s in traj.snapshots)
        results.append(("Bloch ball preserved", excess <= dynamics.BLOCH_EPS, f"max excess {excess:.2e}"))
    except IntegrationError as exc:
        results.append(("Bloch ball preserved", False, str(exc)))

    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}", file=out)
    return all(ok for _, ok, _ in results)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cavity-dressed", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("sweep", "spectrum", "dynamics", "roots"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="INI run configuration (frequencies in linear kHz)")
        sp.add_argument("--out", default="results", help="output directory (default: ./results)")
        sp.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: $CAVITY_DRESSED_THREADS or 1)")
        sp.add_argument("--image", action="store_true", help="also render a PNG heatmap")
        sp.add_argument("--overlay-dressed", action="store_true", help="draw dressed-state curves on the heatmap")
    sub.add_parser("check", help="run the built-in invariant suite")
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG

    if args.command == "check":
        return EXIT_OK if run_check() else EXIT_NUMERIC

    try:
        cfg = load_config(args.config)
        if cfg.command != args.command:
            raise ConfigError(f"config contains a [{cfg.command}] block but subcommand is {args.command!r}")
        threads = resolve_threads(args.threads)
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        if not os.access(out_dir, os.W_OK):
            raise ConfigError(f"output directory {out_dir} is not writable")
    except (ConfigError, ValidationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        start = time.perf_counter()
        data, kind = RUNNERS[cfg.command](cfg, threads)
        files = write_tabular(data, out_dir / kind, cfg.output["format"])
        if kind in ("map", "spectrum") and (args.image or cfg.output["image"]):
            render_heatmap(data, cfg.output["channel"], out_dir / f"{kind}_{cfg.output['channel']}.png",
                           overlay_dressed=args.overlay_dressed or cfg.output["overlay_dressed"])
        write_metadata(out_dir, cfg, files)
        print(f"wrote {', '.join(str(f) for f in files)} in {time.perf_counter() - start:.1f} s")
    except (ConfigError, ValidationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverError, IntegrationError, OSError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
