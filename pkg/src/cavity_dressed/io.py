"""Run configuration parsing, tabular export and heatmap rendering.

Config files are INI-style; every frequency is in linear kHz::

    [params]
    g0 = 66
    kappa = 70
    gamma = 182.4
    n_atoms = 25000
    eta = 87000
    delta_omega = 900
    gamma_d = 1

    [sweep]
    delta_c_min = -15000
    delta_c_max = 15000
    delta_c_points = 61
    delta_p_min = -15000
    delta_p_max = 15000
    delta_p_points = 61
"""
from __future__ import annotations

import configparser
import csv
import hashlib
import io
import json
import os
import platform
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .broadening import BinSpec, Strategy
from .errors import ConfigError
from .params import KHZ, SystemParams, params_from_linear_khz
from .steady_state import Branch, SolverOptions

COMMANDS = ("sweep", "spectrum", "dynamics", "roots")

_AXIS_KEYS = ("min", "max", "points")
_COMMAND_KEYS = {
    "sweep": {f"delta_{a}_{k}" for a in "cp" for k in _AXIS_KEYS},
    "spectrum": {"delta_c"} | {f"delta_p_{k}" for k in _AXIS_KEYS},
    "dynamics": {"delta_c", "delta_p", "t_end_us", "seed", "settle"},
    "roots": {"delta_c", "delta_p", "classify"},
}


@dataclass
class RunConfig:
    command: str
    params: SystemParams
    bins: BinSpec
    solver: SolverOptions
    block: dict
    output: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)

    def resolved(self) -> dict:
        """Config as nested dict; written to the metadata file and re-readable."""
        return self.raw


def _number(section, key, value, kind=float):
    try:
        return kind(value)
    except ValueError:
        raise ConfigError(f"[{section}] {key} = {value!r} is not a valid {kind.__name__}") from None


def _bool(section, key, value):
    v = value.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"[{section}] {key} = {value!r} is not a boolean")


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    raw = {s: dict(cp[s]) for s in cp.sections()}

    if "params" not in raw:
        raise ConfigError(f"{source}: missing [params] section")
    params = params_from_linear_khz(
        {k: _number("params", k, v) for k, v in raw["params"].items()}
    )

    present = [c for c in COMMANDS if c in raw]
    if len(present) != 1:
        raise ConfigError(f"{source}: exactly one of [{'], ['.join(COMMANDS)}] is required, found {present or 'none'}")
    command = present[0]
    block = raw[command]
    unknown = set(block) - _COMMAND_KEYS[command]
    if unknown:
        raise ConfigError(f"{source}: unknown key(s) in [{command}]: {', '.join(sorted(unknown))}")

    b = raw.get("bins", {})
    try:
        strategy = Strategy(b.get("strategy", Strategy.ADAPTIVE_LORENTZIAN.value))
    except ValueError:
        raise ConfigError(f"[bins] strategy = {b['strategy']!r} is not one of {[s.value for s in Strategy]}") from None
    default_m = 8 if strategy is Strategy.ADAPTIVE_LORENTZIAN else 64
    bins = BinSpec(strategy, _number("bins", "m", b.get("m", default_m), int))

    s = raw.get("solver", {})
    try:
        branch = Branch(s.get("branch", "lowest"))
    except ValueError:
        raise ConfigError(f"[solver] branch = {s['branch']!r} is not one of {[b.value for b in Branch]}") from None
    solver = SolverOptions(
        scan_points=_number("solver", "scan_points", s.get("scan_points", 400), int),
        tol_rel=_number("solver", "tol_rel", s.get("tol_rel", 1e-10)),
        tol_abs_factor=_number("solver", "tol_abs_factor", s.get("tol_abs_factor", 1e-14)),
        branch=branch,
        classify=_bool("solver", "classify", s.get("classify", "false")),
    )

    o = raw.get("output", {})
    output = {
        "format": o.get("format", "csv"),
        "image": _bool("output", "image", o.get("image", "false")),
        "overlay_dressed": _bool("output", "overlay_dressed", o.get("overlay_dressed", "false")),
        "channel": o.get("channel", "t_norm"),
    }
    if output["format"] not in ("csv", "json", "both"):
        raise ConfigError(f"[output] format = {output['format']!r} must be csv, json or both")
    if output["channel"] not in ("t_norm", "f_norm", "root_count"):
        raise ConfigError(f"[output] channel = {output['channel']!r} must be t_norm, f_norm or root_count")
    return RunConfig(command, params, bins, solver, dict(block), output, raw)


def load_config(path: str | os.PathLike) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, str(path))


def dump_config(raw: dict) -> str:
    cp = configparser.ConfigParser(interpolation=None)
    cp.read_dict(raw)
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def axis_from_block(block: dict, name: str) -> np.ndarray:
    """Linear grid (rad/s) from ``<name>_min/_max/_points`` entries in kHz."""
    try:
        lo = float(block[f"{name}_min"])
        hi = float(block[f"{name}_max"])
        n = int(block[f"{name}_points"])
    except KeyError as exc:
        raise ConfigError(f"missing key {exc.args[0]!r}") from None
    except ValueError as exc:
        raise ConfigError(f"bad axis specification for {name}: {exc}") from None
    if n < 1 or (n > 1 and not hi > lo):
        raise ConfigError(f"{name} axis needs points >= 1 and max > min")
    return np.linspace(lo, hi, n) * KHZ


# ---------------------------------------------------------------- writing


def atomic_write(path: str | os.PathLike, data: bytes | str) -> None:
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, mode, newline="" if mode == "w" else None) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    return "%.17g" % float(v)


def table_to_csv(columns: dict[str, np.ndarray]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in zip(*columns.values()):
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def map_columns(m) -> dict[str, np.ndarray]:
    """Long-format columns of a SpectralMap, delta_c outer, delta_p inner."""
    dc, dp = np.meshgrid(m.delta_c_axis / KHZ, m.delta_p_axis / KHZ, indexing="ij")
    return {
        "delta_c_khz": dc.ravel(),
        "delta_p_khz": dp.ravel(),
        "t_norm": m.t_norm.ravel(),
        "f_norm": m.f_norm.ravel(),
        "root_count": m.root_count.ravel(),
    }


def map_to_json(m) -> dict:
    return {
        "axes": {
            "delta_c_khz": (m.delta_c_axis / KHZ).tolist(),
            "delta_p_khz": (m.delta_p_axis / KHZ).tolist(),
        },
        "shape": list(m.shape),
        "values": {
            "t_norm": m.t_norm.ravel().tolist(),
            "f_norm": m.f_norm.ravel().tolist(),
            "root_count": m.root_count.ravel().tolist(),
            "x": m.x.ravel().tolist(),
        },
        "meta": m.meta,
    }


def map_from_json(obj: dict):
    from .spectra import SpectralMap

    shape = tuple(obj["shape"])
    v = obj["values"]
    return SpectralMap(
        np.array(obj["axes"]["delta_c_khz"]) * KHZ,
        np.array(obj["axes"]["delta_p_khz"]) * KHZ,
        np.array(v["t_norm"], dtype=float).reshape(shape),
        np.array(v["f_norm"], dtype=float).reshape(shape),
        np.array(v["root_count"], dtype=int).reshape(shape),
        np.array(v["x"], dtype=float).reshape(shape),
        obj.get("meta", {}),
    )


def trajectory_columns(traj) -> dict[str, np.ndarray]:
    return {
        "t_s": traj.t,
        "alpha_re": traj.alpha.real,
        "alpha_im": traj.alpha.imag,
        "intensity": np.abs(traj.alpha) ** 2,
    }


def roots_columns(result) -> dict[str, list]:
    cols = {k: [] for k in ("index", "x", "alpha_re", "alpha_im", "gamma_re_khz", "gamma_im_khz",
                            "stable", "tangent", "t_norm", "f_norm", "selected")}
    for k, r in enumerate(result.roots):
        cols["index"].append(k)
        cols["x"].append(r.x)
        cols["alpha_re"].append(r.alpha.real)
        cols["alpha_im"].append(r.alpha.imag)
        cols["gamma_re_khz"].append(r.gamma_coll.real / KHZ)
        cols["gamma_im_khz"].append(r.gamma_coll.imag / KHZ)
        cols["stable"].append(r.stable.value)
        cols["tangent"].append(r.tangent)
        cols["t_norm"].append(r.t_norm)
        cols["f_norm"].append(r.f_norm)
        cols["selected"].append(k == result.selected)
    return cols


def _jsonable(columns: dict) -> dict:
    return {k: [v.item() if hasattr(v, "item") else v for v in vals] for k, vals in columns.items()}


def write_tabular(data, path_stem: str | os.PathLike, fmt: str = "csv") -> list[Path]:
    """Write a SpectralMap, Trajectory or SteadyStateResult as CSV and/or JSON.

    CSV: header row, '.' decimal point, '\\n' line ends, frequencies in linear
    kHz, floats with 17 significant digits. JSON: one object.
    """
    from .dynamics import Trajectory
    from .spectra import SpectralMap
    from .steady_state import SteadyStateResult

    if isinstance(data, SpectralMap):
        columns, obj = map_columns(data), map_to_json(data)
    elif isinstance(data, Trajectory):
        columns = trajectory_columns(data)
        obj = {"values": _jsonable(columns)}
    elif isinstance(data, SteadyStateResult):
        columns = roots_columns(data)
        obj = {"values": _jsonable(columns)}
    else:
        raise TypeError(f"cannot tabulate {type(data).__name__}")
    for col in columns.values():
        arr = np.asarray(col)
        if arr.dtype.kind in "fc" and not np.all(np.isfinite(arr)):
            raise ValueError("refusing to write non-finite values")
    stem = Path(path_stem)
    written = []
    if fmt in ("csv", "both"):
        p = stem.with_suffix(".csv")
        atomic_write(p, table_to_csv(columns))
        written.append(p)
    if fmt in ("json", "both"):
        p = stem.with_suffix(".json")
        atomic_write(p, json.dumps(obj, indent=1) + "\n")
        written.append(p)
    return written


def write_metadata(out_dir: Path, cfg: RunConfig, data_files: list[Path], extra: dict | None = None) -> Path:
    import scipy

    digest = hashlib.sha256()
    for p in sorted(data_files):
        digest.update(p.name.encode())
        digest.update(p.read_bytes())
    meta = {
        "command": cfg.command,
        "config": cfg.resolved(),
        "versions": {
            "cavity_dressed": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "content_sha256": digest.hexdigest(),
        "files": [p.name for p in sorted(data_files)],
    }
    if extra:
        meta.update(extra)
    path = out_dir / "metadata.json"
    atomic_write(path, json.dumps(meta, indent=1, sort_keys=True) + "\n")
    return path


# ---------------------------------------------------------------- images


def render_heatmap(m, channel: str, path: str | os.PathLike, *, overlay_dressed: bool = False) -> Path:
    """PNG heatmap of one map channel, axes in MHz, linear color scale."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    from .spectra import dressed_resonances

    values = np.asarray(getattr(m, channel), dtype=float)
    if values.size == 0:
        raise ValueError("empty map")
    vmin, vmax = float(values.min()), float(values.max())
    dc = m.delta_c_axis / KHZ / 1e3
    dp = m.delta_p_axis / KHZ / 1e3
    fig, ax = plt.subplots(figsize=(5.5, 4.5), dpi=100)
    degenerate = vmin == vmax
    img = ax.imshow(
        values.T, origin="lower", aspect="auto", interpolation="nearest",
        extent=_extent(dc, dp), vmin=vmin, vmax=vmax if not degenerate else vmin + 1.0, cmap="viridis",
    )
    cbar = fig.colorbar(img, ax=ax)
    cbar.set_label(f"{channel}  [min {vmin:.4g}, max {vmax:.4g}]")
    if degenerate:
        ax.text(0.5, 0.5, f"constant map: {vmin:.6g}", transform=ax.transAxes, ha="center", color="w")
    if overlay_dressed and m.meta.get("params_khz"):
        pk = m.meta["params_khz"]
        grid = np.linspace(dc.min(), dc.max(), 400)
        curves = [dressed_resonances(c * 1e3 * KHZ, pk["n_atoms"], pk["g0"] * KHZ) for c in grid]
        for attr in ("plus", "minus"):
            ax.plot(grid, [getattr(cv, attr) / KHZ / 1e3 for cv in curves], "w--", lw=1)
        ax.set_ylim(dp.min(), dp.max())
    ax.set_xlabel("cavity detuning delta_c / 2pi [MHz]")
    ax.set_ylabel("probe detuning delta_p / 2pi [MHz]")
    buf = io.BytesIO()
    fig.savefig(buf, format="png", metadata={"Software": None})
    plt.close(fig)
    path = Path(path)
    atomic_write(path, buf.getvalue())
    return path


def _extent(dc, dp):
    def edges(a):
        if a.size == 1:
            return a[0] - 0.5, a[0] + 0.5
        h = 0.5 * (a[1] - a[0])
        return a[0] - h, a[-1] + h

    return (*edges(dc), *edges(dp))
