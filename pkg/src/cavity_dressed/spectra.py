"""Transmission/fluorescence spectra, (delta_c, delta_p) maps and peak analysis."""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.signal
from scipy.optimize import minimize_scalar

from .broadening import BinSpec
from .errors import ConfigError, SolverError, ValidationError
from .params import Detuning, SystemParams, to_linear_khz
from .steady_state import SolverOptions, steady_state

# operational thresholds for the central fluorescence feature
CENTRAL_PEAK_TO_VALLEY_MIN = 1.5
CENTRAL_INVISIBLE_MAX = 1.1
DEFAULT_PROMINENCE = 0.05  # fraction of the global maximum


@dataclass(frozen=True)
class DressedCurve:
    delta_c: float
    plus: float
    minus: float


def dressed_resonances(delta_c: float, n_atoms: float, g0: float) -> DressedCurve:
    """Normal-mode frequencies of N atoms on resonance coupled to a detuned cavity.

    The smaller-magnitude branch is computed from the product
    ``plus * minus = -N g0^2 / 4`` to avoid cancellation.
    """
    if n_atoms < 0:
        raise ValidationError("n_atoms must be >= 0")
    coupling = n_atoms * g0**2
    root = math.sqrt(delta_c**2 + coupling)
    if delta_c >= 0:
        plus = 0.5 * (delta_c + root)
        minus = -0.25 * coupling / plus if plus else 0.0
    else:
        minus = 0.5 * (delta_c - root)
        plus = -0.25 * coupling / minus
    return DressedCurve(delta_c, plus, minus)


@dataclass(frozen=True, eq=False)
class SpectralMap:
    """Steady-state observables on a rectangular (delta_c, delta_p) grid.

    Arrays are indexed ``[i_c, i_p]``; axes are in rad/s.
    """

    delta_c_axis: np.ndarray
    delta_p_axis: np.ndarray
    t_norm: np.ndarray
    f_norm: np.ndarray
    root_count: np.ndarray
    x: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def shape(self) -> tuple[int, int]:
        return self.t_norm.shape


def _check_axis(name, axis) -> np.ndarray:
    axis = np.asarray(axis, dtype=float).ravel()
    if axis.size == 0:
        raise ValidationError(f"{name} axis is empty")
    if axis.size > 1 and not (np.all(np.diff(axis) > 0) or np.all(np.diff(axis) < 0)):
        raise ValidationError(f"{name} axis must be strictly monotone")
    return axis


def resolve_threads(threads: int | None) -> int:
    if threads is None:
        raw = os.environ.get("CAVITY_DRESSED_THREADS", "") or "1"
        try:
            threads = int(raw)
        except ValueError:
            raise ConfigError(f"CAVITY_DRESSED_THREADS={raw!r} is not an integer") from None
    return max(1, int(threads))


def sweep_map(
    delta_c_axis,
    delta_p_axis,
    params: SystemParams,
    bin_spec: BinSpec = BinSpec(),
    opts: SolverOptions = SolverOptions(),
    *,
    threads: int | None = None,
) -> SpectralMap:
    """Evaluate the default-branch steady state in every grid cell.

    Cells are independent; rows are farmed out to a thread pool and assembled
    by index, so the result does not depend on ``threads``.
    """
    dc_axis = _check_axis("delta_c", delta_c_axis)
    dp_axis = _check_axis("delta_p", delta_p_axis)
    shape = (dc_axis.size, dp_axis.size)
    t_norm, f_norm, x = np.zeros(shape), np.zeros(shape), np.zeros(shape)
    count = np.zeros(shape, dtype=int)
    bins_by_col = [bin_spec.build(params, dp) for dp in dp_axis]

    def row(i):
        for j, dp in enumerate(dp_axis):
            det = Detuning(float(dc_axis[i]), float(dp))
            try:
                res = steady_state(det, params, bins_by_col[j], opts)
            except SolverError as exc:
                raise SolverError(
                    f"cell ({i}, {j}) at delta_c={dc_axis[i]:.9g} rad/s, delta_p={dp:.9g} rad/s: {exc}"
                ) from exc
            t_norm[i, j], f_norm[i, j], x[i, j] = res.t_norm, res.f_norm, res.x
            count[i, j] = len(res.roots)

    n = resolve_threads(threads)
    if n == 1:
        for i in range(shape[0]):
            row(i)
    else:
        with ThreadPoolExecutor(max_workers=n) as pool:
            list(pool.map(row, range(shape[0])))
    meta = {
        "params_khz": to_linear_khz(params),
        "bins": {"strategy": bin_spec.strategy.value, "m": bin_spec.m},
        "solver": {k: (v.value if hasattr(v, "value") else v) for k, v in asdict(opts).items()},
        "central_feature_thresholds": {
            "peak_to_valley_min": CENTRAL_PEAK_TO_VALLEY_MIN,
            "invisible_max": CENTRAL_INVISIBLE_MAX,
        },
    }
    return SpectralMap(dc_axis, dp_axis, t_norm, f_norm, count, x, meta)


def probe_spectrum(delta_c: float, delta_p_axis, params: SystemParams, bin_spec: BinSpec = BinSpec(),
                   opts: SolverOptions = SolverOptions(), *, threads: int | None = None) -> SpectralMap:
    """Single-row map: the probe scan at fixed cavity detuning."""
    return sweep_map([delta_c], delta_p_axis, params, bin_spec, opts, threads=threads)


@dataclass(frozen=True)
class Peak:
    location: float
    height: float
    index: int


def find_peaks(axis, values, min_prominence: float | None = None) -> list[Peak]:
    """Local maxima above a prominence threshold, refined by a 3-point parabola.

    ``min_prominence`` defaults to 5% of the global maximum.
    """
    axis = np.asarray(axis, dtype=float)
    values = np.asarray(values, dtype=float)
    if axis.size < 3 or axis.shape != values.shape:
        raise ValidationError("need at least 3 samples on a matching axis")
    if not np.all(np.isfinite(values)):
        raise ValidationError("values must be finite")
    step = np.diff(axis)
    if not np.allclose(step, step[0], rtol=1e-9, atol=0):
        raise ValidationError("axis must be uniform")
    if min_prominence is None:
        min_prominence = DEFAULT_PROMINENCE * float(np.max(np.abs(values)))
    idx, _ = scipy.signal.find_peaks(values, prominence=min_prominence)
    peaks = []
    for k in idx:
        y0, y1, y2 = values[k - 1], values[k], values[k + 1]
        denom = y0 - 2 * y1 + y2
        shift = 0.5 * (y0 - y2) / denom if denom != 0 else 0.0
        shift = min(max(shift, -0.5), 0.5)
        height = y1 - 0.25 * (y0 - y2) * shift
        peaks.append(Peak(float(axis[k] + shift * step[0]), float(height), int(k)))
    return peaks


def refine_peak(func, location: float, half_width: float, xatol: float) -> float:
    """Maximize ``func`` within ``location +- half_width``."""
    res = minimize_scalar(lambda d: -func(d), bounds=(location - half_width, location + half_width),
                          method="bounded", options={"xatol": xatol})
    return float(res.x)


@dataclass(frozen=True)
class SplittingEntry:
    n: float
    measured_splitting: float
    sqrtN_prediction: float
    resolved: bool


def splitting_vs_n(
    n_list,
    params: SystemParams,
    bin_spec: BinSpec = BinSpec(),
    opts: SolverOptions = SolverOptions(),
    *,
    points: int = 801,
) -> list[SplittingEntry]:
    """Transmission peak separation at delta_c = 0 for each atom number.

    The probe scan spans +-g0*sqrt(N) (or a few linewidths for tiny N); the
    two highest peaks are refined by bounded maximization of T.
    """
    out = []
    for n in n_list:
        if n < 0:
            raise ValidationError("atom numbers must be >= 0")
        p = params.replace(n_atoms=float(n))
        predicted = p.g0 * math.sqrt(n)
        linewidth = 0.5 * (p.kappa + p.gamma_perp)
        span = max(predicted, 10 * linewidth, 3 * p.delta_omega)
        axis = np.linspace(-span, span, points)
        spec = probe_spectrum(0.0, axis, p, bin_spec, opts)
        peaks = find_peaks(axis, spec.t_norm[0])
        if len(peaks) < 2:
            out.append(SplittingEntry(float(n), float("nan"), predicted, False))
            continue
        top = sorted(sorted(peaks, key=lambda pk: -pk.height)[:2], key=lambda pk: pk.location)

        def t_of(dp):
            return steady_state(Detuning(0.0, dp), p, bin_spec.build(p, dp), opts).t_norm

        step = axis[1] - axis[0]
        locs = [refine_peak(t_of, pk.location, step, xatol=1e-6 * step) for pk in top]
        sep = locs[1] - locs[0]
        out.append(SplittingEntry(float(n), sep, predicted, bool(sep > linewidth)))
    return out


@dataclass(frozen=True)
class CentralFeature:
    peak: float
    valley: float
    ratio: float
    fwhm: float
    side_peaks: tuple[float, float]


def central_feature(delta_p_axis, f_norm) -> CentralFeature:
    """Measure the fluorescence maximum at delta_p = 0 between the dressed peaks.

    The side peaks are the largest values on each side of zero; the valley is
    the lowest value between them and the center. The width is taken at half
    the peak height above the valley.
    """
    axis = np.asarray(delta_p_axis, dtype=float)
    f = np.asarray(f_norm, dtype=float)
    c = int(np.argmin(np.abs(axis)))
    if abs(axis[c]) > 1e-9 * np.max(np.abs(axis)) or c in (0, axis.size - 1):
        raise ValidationError("axis must contain delta_p = 0 in its interior")
    left_side = int(np.argmax(f[:c]))
    right_side = c + 1 + int(np.argmax(f[c + 1:]))
    valley = float(min(np.min(f[left_side:c + 1]), np.min(f[c:right_side + 1])))
    peak = float(f[c])
    ratio = peak / valley if valley > 0 else math.inf
    level = valley + 0.5 * (peak - valley)

    def crossing(direction):
        k = c
        while 0 < k < axis.size - 1 and f[k + direction] >= level:
            k += direction
        k2 = k + direction
        if f[k] == f[k2]:
            return axis[k]
        return axis[k] + (level - f[k]) * (axis[k2] - axis[k]) / (f[k2] - f[k])

    fwhm = float(crossing(1) - crossing(-1)) if peak > valley else 0.0
    return CentralFeature(peak, valley, ratio, fwhm, (float(axis[left_side]), float(axis[right_side])))
