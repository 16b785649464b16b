"""Self-consistent intracavity intensity, branch bookkeeping and observables.

The stationary field obeys ``x |D(x)|^2 = eta^2/4`` with
``D(x) = (dp - dc) + i kappa/2 + i Gamma(x)/2``. Because Re Gamma >= 0,
``|D|^2 >= kappa^2/4`` and every root lies in ``[0, eta^2/kappa^2]``; the
dispersive part of Gamma can pull the cavity onto the probe, so the tighter
bare-Lorentzian bound does not hold in general.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .broadening import EnsembleBins
from .errors import SolverError, ValidationError
from .params import Detuning, SystemParams
from .response import gamma_array, saturation_numerator


class Stability(str, enum.Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    UNKNOWN = "unknown"


class Branch(str, enum.Enum):
    LOWEST = "lowest"
    HIGHEST = "highest"
    CONTINUATION = "continuation"


@dataclass(frozen=True)
class SolverOptions:
    scan_points: int = 400
    tol_rel: float = 1e-10
    tol_abs_factor: float = 1e-14  # tol_abs = factor * eta^2/4
    scan_margin: float = 1e-6
    branch: Branch = Branch.LOWEST
    classify: bool = False
    continuation_steps: int = 60

    def __post_init__(self):
        object.__setattr__(self, "branch", Branch(self.branch))
        if self.scan_points < 3:
            raise ValidationError("scan_points must be >= 3")
        if not 0 < self.tol_rel < 1:
            raise ValidationError("tol_rel must lie in (0, 1)")


@dataclass(frozen=True)
class Root:
    x: float
    alpha: complex
    gamma_coll: complex
    stable: Stability = Stability.UNKNOWN
    tangent: bool = False
    t_rate: float = 0.0
    t_norm: float = 0.0
    f_rate: float = 0.0
    f_norm: float = 0.0


@dataclass(frozen=True)
class SteadyStateResult:
    roots: tuple[Root, ...]
    selected: int
    detuning: Detuning = field(repr=False, default=None)

    @property
    def root(self) -> Root:
        return self.roots[self.selected]

    @property
    def x(self) -> float:
        return self.root.x

    @property
    def t_rate(self) -> float:
        return self.root.t_rate

    @property
    def t_norm(self) -> float:
        return self.root.t_norm

    @property
    def f_rate(self) -> float:
        return self.root.f_rate

    @property
    def f_norm(self) -> float:
        return self.root.f_norm


def _residual_array(xs, det: Detuning, params: SystemParams, bins: EnsembleBins) -> np.ndarray:
    xs = np.asarray(xs, dtype=float)
    if params.n_atoms == 0:
        gam = np.zeros(xs.shape, dtype=complex)
    else:
        gam = gamma_array(xs, det.delta_p, params, bins)
    d = (det.delta_p - det.delta_c) + 0.5j * params.kappa + 0.5j * gam
    return xs * (d.real**2 + d.imag**2) - 0.25 * params.eta**2


def residual(x: float, det: Detuning, params: SystemParams, bins: EnsembleBins) -> float:
    """``x |D(x)|^2 - eta^2/4``; its zeros are the stationary intensities."""
    if x < 0:
        raise ValidationError("intensity must be >= 0")
    return float(_residual_array(x, det, params, bins))


def field_amplitude(x: float, det: Detuning, params: SystemParams, bins: EnsembleBins) -> tuple[complex, complex]:
    """Stationary ``(alpha, Gamma)`` for intensity ``x``."""
    gam = complex(gamma_array(x, det.delta_p, params, bins)) if params.n_atoms else 0j
    alpha = 0.5 * params.eta / ((det.delta_p - det.delta_c) + 0.5j * params.kappa + 0.5j * gam)
    return alpha, gam


def transmission(x: float, params: SystemParams) -> tuple[float, float]:
    """Output photon flux kappa*x and its ratio to the resonant empty cavity."""
    t_rate = params.kappa * x
    if params.eta == 0:
        return t_rate, 0.0
    # x <= eta^2/kappa^2 exactly; min() only absorbs last-bit rounding
    return t_rate, min(params.kappa**2 * x / params.eta**2, 1.0)


def fluorescence(x: float, delta_p: float, params: SystemParams, bins: EnsembleBins) -> tuple[float, float]:
    """Free-space scattering rate and its ratio to N*gamma."""
    if params.n_atoms == 0:
        return 0.0, 0.0
    h = 0.5 * params.gamma_perp
    d = delta_p - bins.nodes
    s_param = saturation_numerator(x, params) / (d * d + h * h)
    excited = s_param / (1.0 + s_param)  # (1 + z)
    f_rate = float(np.sum(params.n_atoms * bins.weights * 0.5 * params.gamma * excited))
    return f_rate, f_rate / (params.n_atoms * params.gamma)


def _make_root(x, det, params, bins, *, tangent=False) -> Root:
    alpha, gam = field_amplitude(x, det, params, bins)
    t_rate, t_norm = transmission(x, params)
    f_rate, f_norm = fluorescence(x, det.delta_p, params, bins)
    return Root(x, alpha, gam, Stability.UNKNOWN, tangent, t_rate, t_norm, f_rate, f_norm)


def root_tolerance(params: SystemParams, opts: SolverOptions) -> float:
    quarter = 0.25 * params.eta**2
    return opts.tol_abs_factor * quarter + opts.tol_rel * quarter


def solve_intensity(
    det: Detuning,
    params: SystemParams,
    bins: EnsembleBins,
    opts: SolverOptions = SolverOptions(),
) -> list[Root]:
    """All stationary intensities, sorted ascending.

    Sign changes on a log-spaced scan of ``[x_hi*1e-12, x_hi]`` with
    ``x_hi = (eta/kappa)^2 (1 + margin)`` are bracketed and refined with
    Brent's method. A scan interval whose residual touches zero without
    changing sign is reported as a single ``tangent`` root.
    """
    if params.eta == 0:
        return [_make_root(0.0, det, params, bins)]

    x_hi = (params.eta / params.kappa) ** 2 * (1.0 + opts.scan_margin)
    xs = np.geomspace(x_hi * 1e-12, x_hi, opts.scan_points)
    r = _residual_array(xs, det, params, bins)
    tol = root_tolerance(params, opts)

    def f(x):
        return float(_residual_array(x, det, params, bins))

    def refine(a, b):
        # brentq's rtol floor is 4*eps; tighter than tol_rel keeps |R| within tol
        return brentq(f, a, b, xtol=1e-300, rtol=max(opts.tol_rel * 1e-3, 4.5e-16), maxiter=500)

    found: list[tuple[float, bool]] = []
    if r[0] >= 0:
        # root below the scan floor; R(0) = -eta^2/4 < 0
        found.append((xs[0] if r[0] == 0 else refine(0.0, xs[0]), False))
    for i in np.nonzero(r[1:-1] == 0)[0]:
        found.append((xs[i + 1], False))
    for i in np.nonzero(r[:-1] * r[1:] < 0)[0]:
        found.append((refine(xs[i], xs[i + 1]), False))
    found.extend(_tangent_roots(xs, r, f, tol, refine))

    if not found:
        raise SolverError(
            f"no sign change of the residual despite eta > 0 at {det}: "
            f"R(x_lo)={r[0]:.6g}, R(x_hi)={r[-1]:.6g}, scan_points={opts.scan_points}"
        )
    found.sort()
    return [_make_root(x, det, params, bins, tangent=t) for x, t in found]


def _tangent_roots(xs, r, f, tol, refine):
    out = []
    left, mid, right = r[:-2], r[1:-1], r[2:]
    same_sign = (left * mid > 0) & (mid * right > 0)
    toward_zero = (np.abs(mid) < np.abs(left)) & (np.abs(mid) < np.abs(right))
    for i in np.nonzero(same_sign & toward_zero)[0] + 1:
        sign = 1.0 if r[i] > 0 else -1.0
        lo, hi = math.log(xs[i - 1]), math.log(xs[i + 1])
        res = minimize_scalar(lambda u: sign * f(math.exp(u)), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-12})
        x_ext, r_ext = math.exp(res.x), sign * res.fun
        if abs(r_ext) <= tol:
            out.append((x_ext, True))
        elif sign * r_ext < 0:
            # two roots hidden inside one scan cell
            out.append((refine(xs[i - 1], x_ext), False))
            out.append((refine(x_ext, xs[i + 1]), False))
    return out


def classify_stability(
    root: Root,
    det: Detuning,
    params: SystemParams,
    bins: EnsembleBins,
    *,
    others: list[Root] | None = None,
    horizon: float | None = None,
    perturbation: float = 1e-3,
    settle_tol: float = 1e-4,
) -> Stability:
    """Stability of a fixed point from the full mean-field dynamics.

    The stationary ensemble state is perturbed by ``perturbation`` (relative)
    in alpha and integrated; returning to within ``settle_tol`` means stable,
    settling elsewhere means unstable, no settling within ``horizon`` means
    unknown.
    """
    from . import dynamics

    if horizon is None:
        horizon = dynamics.default_horizon(params)
    state = dynamics.state_from_root(root.x, det, params, bins)
    seed = dynamics.EnsembleState(state.alpha * (1.0 + perturbation), state.s, state.z, 0.0)
    try:
        traj = dynamics.settle(seed, det, params, bins, horizon=horizon)
    except Exception:  # noqa: BLE001 - integration failure is reportable, not fatal
        return Stability.UNKNOWN
    x_f = traj.final.intensity
    if not traj.settled:
        return Stability.UNKNOWN
    if abs(x_f - root.x) <= settle_tol * max(root.x, 1e-300):
        return Stability.STABLE
    for other in others or []:
        if other is not root and abs(x_f - other.x) <= 1e-3 * max(other.x, 1e-300):
            return Stability.UNSTABLE
    # settled on a state that is not one of the known roots
    return Stability.UNSTABLE


def _continuation_index(det, params, bins, opts, roots) -> int:
    if len(roots) == 1:
        return 0
    plain = replace(opts, branch=Branch.LOWEST, classify=False)
    x_prev = None
    for eta in params.eta * np.geomspace(1e-4, 1.0, opts.continuation_steps)[:-1]:
        cand = solve_intensity(det, params.replace(eta=float(eta)), bins, plain)
        if x_prev is None:
            x_prev = cand[0].x
        else:
            x_prev = min(cand, key=lambda c: abs(math.log(c.x / x_prev)) if c.x > 0 else math.inf).x
    return min(range(len(roots)), key=lambda k: abs(math.log(roots[k].x / x_prev)) if roots[k].x > 0 else math.inf)


def steady_state(
    det: Detuning,
    params: SystemParams,
    bins: EnsembleBins,
    opts: SolverOptions = SolverOptions(),
) -> SteadyStateResult:
    """Solve for all roots, optionally classify them, and select a branch.

    The default branch is the smallest root not known to be unstable.
    """
    roots = solve_intensity(det, params, bins, opts)
    if opts.classify:
        roots = [
            replace(rt, stable=classify_stability(rt, det, params, bins, others=roots)) for rt in roots
        ]
    candidates = [k for k, rt in enumerate(roots) if rt.stable is not Stability.UNSTABLE]
    if not candidates:
        raise SolverError(f"every root classified unstable at {det}")
    if opts.branch is Branch.LOWEST:
        selected = candidates[0]
    elif opts.branch is Branch.HIGHEST:
        selected = candidates[-1]
    else:
        selected = _continuation_index(det, params, bins, opts, roots)
        if selected not in candidates:
            selected = candidates[0]
    return SteadyStateResult(tuple(roots), selected, det)
