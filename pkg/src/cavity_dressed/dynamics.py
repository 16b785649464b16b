"""Time evolution of the mean-field equations on the binned ensemble.

Used as an independent check of the stationary solver: the root finder never
integrates, and this module never solves the self-consistency equation.
Each bin m represents N*w_m atoms sharing the detuning ``nodes[m]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .broadening import EnsembleBins
from .errors import IntegrationError, ValidationError
from .params import Detuning, SystemParams
from .response import saturation_numerator

BLOCH_EPS = 1e-9


@dataclass(frozen=True, eq=False)
class EnsembleState:
    alpha: complex
    s: np.ndarray
    z: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "s", np.asarray(self.s, dtype=complex))
        object.__setattr__(self, "z", np.asarray(self.z, dtype=float))

    @property
    def intensity(self) -> float:
        return abs(self.alpha) ** 2

    def bloch_excess(self) -> float:
        """max(4|s|^2 + z^2) - 1 over bins."""
        return float(np.max(4.0 * np.abs(self.s) ** 2 + self.z**2) - 1.0)


@dataclass(frozen=True, eq=False)
class Trajectory:
    t: np.ndarray
    alpha: np.ndarray
    final: EnsembleState
    settled: bool = False
    snapshots: list[EnsembleState] | None = field(default=None, repr=False)
    max_bloch_excess: float = 0.0  # max of 4|s|^2 + z^2 - 1 over accepted steps


def ground_state(bins: EnsembleBins) -> EnsembleState:
    m = len(bins)
    return EnsembleState(0j, np.zeros(m, dtype=complex), -np.ones(m))


def state_from_root(x: float, det: Detuning, params: SystemParams, bins: EnsembleBins) -> EnsembleState:
    """Stationary ensemble state belonging to intensity ``x``."""
    from .steady_state import field_amplitude

    alpha, _ = field_amplitude(x, det, params, bins)
    h = 0.5 * params.gamma_perp
    d = det.delta_p - bins.nodes
    z = -1.0 / (1.0 + saturation_numerator(x, params) / (d * d + h * h))
    s = -0.5 * params.g0 * z * alpha / (d + 1j * h)
    return EnsembleState(alpha, s, z)


def derivative(state: EnsembleState, det: Detuning, params: SystemParams, bins: EnsembleBins) -> EnsembleState:
    """Right-hand side of the mean-field equations, returned as a state-shaped tangent."""
    a, s, z = state.alpha, state.s, state.z
    h = 0.5 * params.gamma_perp
    da = (1j * (det.delta_p - det.delta_c) - 0.5 * params.kappa) * a - 0.5j * params.eta \
        - 0.5j * params.g0 * params.n_atoms * np.sum(bins.weights * s)
    ds = (1j * (det.delta_p - bins.nodes) - h) * s + 0.5j * params.g0 * a * z
    dz = -params.gamma * (1.0 + z) + 1j * params.g0 * (np.conj(a) * s - np.conj(s) * a)
    return EnsembleState(da, ds, dz.real, 0.0)


def _pack(state: EnsembleState) -> np.ndarray:
    return np.concatenate(([state.alpha.real, state.alpha.imag], state.s.real, state.s.imag, state.z))


def _unpack(y: np.ndarray, m: int, t: float = 0.0) -> EnsembleState:
    return EnsembleState(complex(y[0], y[1]), y[2:2 + m] + 1j * y[2 + m:2 + 2 * m], y[2 + 2 * m:], t)


def _rhs(det: Detuning, params: SystemParams, bins: EnsembleBins):
    m = len(bins)
    nw = params.n_atoms * bins.weights
    rot = 1j * (det.delta_p - bins.nodes) - 0.5 * params.gamma_perp
    cav = 1j * (det.delta_p - det.delta_c) - 0.5 * params.kappa
    g0, gamma, eta = params.g0, params.gamma, params.eta
    out = np.empty(2 + 3 * m)

    def f(_t, y):
        a = complex(y[0], y[1])
        s = y[2:2 + m] + 1j * y[2 + m:2 + 2 * m]
        z = y[2 + 2 * m:]
        da = cav * a - 0.5j * eta - 0.5j * g0 * np.sum(nw * s)
        ds = rot * s + 0.5j * g0 * a * z
        # i g0 (a* s - s* a) = -2 g0 Im(a* s)
        dz = -gamma * (1.0 + z) - 2.0 * g0 * (a.real * s.imag - a.imag * s.real)
        out[0], out[1] = da.real, da.imag
        out[2:2 + m] = ds.real
        out[2 + m:2 + 2 * m] = ds.imag
        out[2 + 2 * m:] = dz
        return out.copy()

    return f


def max_rate(det: Detuning, params: SystemParams, bins: EnsembleBins) -> float:
    """Largest frequency scale of the flow, used to cap the step size."""
    x_bound = (params.eta / params.kappa) ** 2
    return max(
        abs(det.delta_p - det.delta_c),
        float(np.max(np.abs(det.delta_p - bins.nodes))),
        params.kappa,
        params.gamma_perp,
        params.g0 * math.sqrt(x_bound),
        params.g0 * math.sqrt(params.n_atoms),
    )


def default_horizon(params: SystemParams) -> float:
    return 1000.0 / min(params.kappa, params.gamma)


def evolve(
    initial: EnsembleState,
    det: Detuning,
    params: SystemParams,
    bins: EnsembleBins,
    t_end: float,
    *,
    rtol: float = 1e-8,
    atol: float = 1e-12,
    method: str = "RK45",
    snapshots: bool = False,
) -> Trajectory:
    """Integrate from ``initial`` for a duration ``t_end``.

    Every accepted step is checked against the Bloch-ball bound; a violation
    beyond ``BLOCH_EPS`` raises IntegrationError rather than being clamped.
    """
    if not t_end > 0:
        raise ValidationError("t_end must be > 0")
    if initial.s.size != len(bins):
        raise ValidationError("state and bins disagree on the number of classes")
    m = len(bins)
    t0 = initial.t
    sol = solve_ivp(
        _rhs(det, params, bins), (t0, t0 + t_end), _pack(initial), method=method,
        rtol=rtol, atol=atol, max_step=0.05 / max_rate(det, params, bins),
    )
    if sol.status < 0:
        raise IntegrationError(
            f"integration failed at t={sol.t[-1]:.6g}s: {sol.message}; "
            "reduce drive or atom number for oracle runs"
        )
    s = sol.y[2:2 + m] + 1j * sol.y[2 + m:2 + 2 * m]
    z = sol.y[2 + 2 * m:]
    bloch = 4.0 * np.abs(s) ** 2 + z**2
    if np.any(bloch > 1.0 + BLOCH_EPS) or np.any(np.abs(z) > 1.0 + BLOCH_EPS):
        k = int(np.argmax(np.max(bloch, axis=0)))
        raise IntegrationError(
            f"Bloch-ball violation {np.max(bloch[:, k]) - 1:.3e} at t={sol.t[k]:.6g}s"
        )
    final = _unpack(sol.y[:, -1], m, float(sol.t[-1]))
    snaps = [_unpack(sol.y[:, k], m, float(sol.t[k])) for k in range(sol.t.size)] if snapshots else None
    excess = float(np.max(bloch)) - 1.0 if m else 0.0
    return Trajectory(sol.t, sol.y[0] + 1j * sol.y[1], final, False, snaps, excess)


def settle(
    initial: EnsembleState,
    det: Detuning,
    params: SystemParams,
    bins: EnsembleBins,
    *,
    horizon: float | None = None,
    criterion: float = 1e-7,
    window: float | None = None,
    **evolve_opts,
) -> Trajectory:
    """Integrate window by window until |alpha|^2 and the mean inversion stop changing.

    A window (default 5/gamma) counts as converged when the relative change
    of both quantities and the geometric extrapolation of the remaining drift
    are below ``criterion``. Failing to converge within ``horizon`` is
    reported through ``settled=False``, never raised.
    """
    if horizon is None:
        horizon = default_horizon(params)
    if not horizon > 0:
        raise ValidationError("horizon must be > 0")
    if window is None:
        window = 5.0 / params.gamma
    d0 = derivative(initial, det, params, bins)
    if d0.alpha == 0 and not np.any(d0.s) and not np.any(d0.z):
        return Trajectory(np.array([initial.t]), np.array([initial.alpha]), initial, True, None,
                          initial.bloch_excess())

    def summary(st):
        return np.array([st.intensity, float(np.sum(bins.weights * st.z))])

    ts, alphas = [np.array([initial.t])], [np.array([initial.alpha])]
    state, prev = initial, summary(initial)
    prev_change = None
    excess = initial.bloch_excess()
    t_stop = initial.t + horizon
    while state.t < t_stop:
        traj = evolve(state, det, params, bins, min(window, t_stop - state.t), **evolve_opts)
        ts.append(traj.t[1:])
        alphas.append(traj.alpha[1:])
        state = traj.final
        excess = max(excess, traj.max_bloch_excess)
        cur = summary(state)
        scale = np.maximum(np.abs(cur), 1e-300)
        change = float(np.max(np.abs(cur - prev) / scale))
        tail = 0.0
        if prev_change is not None and prev_change > 0:
            q = change / prev_change
            tail = change * q / (1.0 - q) if q < 1 else math.inf
        if change <= criterion and tail <= criterion:
            return Trajectory(np.concatenate(ts), np.concatenate(alphas), state, True, None, excess)
        prev, prev_change = cur, change
    return Trajectory(np.concatenate(ts), np.concatenate(alphas), state, False, None, excess)
