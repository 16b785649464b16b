"""Physical parameters of the driven atom-cavity system.

All rates are stored as angular frequencies in rad/s. Configuration files and
CLI output use linear kHz; :func:`params_from_linear_khz` and
:func:`to_linear_khz` are the only places where the factor 2*pi*1e3 appears.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from typing import Mapping

from .errors import ConfigError, ValidationError

KHZ = 2.0 * math.pi * 1e3  # rad/s per linear kHz

# linear kHz values from the experiment description
PAPER_G0_KHZ = 66.0
PAPER_KAPPA_KHZ = 70.0
PAPER_GAMMA_KHZ = 182.4


@dataclass(frozen=True)
class SystemParams:
    """Rates (rad/s) and effective atom number of the coupled system.

    ``n_atoms`` is real-valued because it is an effective, fitted number.
    """

    g0: float
    kappa: float
    gamma: float
    gamma_d: float = 0.0
    delta_omega: float = 0.0
    n_atoms: float = 0.0
    eta: float = 0.0

    def __post_init__(self):
        for name in ("g0", "kappa", "gamma"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValidationError(f"{name} must be positive and finite, got {value!r}")
        for name in ("gamma_d", "delta_omega", "n_atoms", "eta"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ValidationError(f"{name} must be non-negative and finite, got {value!r}")

    @property
    def gamma_perp(self) -> float:
        """Total coherence decay rate gamma + gamma_d."""
        return self.gamma + self.gamma_d

    def replace(self, **changes) -> "SystemParams":
        return SystemParams(**{**asdict(self), **changes})


@dataclass(frozen=True)
class Detuning:
    """Cavity-atom and probe-atom detunings (rad/s)."""

    delta_c: float
    delta_p: float

    def __post_init__(self):
        if not (math.isfinite(self.delta_c) and math.isfinite(self.delta_p)):
            raise ValidationError(f"detunings must be finite, got {self!r}")


REQUIRED_KEYS = ("g0", "kappa", "gamma")
OPTIONAL_KEYS = ("gamma_d", "delta_omega", "eta")
RATE_KEYS = REQUIRED_KEYS + OPTIONAL_KEYS


def params_from_linear_khz(values: Mapping[str, float]) -> SystemParams:
    """Build :class:`SystemParams` from linear frequencies in kHz.

    ``values`` must contain ``g0``, ``kappa``, ``gamma``; ``gamma_d``,
    ``delta_omega``, ``eta`` default to zero. ``n_atoms`` is dimensionless
    and passed through unchanged.
    """
    for key in REQUIRED_KEYS:
        if key not in values:
            raise ConfigError(f"missing required parameter {key!r}")
    unknown = set(values) - set(RATE_KEYS) - {"n_atoms"}
    if unknown:
        raise ConfigError(f"unknown parameter(s): {', '.join(sorted(unknown))}")
    kwargs = {}
    for key in RATE_KEYS:
        if key in values:
            try:
                kwargs[key] = float(values[key]) * KHZ
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"parameter {key!r} is not a number: {values[key]!r}") from exc
    try:
        kwargs["n_atoms"] = float(values.get("n_atoms", 0.0))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"parameter 'n_atoms' is not a number: {values['n_atoms']!r}") from exc
    return SystemParams(**kwargs)


def to_linear_khz(params: SystemParams) -> dict[str, float]:
    """Inverse of :func:`params_from_linear_khz`."""
    out = {f.name: getattr(params, f.name) / KHZ for f in fields(params) if f.name != "n_atoms"}
    out["n_atoms"] = params.n_atoms
    return out


def paper_params(**overrides_khz) -> SystemParams:
    """Experimental g0, kappa, gamma with any other entries given in linear kHz."""
    values = {"g0": PAPER_G0_KHZ, "kappa": PAPER_KAPPA_KHZ, "gamma": PAPER_GAMMA_KHZ}
    values.update(overrides_khz)
    return params_from_linear_khz(values)


def cooperativity(params: SystemParams) -> tuple[float, float]:
    """Single-atom and collective cooperativity ``(C1, N*C1)``."""
    c1 = params.g0**2 / (params.kappa * params.gamma)
    return c1, params.n_atoms * c1
