"""Stationary atomic response and the saturable collective response Gamma(x).

``x`` is the intracavity photon number |alpha|^2. Gamma is the complex
broadening/shift the atoms imprint on the cavity resonance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .broadening import EnsembleBins
from .errors import ValidationError
from .params import SystemParams


@dataclass(frozen=True)
class AtomicSteadyState:
    s: complex
    z: float
    omega: float


@dataclass(frozen=True)
class CollectiveResponse:
    gamma_coll: complex
    intensity: float
    bins_used: int


def saturation_numerator(x, params: SystemParams):
    """g0^2 x (gamma + gamma_d) / (2 gamma): the drive term in the inversion."""
    return params.g0**2 * np.asarray(x, dtype=float) * params.gamma_perp / (2.0 * params.gamma)


def power_broadened_width(x: float, params: SystemParams) -> float:
    """Half-width of the saturated atomic Lorentzian at intensity ``x``."""
    return math.sqrt((0.5 * params.gamma_perp) ** 2 + float(saturation_numerator(x, params)))


def inversion(x: float, delta_p: float, omega: float, params: SystemParams) -> float:
    if x < 0:
        raise ValidationError("intensity must be >= 0")
    h = 0.5 * params.gamma_perp
    d = delta_p - omega
    return -1.0 / (1.0 + float(saturation_numerator(x, params)) / (d * d + h * h))


def coherence(z: float, alpha: complex, delta_p: float, omega: float, params: SystemParams) -> complex:
    return -0.5 * params.g0 * z * alpha / ((delta_p - omega) + 0.5j * params.gamma_perp)


def atomic_steady_state(alpha: complex, delta_p: float, omega: float, params: SystemParams) -> AtomicSteadyState:
    z = inversion(abs(alpha) ** 2, delta_p, omega, params)
    return AtomicSteadyState(coherence(z, alpha, delta_p, omega, params), z, omega)


def gamma_array(x, delta_p: float, params: SystemParams, bins: EnsembleBins) -> np.ndarray:
    """Gamma evaluated for an array of intensities (combined single-fraction form).

    The node sum is a fixed-order numpy reduction, so results are
    reproducible for fixed bins.
    """
    x = np.asarray(x, dtype=float)
    h = 0.5 * params.gamma_perp
    d = delta_p - bins.nodes
    sat = saturation_numerator(x, params)[..., None]
    coef = params.n_atoms * bins.weights * (0.5 * params.g0**2)
    terms = coef * (h + 1j * d) / (d * d + h * h + sat)
    return terms.sum(axis=-1)


def collective_gamma(x: float, delta_p: float, params: SystemParams, bins: EnsembleBins) -> CollectiveResponse:
    if x < 0:
        raise ValidationError("intensity must be >= 0")
    return CollectiveResponse(complex(gamma_array(x, delta_p, params, bins)), float(x), len(bins))


def collective_gamma_nested(x: float, delta_p: float, params: SystemParams, bins: EnsembleBins) -> complex:
    """Gamma in its nested form, i * sum N w (g0^2/2)/(d + i h) / (1 + S).

    Kept as an independent evaluation route for tests.
    """
    h = 0.5 * params.gamma_perp
    d = delta_p - bins.nodes
    s_param = saturation_numerator(x, params) / (d * d + h * h)
    terms = params.n_atoms * bins.weights * (0.5 * params.g0**2 / (d + 1j * h)) / (1.0 + s_param)
    return complex(1j * terms.sum())
