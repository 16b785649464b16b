"""Gaussian inhomogeneous broadening and its discretization into bins.

The atomic transition frequencies are spread with a normal density of
standard deviation ``delta_omega``. Every ensemble average in the package is a
weighted sum over :class:`EnsembleBins` nodes.
"""
from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import roots_hermitenorm

from .errors import ValidationError
from .params import SystemParams

TAIL_SIGMAS = 8.0  # Gaussian mass beyond +-8 sigma is ~1.2e-15
UNIFORM_PANELS = 32
ADAPTIVE_MIN_ORDER = 4
SHARP_LINE_RATIO = 1e-6


class Strategy(str, enum.Enum):
    DELTA = "delta"
    GAUSS_HERMITE = "gauss_hermite"
    ADAPTIVE_LORENTZIAN = "adaptive_lorentzian"


@dataclass(frozen=True, eq=False)
class EnsembleBins:
    """Quadrature nodes (rad/s) and normalized weights for the frequency spread."""

    nodes: np.ndarray
    weights: np.ndarray
    strategy: Strategy

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float)
        weights = np.array(self.weights, dtype=float)
        if nodes.ndim != 1 or nodes.shape != weights.shape or nodes.size == 0:
            raise ValidationError("nodes and weights must be equal-length, non-empty 1D arrays")
        if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
            raise ValidationError("weights must be non-negative and sum to 1")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "strategy", Strategy(self.strategy))

    def __len__(self) -> int:
        return self.nodes.size

    def moment(self, k: int) -> float:
        return float(np.sum(self.weights * self.nodes**k))


def gaussian_density(omega, delta_omega: float):
    """Normal density of the transition-frequency offset, in s/rad."""
    if delta_omega <= 0:
        raise ValidationError("delta_omega must be > 0; use the delta strategy for a sharp line")
    omega = np.asarray(omega, dtype=float)
    return np.exp(-0.5 * (omega / delta_omega) ** 2) / math.sqrt(2.0 * math.pi * delta_omega**2)


def build_bins(
    delta_omega: float,
    m: int,
    strategy: Strategy | str = Strategy.GAUSS_HERMITE,
    *,
    center: float = 0.0,
    width: float | None = None,
) -> EnsembleBins:
    """Discretize the frequency distribution.

    Parameters
    ----------
    delta_omega : float
        Standard deviation of the spread (rad/s).
    m : int
        Node count for ``gauss_hermite``; Gauss-Legendre order per panel for
        ``adaptive_lorentzian``; must be 1 for ``delta``.
    strategy : Strategy
    center, width : float
        Only used by ``adaptive_lorentzian``: location (the probe detuning)
        and half-width of the narrowest Lorentzian the bins must resolve.
        Panels are graded geometrically away from ``center`` starting at
        ``width``, so any Lorentzian at least that wide is resolved.
    """
    strategy = Strategy(strategy)
    if m < 1:
        raise ValidationError(f"node count must be >= 1, got {m}")
    if delta_omega < 0:
        raise ValidationError("delta_omega must be >= 0")
    if delta_omega == 0:
        if m > 1:
            raise ValidationError("delta_omega = 0 admits only the single-node delta strategy")
        return EnsembleBins(np.zeros(1), np.ones(1), Strategy.DELTA)
    if strategy is Strategy.DELTA:
        raise ValidationError("delta strategy requires delta_omega = 0")
    if strategy is Strategy.GAUSS_HERMITE:
        return _gauss_hermite(delta_omega, m)
    if width is None or not width > 0:
        raise ValidationError("adaptive_lorentzian needs a positive width hint")
    if m < ADAPTIVE_MIN_ORDER:
        # lower orders cannot hold the centering invariant on 32 panels
        raise ValidationError(f"adaptive_lorentzian needs m >= {ADAPTIVE_MIN_ORDER}, got {m}")
    return _adaptive(delta_omega, m, float(center), float(width))


@functools.lru_cache(maxsize=64)
def _gauss_hermite(delta_omega: float, m: int) -> EnsembleBins:
    # Golub-Welsch nodes for weight exp(-x^2/2); stable at high order
    x, w = roots_hermitenorm(m)
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    return EnsembleBins(x * delta_omega, w / w.sum(), Strategy.GAUSS_HERMITE)


def _breakpoints(delta_omega: float, center: float, width: float) -> np.ndarray:
    lim = TAIL_SIGMAS * delta_omega
    points = list(np.linspace(-lim, lim, UNIFORM_PANELS + 1))
    if -lim < center < lim:
        points.append(center)
    step = width
    while step < 2 * lim:
        for b in (center - step, center + step):
            if -lim < b < lim:
                points.append(b)
        step *= 2.0
    return np.unique(np.array(points))


def _adaptive(delta_omega: float, order: int, center: float, width: float) -> EnsembleBins:
    edges = _breakpoints(delta_omega, center, width)
    t, w = leggauss(order)
    lo, hi = edges[:-1, None], edges[1:, None]
    half = 0.5 * (hi - lo)
    nodes = (lo + half * (t + 1.0)).ravel()
    weights = (half * w).ravel() * gaussian_density(nodes, delta_omega)
    return EnsembleBins(nodes, weights / weights.sum(), Strategy.ADAPTIVE_LORENTZIAN)


@dataclass(frozen=True)
class BinSpec:
    """Recipe for building bins per probe detuning.

    Gauss-Hermite bins do not depend on the probe and are cached; adaptive
    bins are rebuilt around each probe detuning with the unsaturated
    half-width (gamma + gamma_d)/2 as the resolution hint. A spread below
    ``SHARP_LINE_RATIO`` of that half-width is treated as a single class
    (relative effect on any response below 1e-12).
    """

    strategy: Strategy = Strategy.ADAPTIVE_LORENTZIAN
    m: int = 8

    def __post_init__(self):
        object.__setattr__(self, "strategy", Strategy(self.strategy))

    def build(self, params: SystemParams, delta_p: float = 0.0) -> EnsembleBins:
        if params.delta_omega <= SHARP_LINE_RATIO * 0.5 * params.gamma_perp:
            return build_bins(0.0, 1, Strategy.DELTA)
        if self.strategy is Strategy.ADAPTIVE_LORENTZIAN:
            return build_bins(
                params.delta_omega, self.m, self.strategy,
                center=delta_p, width=0.5 * params.gamma_perp,
            )
        return build_bins(params.delta_omega, self.m, self.strategy)


def convergence_probe(
    params: SystemParams,
    delta_p: float,
    x: float,
    spec: BinSpec,
    *,
    rtol: float = 1e-8,
    m_max: int = 4096,
) -> int:
    """Smallest node parameter m (doubling from ``spec.m``) at which doubling
    again changes the collective response by less than ``rtol``.

    Raises ValidationError if ``m_max`` is reached first.
    """
    from .response import collective_gamma

    m = spec.m
    prev = collective_gamma(x, delta_p, params, BinSpec(spec.strategy, m).build(params, delta_p)).gamma_coll
    while 2 * m <= m_max:
        cur = collective_gamma(
            x, delta_p, params, BinSpec(spec.strategy, 2 * m).build(params, delta_p)
        ).gamma_coll
        if abs(cur - prev) <= rtol * abs(cur):
            return m
        m, prev = 2 * m, cur
    raise ValidationError(f"no convergence to rtol={rtol} up to m={m_max}")
