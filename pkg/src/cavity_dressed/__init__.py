"""Mean-field steady states and spectra of N two-level atoms in a driven cavity."""

__version__ = "0.1.0"

from .broadening import BinSpec, EnsembleBins, Strategy, build_bins, gaussian_density
from .errors import ConfigError, IntegrationError, SolverError, ValidationError
from .params import KHZ, Detuning, SystemParams, cooperativity, paper_params, params_from_linear_khz
from .response import collective_gamma, coherence, inversion
from .spectra import dressed_resonances, find_peaks, splitting_vs_n, sweep_map
from .steady_state import SolverOptions, Stability, steady_state, solve_intensity

__all__ = [
    "BinSpec", "EnsembleBins", "Strategy", "build_bins", "gaussian_density",
    "ConfigError", "IntegrationError", "SolverError", "ValidationError",
    "KHZ", "Detuning", "SystemParams", "cooperativity", "paper_params", "params_from_linear_khz",
    "collective_gamma", "coherence", "inversion",
    "dressed_resonances", "find_peaks", "splitting_vs_n", "sweep_map",
    "SolverOptions", "Stability", "steady_state", "solve_intensity",
]
