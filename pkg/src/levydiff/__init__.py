"""Simulation and limit laws for hitting times of diffusions in spectrally negative Levy potentials."""

from .diffusion import additive_functional_I, hitting_time_tail_probe, simulate_H_direct
from .functionals import K_from_samples, estimate_K, exact_K, inverse_clock, sample_A_infinity, scale_function
from .gou import mean_Z, sample_Z_infinity, second_moment_Z0, simulate_Z, stationary_mean
from .harness import ExperimentConfig, ResultTable, run_experiment, write_results
from .limits import LimitLaw, LimitRegime, cdf_via_cf_inversion, sample_limit_law, theorem_constants
from .potential import (AssumptionError, PotentialSpec, find_kappa, laplace_exponent, simulate_path,
                        validate_assumptions)
from .stats import hill_tail_index, ks_distance, moment_check

__version__ = "0.1.0"

__all__ = [
    "AssumptionError", "ExperimentConfig", "K_from_samples", "LimitLaw", "LimitRegime", "PotentialSpec",
    "ResultTable", "additive_functional_I", "cdf_via_cf_inversion", "estimate_K", "exact_K", "find_kappa",
    "hill_tail_index", "hitting_time_tail_probe", "inverse_clock", "ks_distance", "laplace_exponent",
    "mean_Z", "moment_check", "run_experiment", "sample_A_infinity", "sample_Z_infinity",
    "sample_limit_law", "scale_function", "second_moment_Z0", "simulate_H_direct", "simulate_Z",
    "simulate_path", "stationary_mean", "theorem_constants", "validate_assumptions", "write_results",
]
