"""Monte Carlo engine and verification harness for Brownian local-time functionals."""

__version__ = "0.1.0"

from .config import ConfigError, SimConfig
from .paths import PathGrid, derive_replica_seed, simulate_path
from .local_time import (LocalTimeField, diagonal_local_time_series, field_at,
                         occupation_field)
from .functionals import (ReplicaRecord, alpha_diagonal, alpha_from_field,
                          alpha_triangular, bracket, bracket_naive,
                          clark_ocone_reconstruct, covariation, g_modulus, psi, psi_series,
                          triangular_kernel_constants, u_hat, u_hat_l2,
                          u_hat_series)
from .harness import (HAggregates, KnightReport, SweepError, SweepResult,
                      knight_condition_report, run_sweep, standardized_statistic)
from .stats import ks_distance, least_squares_fit, mean_stderr, normal_cdf
from .cli import (ConfigParseError, RunManifest, parse_config, serialize_config,
                  write_results)

__all__ = [
    "ConfigError", "SimConfig", "PathGrid", "derive_replica_seed", "simulate_path",
    "LocalTimeField", "diagonal_local_time_series", "field_at", "occupation_field",
    "ReplicaRecord", "alpha_diagonal", "alpha_from_field", "alpha_triangular",
    "bracket", "bracket_naive", "clark_ocone_reconstruct", "covariation", "g_modulus", "psi",
    "psi_series", "triangular_kernel_constants", "u_hat", "u_hat_l2", "u_hat_series",
    "HAggregates", "KnightReport", "SweepError", "SweepResult",
    "knight_condition_report", "run_sweep", "standardized_statistic",
    "ks_distance", "least_squares_fit", "mean_stderr", "normal_cdf",
    "ConfigParseError", "RunManifest", "parse_config", "serialize_config",
    "write_results", "__version__",
]
