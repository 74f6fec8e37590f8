"""Age of information for correlated multi-sensor status updates with probabilistic preemption.

Closed-form analysis, an event simulator, and a global optimizer for the
per-sensor preemption probabilities.
"""
from .analysis import (
    AoiReport,
    ShsSolution,
    SingularSystem,
    StationaryDistribution,
    aoi_expanded_form,
    aoi_full_preemption,
    aoi_no_preemption,
    aoi_process,
    aoi_sum,
    preemption_gap,
    shs_oracle_aoi,
    stationary_distribution,
)
from .model import (
    ConfigParseError,
    CorrelationOutOfRange,
    DimensionMismatch,
    IndexOutOfRange,
    ModelError,
    NonPositiveRate,
    PreemptionPolicy,
    ProbabilityOutOfRange,
    RateSummary,
    SystemConfig,
    UncoveredProcess,
    informative_rates,
    load_config,
    parse_config,
    validate_config,
)
from .opt import (
    BnbResult,
    branch_and_bound,
    build_fractional_program,
    ep_bounds,
    grid_oracle,
    iteration_upper_bound,
    optimize,
)
from .sim import KERNEL, SimConfig, SimResult, occupancy_check, simulate, simulate_reduced

__version__ = "0.1.0"

__all__ = [
    "aoi_expanded_form",
    "aoi_full_preemption",
    "aoi_no_preemption",
    "aoi_process",
    "aoi_sum",
    "AoiReport",
    "BnbResult",
    "branch_and_bound",
    "build_fractional_program",
    "ConfigParseError",
    "CorrelationOutOfRange",
    "DimensionMismatch",
    "ep_bounds",
    "grid_oracle",
    "IndexOutOfRange",
    "informative_rates",
    "iteration_upper_bound",
    "KERNEL",
    "load_config",
    "ModelError",
    "NonPositiveRate",
    "occupancy_check",
    "optimize",
    "parse_config",
    "preemption_gap",
    "PreemptionPolicy",
    "ProbabilityOutOfRange",
    "RateSummary",
    "shs_oracle_aoi",
    "ShsSolution",
    "SimConfig",
    "SimResult",
    "simulate",
    "simulate_reduced",
    "SingularSystem",
    "stationary_distribution",
    "StationaryDistribution",
    "SystemConfig",
    "UncoveredProcess",
    "validate_config",
]
