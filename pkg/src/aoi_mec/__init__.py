"""Average age of information for computation-heavy status updates served
locally, at an edge server, or split between the two."""

from .analytic import analytic_aoi
from .core import (
    AoiEstimate,
    FixedPointError,
    Method,
    QuadratureError,
    Scheme,
    SchemeParams,
    StabilityReport,
    StageKind,
    TaskProfile,
    TimeModel,
    UnstableSchemeError,
    check_stability,
    require_stable,
)
from .deterministic import WaitDistribution, md1_wait_cdf, md1_wait_distribution
from .exponential import SystemTimeRate, interarrival_lst, system_time_rate
from .partition import (
    PartitionPoint,
    local_rate,
    min_age_floor,
    optimize_alpha,
    optimize_alpha_scaled,
    rates_from_profile,
    remote_rates,
    scaled_rates,
    scheme_for_alpha,
)
from .simulate import (
    MessageLog,
    SimConfig,
    SimResult,
    accumulate_aoi,
    collect_wait_samples,
    message_log,
    simulate,
)
from .sweep import (
    CrossoverResult,
    NoCrossingError,
    SpecFormatError,
    SweepSpec,
    ValidationCase,
    ValidationReport,
    default_validation_grid,
    find_crossover,
    list_presets,
    load_preset,
    load_spec,
    parse_spec,
    rows_to_csv,
    run_sweep,
    validate,
    write_csv,
)

__version__ = "0.1.0"

__all__ = [
    "AoiEstimate",
    "CrossoverResult",
    "FixedPointError",
    "MessageLog",
    "Method",
    "NoCrossingError",
    "PartitionPoint",
    "QuadratureError",
    "Scheme",
    "SchemeParams",
    "SimConfig",
    "SimResult",
    "SpecFormatError",
    "StabilityReport",
    "StageKind",
    "SweepSpec",
    "SystemTimeRate",
    "TaskProfile",
    "TimeModel",
    "UnstableSchemeError",
    "ValidationCase",
    "ValidationReport",
    "WaitDistribution",
    "accumulate_aoi",
    "analytic_aoi",
    "check_stability",
    "collect_wait_samples",
    "default_validation_grid",
    "find_crossover",
    "interarrival_lst",
    "list_presets",
    "load_preset",
    "load_spec",
    "local_rate",
    "md1_wait_cdf",
    "md1_wait_distribution",
    "message_log",
    "min_age_floor",
    "optimize_alpha",
    "optimize_alpha_scaled",
    "parse_spec",
    "rates_from_profile",
    "remote_rates",
    "require_stable",
    "rows_to_csv",
    "run_sweep",
    "scaled_rates",
    "scheme_for_alpha",
    "simulate",
    "system_time_rate",
    "validate",
    "write_csv",
]
