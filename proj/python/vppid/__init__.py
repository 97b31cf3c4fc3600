"""Grey-box identification and thrust-control design for variable-pitch
propeller powertrains.

The heavy lifting lives in the compiled extension ``_vppid``; this package
re-exports its public surface.
"""

from ._vppid import (
    ActuationMode,
    ConfigError,
    DataError,
    Normalization,
    NormalizedDataset,
    NumericError,
    PidGains,
    RunConfig,
    WienerParams,
    control_cost,
    cost,
    fit_static_map,
    fit_time_constants,
    generate_openloop_record,
    generate_static_samples,
    gradient,
    load_config,
    refine,
    second_order_step_response,
    step_test,
    thrust_output,
    tune_gains,
)

__all__ = [
    "ActuationMode",
    "ConfigError",
    "DataError",
    "Normalization",
    "NormalizedDataset",
    "NumericError",
    "PidGains",
    "RunConfig",
    "WienerParams",
    "control_cost",
    "cost",
    "fit_static_map",
    "fit_time_constants",
    "generate_openloop_record",
    "generate_static_samples",
    "gradient",
    "load_config",
    "refine",
    "second_order_step_response",
    "step_test",
    "thrust_output",
    "tune_gains",
]
