from .presets import (
    PRESETS,
    SWEEP_PARAMS,
    ExperimentPreset,
    PresetRun,
    apply_param,
    base_config,
    get_preset,
    per_pair_rate,
    sweep_runs,
)

__all__ = [
    "PRESETS",
    "SWEEP_PARAMS",
    "ExperimentPreset",
    "PresetRun",
    "apply_param",
    "base_config",
    "get_preset",
    "per_pair_rate",
    "sweep_runs",
]
