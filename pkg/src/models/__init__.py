from .errors import (
    ConfigError,
    ContractViolation,
    InfeasibleEpsilonError,
    InsufficientTraceError,
    SwitchError,
    T0SelectionError,
    UnknownParameterError,
    UnknownPresetError,
)
from .switch import (
    EprPair,
    QueueState,
    RateMatrix,
    Request,
    SlotEvents,
    SwitchParams,
    node_pairs,
    remove_pairs,
    step_queues,
    total_backlog,
)

__all__ = [
    "ConfigError",
    "ContractViolation",
    "InfeasibleEpsilonError",
    "InsufficientTraceError",
    "SwitchError",
    "T0SelectionError",
    "UnknownParameterError",
    "UnknownPresetError",
    "EprPair",
    "QueueState",
    "RateMatrix",
    "Request",
    "SlotEvents",
    "SwitchParams",
    "node_pairs",
    "remove_pairs",
    "step_queues",
    "total_backlog",
]
