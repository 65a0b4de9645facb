from .memory import E2EStore, InterfaceMemory, SwitchMemory
from .outputs import write_run_outputs
from .simulator import (
    DISCARD_CAUSES,
    FIDELITY,
    MEMORY_FULL,
    PROTOCOL_DISCARD,
    RunResult,
    SwitchModel,
    admit_pair,
    build_scheduler,
    run,
    serve_matches,
)

__all__ = [
    "DISCARD_CAUSES",
    "E2EStore",
    "FIDELITY",
    "MEMORY_FULL",
    "PROTOCOL_DISCARD",
    "InterfaceMemory",
    "RunResult",
    "SwitchMemory",
    "SwitchModel",
    "admit_pair",
    "build_scheduler",
    "run",
    "serve_matches",
    "write_run_outputs",
]
