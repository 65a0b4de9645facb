"""Exception types shared across the simulator."""

from typing import Optional


class SwitchError(Exception):
    """Root of all simulator errors."""


class ConfigError(SwitchError, ValueError):
    """Config could not be parsed or failed validation."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class UnknownParameterError(ConfigError):
    """Sweep parameter name is not recognized."""


class UnknownPresetError(ConfigError):
    """Experiment preset name is not recognized."""


class ContractViolation(SwitchError, RuntimeError):
    """A pre- or postcondition of the slot dynamics was broken."""

    def __init__(self, cause: str, slot: Optional[int] = None):
        self.cause = cause
        self.slot = slot
        where = f"slot {slot}: " if slot is not None else ""
        super().__init__(f"{where}{cause}")


class InfeasibleEpsilonError(ContractViolation):
    """Slack epsilon pushes the rates outside the capacity region."""


class T0SelectionError(SwitchError):
    """No period T0 could be derived; the caller must supply one."""


class InsufficientTraceError(SwitchError, ValueError):
    """Trace is too short for the requested estimator."""
