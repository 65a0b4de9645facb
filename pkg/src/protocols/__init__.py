from typing import Optional, Sequence

from ..capacity.region import StationaryPlan
from ..models.errors import ConfigError
from ..models.switch import SwitchParams
from .base import Scheduler, SchedulerDecision, cap_to_budget
from .maxweight import MaxWeightScheduler
from .ondemand import OnDemandScheduler, on_demand_counts, slack_product
from .policies import QUBIT_POLICIES, REQUEST_POLICIES, select_qubits, select_requests
from .solver import objective, solve_mw
from .stationary import StationaryScheduler, discard_sweep, stationary_counts, stationary_label

PROTOCOLS = ("stationary", "stationary-discard", "maxweight", "maxweight-discard", "on-demand")


def make_scheduler(
    name: str,
    params: SwitchParams,
    qubit_policy: str = "yqf",
    plan: Optional[StationaryPlan] = None,
    T0: Optional[int] = None,
    visit_order: Optional[Sequence[Sequence[int]]] = None,
) -> Scheduler:
    if qubit_policy not in QUBIT_POLICIES:
        raise ConfigError(f"unknown qubit policy {qubit_policy!r}")
    if name in ("stationary", "stationary-discard"):
        if plan is None:
            raise ConfigError("stationary protocols need a plan")
        return StationaryScheduler(params, plan, qubit_policy, discard=name.endswith("discard"))
    if name in ("maxweight", "maxweight-discard"):
        return MaxWeightScheduler(params, T0, qubit_policy, discard=name.endswith("discard"))
    if name == "on-demand":
        return OnDemandScheduler(params, qubit_policy, visit_order)
    raise ConfigError(f"unknown protocol {name!r}")


__all__ = [
    "PROTOCOLS",
    "Scheduler",
    "SchedulerDecision",
    "MaxWeightScheduler",
    "OnDemandScheduler",
    "StationaryScheduler",
    "cap_to_budget",
    "discard_sweep",
    "make_scheduler",
    "objective",
    "on_demand_counts",
    "select_qubits",
    "select_requests",
    "slack_product",
    "solve_mw",
    "stationary_counts",
    "stationary_label",
    "QUBIT_POLICIES",
    "REQUEST_POLICIES",
]
