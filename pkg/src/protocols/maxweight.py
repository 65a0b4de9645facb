"""
Max-weight protocol: at slots t = m*T0 - 1 swap according to the
maximum-weight b-matching with weights U(t - T0) and capacities E0(t);
stay idle otherwise.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np

from ..models.errors import ConfigError
from ..models.switch import QueueState, SwitchParams
from .base import Scheduler, SchedulerDecision, cap_to_budget
from .solver import solve_mw

if TYPE_CHECKING:
    from ..engine.memory import SwitchMemory


class MaxWeightScheduler(Scheduler):
    name = "maxweight"

    def __init__(self, params: SwitchParams, T0: int, qubit_policy: str = "yqf", discard: bool = False):
        super().__init__(params, qubit_policy)
        if T0 is None or T0 < 1:
            raise ConfigError(f"max-weight needs a positive period T0, got {T0}")
        self.T0 = int(T0)
        self.discard = discard
        if discard:
            self.name = "maxweight-discard"
        # U at the previous decision slot; zero before the first one
        self.snapshot = np.zeros((params.K, params.K), dtype=np.int64)

    def is_decision_slot(self, t: int) -> bool:
        return t % self.T0 == self.T0 - 1

    def serves_at(self, t: int) -> bool:
        return self.is_decision_slot(t)

    def decide(self, t: int, state: QueueState, memory: "SwitchMemory") -> SchedulerDecision:
        if not self.is_decision_slot(t):
            return SchedulerDecision.idle(self.params.K)
        weights = self.snapshot
        F = solve_mw(weights, memory.link_counts())
        F = cap_to_budget(F, weights, self.params.W)
        self.snapshot = state.U.copy()
        chosen = self.realize(F, memory)
        return SchedulerDecision(F, chosen, self.discard)
