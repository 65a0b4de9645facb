"""
On-demand protocol: swap only against pending requests, greedily, so that
no pair is left with a request and spare link pairs on both interfaces.
"""

from __future__ import annotations

from typing import TYPE_CHECKING, Optional, Sequence

import numpy as np

from ..models.errors import ConfigError
from ..models.switch import Pair, QueueState, SwitchParams, node_pairs
from .base import Scheduler, SchedulerDecision, cap_to_budget

if TYPE_CHECKING:
    from ..engine.memory import SwitchMemory


def on_demand_counts(U: np.ndarray, E0: Sequence[int], visit_order: Optional[Sequence[Pair]] = None) -> np.ndarray:
    """Greedy F_ij = min(U_ij, remaining E0_i, remaining E0_j)."""
    K = len(E0)
    rem = [int(c) for c in E0]
    F = np.zeros((K, K), dtype=np.int64)
    for i, j in visit_order or node_pairs(K):
        n = min(int(U[i, j]), rem[i], rem[j])
        if n > 0:
            F[i, j] = F[j, i] = n
            rem[i] -= n
            rem[j] -= n
    return F


def slack_product(U: np.ndarray, E0: Sequence[int], F: np.ndarray) -> np.ndarray:
    """(E0_i - sum_k F_ik)(E0_j - sum_k F_kj)(U_ij - F_ij) for every pair;
    identically zero for a maximal on-demand decision."""
    left = np.asarray(E0) - F.sum(axis=1)
    prod = np.outer(left, left) * (U - F)
    np.fill_diagonal(prod, 0)
    return prod


def _normalize_order(order: Sequence[Sequence[int]], K: int) -> list[Pair]:
    pairs = [tuple(sorted(p)) for p in order]
    if sorted(pairs) != node_pairs(K):
        raise ConfigError("visit_order must list every unordered node pair exactly once")
    return pairs


class OnDemandScheduler(Scheduler):
    name = "on-demand"
    serves_on_arrival = True

    def __init__(
        self,
        params: SwitchParams,
        qubit_policy: str = "yqf",
        visit_order: Optional[Sequence[Sequence[int]]] = None,
    ):
        super().__init__(params, qubit_policy)
        self.visit_order = _normalize_order(visit_order, params.K) if visit_order else node_pairs(params.K)

    def decide(self, t: int, state: QueueState, memory: "SwitchMemory") -> SchedulerDecision:
        pending = np.maximum(state.U - state.E, 0)
        F = on_demand_counts(pending, memory.link_counts(), self.visit_order)
        F = cap_to_budget(F, pending, self.params.W)
        return SchedulerDecision(F, self.realize(F, memory))
