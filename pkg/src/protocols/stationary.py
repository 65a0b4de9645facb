"""
Stationary protocol: every fresh link pair on interface i is tagged (i, j)
with probability f_tilde_ij / p_i, and matching tags on both interfaces are
swapped as soon as they exist. The discard variant throws away everything
stored at the end of each period of T0 slots.
"""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING, Optional

import numpy as np

from ..capacity.region import StationaryPlan
from ..models.errors import ContractViolation
from ..models.switch import EprPair, Pair, QueueState, SwitchParams, node_pairs
from .base import Scheduler, SchedulerDecision, cap_to_budget

if TYPE_CHECKING:
    from ..engine.memory import SwitchMemory
    from ..stochastic.streams import RngStreams

logger = logging.getLogger("qswitch-protocols")

PROB_TOL = 1e-12


def stationary_label(pair: EprPair, plan: StationaryPlan, streams: "RngStreams") -> Optional[Pair]:
    """Tag a fresh link pair, or None for the idle residual."""
    k = pair.nodes[0]
    probs = plan.label_prob[k]
    if probs.sum() > 1 + PROB_TOL:
        raise ContractViolation(f"labeling probabilities of interface {k} sum above 1")
    u = streams.sequential("labeling", (k,)).random()
    acc = 0.0
    for j, prob in enumerate(probs):
        if j == k:
            continue
        acc += prob
        if u < acc:
            return (k, j) if k < j else (j, k)
    return None


def stationary_counts(memory: "SwitchMemory", K: int) -> np.ndarray:
    """F_ij = min(|M^i_ij|, |M^j_ij|)."""
    F = np.zeros((K, K), dtype=np.int64)
    for i, j in node_pairs(K):
        n = min(memory[i].size((i, j)), memory[j].size((i, j)))
        F[i, j] = F[j, i] = n
    return F


def is_period_end(t: int, T0: int) -> bool:
    return t % T0 == T0 - 1


def discard_sweep(memory: "SwitchMemory", t: int, T0: int) -> list[int]:
    """Drop every stored pair at a period boundary; returns their ids."""
    if not is_period_end(t, T0):
        raise ContractViolation(f"slot {t} is not a period end for T0={T0}", slot=t)
    link, e2e = memory.drain()
    ids = [p.id for pairs in link for p in pairs]
    ids.extend(p.id for pairs in e2e.values() for p in pairs)
    return ids


class StationaryScheduler(Scheduler):
    name = "stationary"
    serves_on_arrival = True

    def __init__(
        self,
        params: SwitchParams,
        plan: StationaryPlan,
        qubit_policy: str = "yqf",
        discard: bool = False,
    ):
        super().__init__(params, qubit_policy)
        self.plan = plan
        self.discard = discard
        if discard:
            self.name = "stationary-discard"

    def label(self, pair: EprPair, streams: "RngStreams") -> Optional[Pair]:
        return stationary_label(pair, self.plan, streams)

    def arrival_label(self, pair: Pair) -> Optional[Pair]:
        return pair

    def discards_unlabeled(self) -> bool:
        return True

    def decide(self, t: int, state: QueueState, memory: "SwitchMemory") -> SchedulerDecision:
        K = self.params.K
        F = stationary_counts(memory, K)
        F = cap_to_budget(F, F, self.params.W)
        chosen = self.realize(F, memory, {pair: pair for pair in node_pairs(K)})
        return SchedulerDecision(F, chosen, self.discard and is_period_end(t, self.plan.T0))
