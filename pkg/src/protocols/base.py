"""Scheduler abstraction shared by all protocols."""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Optional

import numpy as np

from ..models.errors import ContractViolation
from ..models.switch import EprPair, Pair, QueueState, SwitchParams, node_pairs

if TYPE_CHECKING:
    from ..engine.memory import SwitchMemory
    from ..stochastic.streams import RngStreams


@dataclass
class SchedulerDecision:
    """Swap attempts of one slot and the link pairs each attempt consumes."""

    F: np.ndarray
    chosen_pairs: dict[Pair, list[tuple[EprPair, EprPair]]] = field(default_factory=dict)
    discard_now: bool = False

    @classmethod
    def idle(cls, K: int, discard_now: bool = False) -> "SchedulerDecision":
        return cls(np.zeros((K, K), dtype=np.int64), {}, discard_now)

    def swap_count(self) -> int:
        return int(np.triu(self.F, 1).sum())


def cap_to_budget(F: np.ndarray, weights: np.ndarray, W: Optional[int]) -> np.ndarray:
    """Keep at most W attempts, heaviest pairs first (ties lexicographic)."""
    if W is None or np.triu(F, 1).sum() <= W:
        return F
    K = F.shape[0]
    order = sorted(node_pairs(K), key=lambda ij: (-weights[ij], ij))
    capped = np.zeros_like(F)
    budget = W
    for i, j in order:
        take = min(int(F[i, j]), budget)
        capped[i, j] = capped[j, i] = take
        budget -= take
        if budget == 0:
            break
    return capped


class Scheduler(ABC):
    """A swapping protocol. One instance belongs to one run."""

    name = "scheduler"
    #: whether requests may be served by an immediate swap as they arrive
    serves_on_arrival = False

    def __init__(self, params: SwitchParams, qubit_policy: str = "yqf"):
        self.params = params
        self.qubit_policy = qubit_policy

    def label(self, pair: EprPair, streams: "RngStreams") -> Optional[Pair]:
        """Tag for a fresh link pair; untagged by default."""
        return None

    def arrival_label(self, pair: Pair) -> Optional[Pair]:
        """Bucket an on-arrival swap draws from."""
        return None

    def discards_unlabeled(self) -> bool:
        return False

    def serves_at(self, t: int) -> bool:
        """Whether queued requests may be served at the opening boundary of slot t."""
        return True

    @abstractmethod
    def decide(self, t: int, state: QueueState, memory: "SwitchMemory") -> SchedulerDecision:
        """Choose this slot's swaps and remove the consumed pairs from memory."""

    def realize(
        self,
        F: np.ndarray,
        memory: "SwitchMemory",
        labels: Optional[dict[Pair, Optional[Pair]]] = None,
    ) -> dict[Pair, list[tuple[EprPair, EprPair]]]:
        """Take the concrete link pairs for F out of memory."""
        if self.params.W is not None and np.triu(F, 1).sum() > self.params.W:
            raise ContractViolation("decision exceeds the swap budget W")
        chosen = {}
        for i, j in node_pairs(self.params.K):
            n = int(F[i, j])
            if n == 0:
                continue
            label = labels.get((i, j)) if labels else None
            a = memory[i].take(label, n, self.qubit_policy)
            b = memory[j].take(label, n, self.qubit_policy)
            chosen[(i, j)] = list(zip(a, b))
        return chosen
