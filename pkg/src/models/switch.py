"""
Core domain types of the star switch and its slot-update dynamics.

Nodes are indexed 0..K-1. Pair matrices (U, E, F, R, A) are symmetric K x K
integer arrays with zero diagonal; an unordered pair (i, j) is always
written with i < j.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np

from .errors import ConfigError, ContractViolation

Pair = tuple[int, int]


def node_pairs(K: int) -> list[Pair]:
    """Unordered pairs (i, j), i < j, in lexicographic order."""
    return [(i, j) for i in range(K) for j in range(i + 1, K)]


def _symmetric(m: np.ndarray) -> bool:
    return bool(np.array_equal(m, m.T)) and not np.any(np.diag(m))


@dataclass(frozen=True, eq=False)
class RateMatrix:
    """Symmetric request rates lambda[i][j] in requests per slot."""

    lam: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.lam, dtype=float)
        if lam.ndim != 2 or lam.shape[0] != lam.shape[1]:
            raise ConfigError(f"rate matrix must be square, got shape {lam.shape}")
        if not np.all(np.isfinite(lam)) or np.any(lam < 0):
            raise ConfigError("rates must be finite and nonnegative")
        if not np.allclose(lam, lam.T, rtol=0, atol=1e-15) or np.any(np.diag(lam) != 0):
            raise ConfigError("rate matrix must be symmetric with zero diagonal")
        object.__setattr__(self, "lam", lam)

    @classmethod
    def uniform(cls, K: int, rate: float) -> "RateMatrix":
        lam = np.full((K, K), float(rate))
        np.fill_diagonal(lam, 0.0)
        return cls(lam)

    @property
    def K(self) -> int:
        return self.lam.shape[0]

    def __getitem__(self, pair: Pair) -> float:
        return float(self.lam[pair])

    def pairs(self) -> Iterator[tuple[Pair, float]]:
        for i, j in node_pairs(self.K):
            yield (i, j), float(self.lam[i, j])

    def scaled(self, alpha: float) -> "RateMatrix":
        return RateMatrix(self.lam * alpha)

    def node_load(self) -> np.ndarray:
        """Sum over partners of the rates touching each node."""
        return self.lam.sum(axis=0)

    def total(self) -> float:
        """Sum over unordered pairs."""
        return float(np.triu(self.lam, 1).sum())

    def __eq__(self, other) -> bool:
        return isinstance(other, RateMatrix) and np.array_equal(self.lam, other.lam)


@dataclass(frozen=True)
class SwitchParams:
    """Physical and scheduling parameters of the switch.

    W, mem_per_interface: None means unbounded.
    T2_ns: math.inf disables dephasing.
    end_node_dephasing: whether the end-node half of every pair dephases too.
    """

    K: int
    p: tuple[float, ...]
    q: float
    W: Optional[int] = None
    mem_per_interface: Optional[int] = None
    T2_ns: float = math.inf
    slot_ns: float = 1000.0
    fidelity_threshold: float = 0.5
    end_node_dephasing: bool = True

    def __post_init__(self):
        if self.K < 2:
            raise ConfigError(f"K must be at least 2, got {self.K}")
        p = tuple(float(x) for x in self.p)
        if len(p) == 1:
            p = p * self.K
        if len(p) != self.K:
            raise ConfigError(f"expected {self.K} generation probabilities, got {len(p)}")
        if any(not 0.0 <= x <= 1.0 for x in p):
            raise ConfigError("generation probabilities must lie in [0, 1]")
        object.__setattr__(self, "p", p)
        if not 0.0 < self.q <= 1.0:
            raise ConfigError(f"swap probability q must lie in (0, 1], got {self.q}")
        if self.W is not None and self.W < 1:
            raise ConfigError("W must be a positive integer or unbounded")
        if self.mem_per_interface is not None and self.mem_per_interface < 1:
            raise ConfigError("mem_per_interface must be positive or unbounded")
        if not self.T2_ns > 0:
            raise ConfigError("T2_ns must be positive")
        if not self.slot_ns > 0:
            raise ConfigError("slot_ns must be positive")
        if not 0.5 <= self.fidelity_threshold <= 1.0:
            raise ConfigError("fidelity_threshold must lie in [0.5, 1]")


@dataclass(frozen=True, eq=False)
class QueueState:
    """Counts at the start of a slot: pending requests U, stored
    end-to-end pairs E, stored link pairs E0 per interface."""

    U: np.ndarray
    E: np.ndarray
    E0: np.ndarray

    @classmethod
    def zeros(cls, K: int) -> "QueueState":
        return cls(
            np.zeros((K, K), dtype=np.int64),
            np.zeros((K, K), dtype=np.int64),
            np.zeros(K, dtype=np.int64),
        )

    @property
    def K(self) -> int:
        return self.E0.shape[0]

    def validate(self, mem_per_interface: Optional[int] = None) -> None:
        for name in ("U", "E"):
            m = getattr(self, name)
            if not _symmetric(m):
                raise ContractViolation(f"{name} must be symmetric with zero diagonal")
            if np.any(m < 0):
                raise ContractViolation(f"{name} has a negative count")
        if np.any(self.E0 < 0):
            raise ContractViolation("E0 has a negative count")
        if mem_per_interface is not None and np.any(self.E0 > mem_per_interface):
            raise ContractViolation("E0 exceeds memory capacity")

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, QueueState)
            and np.array_equal(self.U, other.U)
            and np.array_equal(self.E, other.E)
            and np.array_equal(self.E0, other.E0)
        )


@dataclass(frozen=True, eq=False)
class SlotEvents:
    """What happened during one slot.

    A: requests that joined the queue (arrivals not served on arrival).
    C0: link pairs admitted into memory.
    F: swap attempts, scheduled plus on-arrival.
    R: successes of the scheduled swaps.
    E_used: stored end-to-end pairs consumed by on-arrival service.
    served: False on slots where the protocol leaves the queues alone.
    """

    A: np.ndarray
    C0: np.ndarray
    F: np.ndarray
    R: np.ndarray
    E_used: Optional[np.ndarray] = None
    served: bool = True

    @classmethod
    def zeros(cls, K: int) -> "SlotEvents":
        z = np.zeros((K, K), dtype=np.int64)
        return cls(z, np.zeros(K, dtype=np.int64), z.copy(), z.copy())


def step_queues(state: QueueState, ev: SlotEvents) -> QueueState:
    """Advance counts by one slot.

    U' = max(U - E - R, 0) + A
    E' = max(E + R - U, 0) - E_used
    E0' = E0 - sum_j F + C0

    On a slot without service, U' = U + A and E' = E + R - E_used.
    """
    U, E, E0 = state.U, state.E, state.E0
    F, R = ev.F, ev.R
    if np.any(R < 0) or np.any(R > F):
        raise ContractViolation("swap successes must satisfy 0 <= R <= F")
    if not _symmetric(F) or not _symmetric(R) or not _symmetric(ev.A):
        raise ContractViolation("A, F and R must be symmetric with zero diagonal")
    used = F.sum(axis=1)
    if np.any(used > E0):
        k = int(np.argmax(used - E0))
        raise ContractViolation(
            f"interface {k} swaps {int(used[k])} pairs but stores only {int(E0[k])}"
        )

    if ev.served:
        U_next = np.maximum(U - E - R, 0) + ev.A
        E_next = np.maximum(E + R - U, 0)
    else:
        U_next = U + ev.A
        E_next = E + R
    if ev.E_used is not None:
        if np.any(ev.E_used > E_next):
            raise ContractViolation("on-arrival service used more stored pairs than were left")
        E_next = E_next - ev.E_used
    E0_next = E0 - used + ev.C0
    return QueueState(U_next, E_next, E0_next)


def remove_pairs(state: QueueState, link: np.ndarray, e2e: np.ndarray) -> QueueState:
    """Counts after discarding link pairs per interface and stored
    end-to-end pairs per node pair."""
    if np.any(link > state.E0) or np.any(e2e > state.E):
        raise ContractViolation("cannot discard more pairs than are stored")
    return QueueState(state.U, state.E - e2e, state.E0 - link)


def total_backlog(state: QueueState) -> int:
    """Pending requests summed over unordered pairs."""
    return int(np.triu(state.U, 1).sum())


@dataclass(slots=True)
class EprPair:
    """A live pair. Link pairs sit between the switch and node `nodes[0]`;
    end-to-end pairs join `nodes[0]` and `nodes[1]`.

    qubit_birth_ns holds the dwell start of the two qubits still alive:
    (switch-side, end-node) for a link pair, (end i, end j) after a swap.
    frozen_coherence carries the decay already accumulated by qubits that
    were measured in the swap.
    """

    id: int
    kind: str
    nodes: tuple[int, ...]
    qubit_birth_ns: tuple[float, float]
    label: Optional[Pair] = None
    frozen_coherence: float = 1.0

    @property
    def birth_ns(self) -> float:
        """Age key: the switch-side qubit of a link pair, the older end of
        an end-to-end pair."""
        if self.kind == "link":
            return self.qubit_birth_ns[0]
        return min(self.qubit_birth_ns)


@dataclass(slots=True)
class Request:
    """An end-to-end entanglement request for an unordered node pair."""

    id: int
    pair: Pair
    arrival_ns: float
    arrival_slot: int
    served_ns: Optional[float] = None
    served_slot: Optional[int] = None
    served_fidelity: Optional[float] = None
    on_arrival: bool = field(default=False)

    @property
    def latency_ns(self) -> Optional[float]:
        if self.served_ns is None:
            return None
        return self.served_ns - self.arrival_ns

    @property
    def latency_slots(self) -> Optional[int]:
        """Slot boundaries crossed before service; 0 when served on arrival."""
        if self.served_slot is None:
            return None
        return self.served_slot - self.arrival_slot
