"""
Quantum memory of the switch and stored end-to-end pairs.

Each interface keeps its link pairs in buckets keyed by stationary label
(None when unlabeled). Pairs enter a bucket in birth order, so the oldest
pair sits at the left end and the youngest at the right end.
"""

import heapq
from collections import deque
from typing import Iterable, Iterator, Optional

from ..models.errors import ContractViolation
from ..models.switch import EprPair, Pair, SwitchParams
from ..physics.dephasing import should_discard

Label = Optional[Pair]


class InterfaceMemory:
    """Link pairs stored on one interface."""

    def __init__(self, k: int, capacity: Optional[int] = None):
        self.k = k
        self.capacity = capacity
        self.buckets: dict[Label, deque[EprPair]] = {}
        self.count = 0

    def __len__(self) -> int:
        return self.count

    def __iter__(self) -> Iterator[EprPair]:
        for bucket in self.buckets.values():
            yield from bucket

    @property
    def full(self) -> bool:
        return self.capacity is not None and self.count >= self.capacity

    def add(self, pair: EprPair) -> None:
        self.buckets.setdefault(pair.label, deque()).append(pair)
        self.count += 1

    def size(self, label: Label = None) -> int:
        bucket = self.buckets.get(label)
        return len(bucket) if bucket else 0

    def take(self, label: Label, n: int, policy: str) -> list[EprPair]:
        """Remove n pairs of one bucket: youngest first under YQF, oldest
        first under OQF. Same choice as select_qubits on the bucket."""
        bucket = self.buckets.get(label)
        if n > (len(bucket) if bucket else 0):
            raise ContractViolation(f"interface {self.k} holds fewer than {n} pairs labeled {label}")
        pop = bucket.pop if policy == "yqf" else bucket.popleft
        taken = [pop() for _ in range(n)]
        self.count -= n
        return taken

    def evict_oldest(self) -> Optional[EprPair]:
        heads = [(b[0].birth_ns, b[0].id, label) for label, b in self.buckets.items() if b]
        if not heads:
            return None
        label = min(heads)[2]
        self.count -= 1
        return self.buckets[label].popleft()

    def sweep(self, now_ns: float, params: SwitchParams) -> list[EprPair]:
        """Drop pairs below the fidelity threshold; age order means only
        bucket heads need checking."""
        dropped = []
        for bucket in self.buckets.values():
            while bucket and should_discard(bucket[0], now_ns, params):
                dropped.append(bucket.popleft())
        self.count -= len(dropped)
        return dropped

    def drain(self) -> list[EprPair]:
        dropped = [pair for pair in self]
        self.buckets.clear()
        self.count = 0
        return dropped


class E2EStore:
    """End-to-end pairs held at the end nodes, one heap per node pair.

    Heaps are keyed so the pair the qubit policy prefers is on top: the
    youngest under YQF, the oldest under OQF, ties by id.
    """

    def __init__(self, qubit_policy: str = "yqf"):
        self.youngest_first = qubit_policy == "yqf"
        self.heaps: dict[Pair, list] = {}

    def _entry(self, pair: EprPair) -> tuple:
        if self.youngest_first:
            return -pair.birth_ns, -pair.id, pair
        return pair.birth_ns, pair.id, pair

    def __len__(self) -> int:
        return sum(len(h) for h in self.heaps.values())

    def count(self, pair: Pair) -> int:
        return len(self.heaps.get(pair, ()))

    def add(self, pair: EprPair) -> None:
        heapq.heappush(self.heaps.setdefault(pair.nodes, []), self._entry(pair))

    def take(self, pair: Pair, n: int) -> list[EprPair]:
        """Remove the n preferred pairs of one node pair, best first."""
        heap = self.heaps.get(pair)
        if n > (len(heap) if heap else 0):
            raise ContractViolation(f"end nodes {pair} hold fewer than {n} end-to-end pairs")
        return [heapq.heappop(heap)[2] for _ in range(n)]

    def sweep(self, now_ns: float, params: SwitchParams) -> dict[Pair, list[EprPair]]:
        stale_by_pair = {}
        for key, heap in self.heaps.items():
            stale = [e[2] for e in heap if should_discard(e[2], now_ns, params)]
            if stale:
                gone = {p.id for p in stale}
                heap[:] = [e for e in heap if e[2].id not in gone]
                heapq.heapify(heap)
                stale_by_pair[key] = stale
        return stale_by_pair

    def drain(self) -> dict[Pair, list[EprPair]]:
        drained = {key: [e[2] for e in heap] for key, heap in self.heaps.items() if heap}
        self.heaps.clear()
        return drained


class SwitchMemory:
    """All interfaces plus the end-to-end pairs held at the end nodes."""

    def __init__(self, params: SwitchParams, qubit_policy: str = "yqf"):
        self.params = params
        self.interfaces = [InterfaceMemory(k, params.mem_per_interface) for k in range(params.K)]
        self.e2e = E2EStore(qubit_policy)

    def __getitem__(self, k: int) -> InterfaceMemory:
        return self.interfaces[k]

    def link_counts(self) -> list[int]:
        return [len(m) for m in self.interfaces]

    def e2e_count(self, pair: Pair) -> int:
        return self.e2e.count(pair)

    def store_e2e(self, pairs: Iterable[EprPair]) -> None:
        for pair in pairs:
            self.e2e.add(pair)

    def sweep(self, now_ns: float) -> tuple[list[list[EprPair]], dict[Pair, list[EprPair]]]:
        """Fidelity-threshold discard over every stored pair."""
        if self.params.fidelity_threshold <= 0.5:
            return [[] for _ in self.interfaces], {}
        link = [m.sweep(now_ns, self.params) for m in self.interfaces]
        return link, self.e2e.sweep(now_ns, self.params)

    def drain(self) -> tuple[list[list[EprPair]], dict[Pair, list[EprPair]]]:
        link = [m.drain() for m in self.interfaces]
        return link, self.e2e.drain()
