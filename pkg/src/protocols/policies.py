"""Qubit selection (YQF/OQF) and request ordering (FIFO)."""

import heapq
from itertools import islice
from typing import Iterable, Sequence

from ..models.errors import ContractViolation
from ..models.switch import EprPair, Request

QUBIT_POLICIES = ("yqf", "oqf")
REQUEST_POLICIES = ("fifo",)


def _age_key(pair: EprPair) -> tuple[float, int]:
    return pair.birth_ns, pair.id


def select_qubits(policy: str, candidates: Sequence[EprPair], n: int) -> list[EprPair]:
    """The n youngest (yqf) or oldest (oqf) candidates, ties by id."""
    if policy not in QUBIT_POLICIES:
        raise ContractViolation(f"unknown qubit policy {policy!r}")
    if n > len(candidates):
        raise ContractViolation(f"asked for {n} pairs but only {len(candidates)} are live")
    if n <= 0:
        return []
    if policy == "yqf":
        return heapq.nlargest(n, candidates, key=_age_key)
    return heapq.nsmallest(n, candidates, key=_age_key)


def select_requests(queue: Iterable[Request], n: int, ordered: bool = False) -> list[Request]:
    """The n earliest requests, ties by id. With ordered=True the queue is
    already in arrival order and its head is returned."""
    if n <= 0:
        return []
    if ordered:
        return list(islice(queue, n))
    return heapq.nsmallest(n, queue, key=lambda r: (r.arrival_ns, r.id))
