"""
Dephasing and fidelity tracking by coherence factors.

A qubit stored for dt decays with coherence factor c = exp(-dt/T2). A Bell
pair whose qubits carry factors c_m has fidelity (1 + prod c_m) / 2, and an
ideal Bell measurement multiplies the factors of both input pairs.
"""

import math
from typing import Sequence

from ..models.switch import EprPair, SwitchParams


def coherence(dt_ns: float, T2_ns: float) -> float:
    if math.isinf(T2_ns) or dt_ns <= 0:
        return 1.0
    return math.exp(-dt_ns / T2_ns)


def dephase_prob(dt_ns: float, T2_ns: float) -> float:
    """Probability of a phase flip after dt in memory."""
    if dt_ns < 0:
        raise ValueError("dwell time must be nonnegative")
    return (1.0 - coherence(dt_ns, T2_ns)) / 2


def pair_fidelity(dwell_ns: Sequence[float], T2_ns: float) -> float:
    if any(dt < 0 for dt in dwell_ns):
        raise ValueError("dwell times must be nonnegative")
    c = 1.0
    for dt in dwell_ns:
        c *= coherence(dt, T2_ns)
    return (1.0 + c) / 2


def swap_fidelity(dwell_a: Sequence[float], dwell_b: Sequence[float], T2_ns: float) -> float:
    """Fidelity right after swapping two pairs with the given dwell times."""
    return pair_fidelity(list(dwell_a) + list(dwell_b), T2_ns)


def age_cutoff_ns(threshold: float, T2_ns: float, clocks: int = 1) -> float:
    """Dwell after which a fresh pair falls below `threshold` when
    `clocks` of its qubits dephase."""
    if threshold <= 0.5 or math.isinf(T2_ns):
        return math.inf
    if threshold >= 1.0:
        return 0.0
    return -T2_ns * math.log(2 * threshold - 1) / clocks


def _live_clocks(pair: EprPair, params: SwitchParams) -> tuple[float, ...]:
    if pair.kind == "link":
        if params.end_node_dephasing:
            return pair.qubit_birth_ns
        return pair.qubit_birth_ns[:1]
    return pair.qubit_birth_ns if params.end_node_dephasing else ()


def pair_coherence(pair: EprPair, now_ns: float, params: SwitchParams) -> float:
    if math.isinf(params.T2_ns):
        return 1.0
    c = pair.frozen_coherence
    for born in _live_clocks(pair, params):
        c *= coherence(now_ns - born, params.T2_ns)
    return c


def current_fidelity(pair: EprPair, now_ns: float, params: SwitchParams) -> float:
    return (1.0 + pair_coherence(pair, now_ns, params)) / 2


def should_discard(pair: EprPair, now_ns: float, params: SwitchParams) -> bool:
    if params.fidelity_threshold <= 0.5:
        return False
    return current_fidelity(pair, now_ns, params) < params.fidelity_threshold


def swapped_pair(a: EprPair, b: EprPair, now_ns: float, params: SwitchParams, pair_id: int) -> EprPair:
    """End-to-end pair produced by measuring the switch-side qubits of two
    link pairs at now_ns. The end-node qubits keep their dwell clocks."""
    frozen = a.frozen_coherence * b.frozen_coherence
    if not math.isinf(params.T2_ns):
        frozen *= coherence(now_ns - a.qubit_birth_ns[0], params.T2_ns)
        frozen *= coherence(now_ns - b.qubit_birth_ns[0], params.T2_ns)
    i, j = sorted((a.nodes[0], b.nodes[0]))
    births = (a.qubit_birth_ns[1], b.qubit_birth_ns[1])
    if a.nodes[0] > b.nodes[0]:
        births = births[::-1]
    return EprPair(pair_id, "e2e", (i, j), births, None, frozen)
