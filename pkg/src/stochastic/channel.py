"""Link-level generation and swap outcome draws."""

from dataclasses import dataclass, field

import numpy as np

from ..models.switch import Pair, SwitchParams
from .streams import RngStreams


def sample_link_generation(params: SwitchParams, streams: RngStreams, t: int) -> np.ndarray:
    """C0[k] ~ Bernoulli(p_k) for slot t, independent over k and t."""
    C0 = np.zeros(params.K, dtype=np.int64)
    for k, p in enumerate(params.p):
        u, off = streams.block(
            "channel", (k,), t,
            lambda s, chunk, k=k: s.generator("channel", (k,), chunk).random(s.chunk_slots),
        )
        C0[k] = 1 if u[off] < p else 0
    return C0


@dataclass
class SwapOutcomes:
    """Per-attempt results of one slot's swaps, in attempt order per pair."""

    R: np.ndarray
    attempts: dict[Pair, list[bool]] = field(default_factory=dict)


def sample_swap_outcomes(q: float, F: np.ndarray, streams: RngStreams) -> SwapOutcomes:
    """Independent Bernoulli(q) draw per scheduled attempt, pairs visited
    in lexicographic order."""
    K = F.shape[0]
    R = np.zeros_like(F)
    attempts: dict[Pair, list[bool]] = {}
    gen = streams.sequential("swap")
    for i in range(K):
        for j in range(i + 1, K):
            n = int(F[i, j])
            if n == 0:
                continue
            hits = (gen.random(n) < q).tolist()
            attempts[(i, j)] = hits
            R[i, j] = R[j, i] = sum(hits)
    return SwapOutcomes(R, attempts)


def swap_trial(q: float, streams: RngStreams) -> bool:
    """One on-arrival swap attempt, drawn from the same swap stream."""
    return bool(streams.sequential("swap").random() < q)
