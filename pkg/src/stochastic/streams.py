"""
Seeded, independently addressable random streams.

Every source of randomness draws from its own Philox generator keyed by
(kind, index, chunk) under one master seed. Arrivals, timestamps and the
channel are drawn in blocks of `chunk_slots` slots addressed by slot number,
so the protocol under test never perturbs them (common random numbers
across protocols). Swap and labeling draws are consumed sequentially from
one generator per (kind, index).
"""

from typing import Callable, TypeVar

import numpy as np

KIND_CODES = {
    "arrivals": 1,
    "channel": 2,
    "swap": 3,
    "labeling": 4,
    "timestamps": 5,
}

DEFAULT_CHUNK_SLOTS = 1024

T = TypeVar("T")


class RngStreams:
    """Named substreams under a 64-bit master seed."""

    def __init__(self, seed: int, chunk_slots: int = DEFAULT_CHUNK_SLOTS):
        if not 0 <= int(seed) < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = int(seed)
        self.chunk_slots = chunk_slots
        self._sequential: dict[tuple, np.random.Generator] = {}
        self._blocks: dict[tuple, tuple[int, object]] = {}

    def generator(self, kind: str, index: tuple[int, ...] = (), chunk: int = 0) -> np.random.Generator:
        """Fresh generator for one substream; equal keys give equal streams."""
        key = (KIND_CODES[kind], *index, chunk)
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=key)
        return np.random.Generator(np.random.Philox(ss))

    def sequential(self, kind: str, index: tuple[int, ...] = ()) -> np.random.Generator:
        """Generator consumed in call order, shared for the whole run."""
        key = (kind, index)
        gen = self._sequential.get(key)
        if gen is None:
            gen = self.generator(kind, index)
            self._sequential[key] = gen
        return gen

    def block(
        self,
        kind: str,
        index: tuple[int, ...],
        t: int,
        draw: Callable[["RngStreams", int], T],
    ) -> tuple[T, int]:
        """Payload of the chunk holding slot t and t's offset inside it.

        `draw(streams, chunk)` builds the payload for a whole chunk; the most
        recent chunk per (kind, index) is cached.
        """
        chunk, offset = divmod(t, self.chunk_slots)
        key = (kind, index)
        cached = self._blocks.get(key)
        if cached is None or cached[0] != chunk:
            cached = (chunk, draw(self, chunk))
            self._blocks[key] = cached
        return cached[1], offset
