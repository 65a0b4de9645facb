"""Request arrival laws and per-slot arrival sampling."""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..models.errors import ConfigError
from ..models.switch import Pair, RateMatrix
from .streams import RngStreams

FAMILIES = ("bernoulli", "mixed_poisson", "constant")


@dataclass(frozen=True)
class ArrivalSpec:
    """Law of A_ij(t), i.i.d. over slots.

    bernoulli: one request with probability `rate`.
    mixed_poisson: Z*Y1 + (1-Z)*Y2 with Z ~ Bernoulli(1/2),
        Y1 ~ Poisson(lambda1), Y2 ~ Poisson(lambda2).
    constant: exactly `rate` requests every slot (integer).
    """

    family: str
    rate_param: float = 0.0
    lambda1: float = 0.0
    lambda2: float = 0.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown arrival family {self.family!r}")
        if self.family == "bernoulli" and not 0.0 <= self.rate_param <= 1.0:
            raise ConfigError(f"bernoulli rate must lie in [0, 1], got {self.rate_param}")
        if self.family == "constant" and (self.rate_param < 0 or self.rate_param != int(self.rate_param)):
            raise ConfigError(f"constant arrivals need a nonnegative integer count, got {self.rate_param}")
        if self.family == "mixed_poisson" and (self.lambda1 < 0 or self.lambda2 < 0):
            raise ConfigError("mixed Poisson components must be nonnegative")

    @classmethod
    def bernoulli(cls, rate: float) -> "ArrivalSpec":
        return cls("bernoulli", rate_param=rate)

    @classmethod
    def constant(cls, count: int) -> "ArrivalSpec":
        return cls("constant", rate_param=count)

    @classmethod
    def mixed_poisson(cls, lambda1: float, lambda2: float) -> "ArrivalSpec":
        return cls("mixed_poisson", lambda1=lambda1, lambda2=lambda2)

    @classmethod
    def mixed_poisson_rate(cls, rate: float, spread: float = 0.5) -> "ArrivalSpec":
        """Mixture with mean `rate`, components rate*(1 -/+ spread)."""
        if not 0.0 <= spread <= 1.0:
            raise ConfigError("spread must lie in [0, 1]")
        return cls.mixed_poisson(rate * (1 - spread), rate * (1 + spread))

    def rate(self) -> float:
        if self.family == "mixed_poisson":
            return (self.lambda1 + self.lambda2) / 2
        return self.rate_param

    def second_moment(self) -> float:
        if self.family == "bernoulli":
            return self.rate_param
        if self.family == "constant":
            return self.rate_param ** 2
        l1, l2 = self.lambda1, self.lambda2
        return 0.5 * (l1 + l1 * l1) + 0.5 * (l2 + l2 * l2)

    def variance(self) -> float:
        return self.second_moment() - self.rate() ** 2

    @property
    def a_max(self) -> float:
        """Bound with a_max**2 >= E[A**2]."""
        if self.family == "bernoulli":
            return 1.0
        return math.sqrt(self.second_moment())

    def draw(self, gen: np.random.Generator, n: int) -> np.ndarray:
        if self.family == "bernoulli":
            return (gen.random(n) < self.rate_param).astype(np.int64)
        if self.family == "constant":
            return np.full(n, int(self.rate_param), dtype=np.int64)
        z = gen.random(n) < 0.5
        y1 = gen.poisson(self.lambda1, n)
        y2 = gen.poisson(self.lambda2, n)
        return np.where(z, y1, y2).astype(np.int64)


def _arrival_block(spec: ArrivalSpec, pair: Pair, slot_ns: float):
    def draw(streams: RngStreams, chunk: int):
        n = streams.chunk_slots
        counts = spec.draw(streams.generator("arrivals", pair, chunk), n)
        total = int(counts.sum())
        offsets = streams.generator("timestamps", pair, chunk).random(total) * slot_ns
        starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
        return counts, offsets, starts

    return draw


def sample_arrivals(
    spec: ArrivalSpec,
    t: int,
    streams: RngStreams,
    pair: Pair = (0, 1),
    slot_ns: float = 1000.0,
) -> tuple[int, list[float]]:
    """Request count of slot t for `pair` and their sorted offsets in
    [0, slot_ns)."""
    (counts, offsets, starts), k = streams.block(
        "arrivals", pair, t, _arrival_block(spec, pair, slot_ns)
    )
    count = int(counts[k])
    if count == 0:
        return 0, []
    start = int(starts[k])
    return count, sorted(offsets[start:start + count].tolist())


class ArrivalProcess:
    """Arrival specs for every unordered pair of a switch."""

    def __init__(self, specs: dict[Pair, ArrivalSpec]):
        self.specs = {pair: spec for pair, spec in specs.items() if not _is_silent(spec)}
        self._all = specs

    @classmethod
    def from_rates(
        cls,
        rates: RateMatrix,
        family: str = "bernoulli",
        spread: float = 0.5,
    ) -> "ArrivalProcess":
        specs = {}
        for pair, lam in rates.pairs():
            if family == "bernoulli":
                specs[pair] = ArrivalSpec.bernoulli(lam)
            elif family == "mixed_poisson":
                specs[pair] = ArrivalSpec.mixed_poisson_rate(lam, spread)
            elif family == "constant":
                specs[pair] = ArrivalSpec.constant(int(round(lam)))
            else:
                raise ConfigError(f"unknown arrival family {family!r}")
        return cls(specs)

    def rates(self, K: int) -> RateMatrix:
        lam = np.zeros((K, K))
        for (i, j), spec in self._all.items():
            lam[i, j] = lam[j, i] = spec.rate()
        return RateMatrix(lam)

    def spec(self, pair: Pair) -> Optional[ArrivalSpec]:
        return self._all.get(pair)

    def sample(self, t: int, streams: RngStreams, slot_ns: float) -> list[tuple[float, Pair]]:
        """All arrivals of slot t as (offset_ns, pair), in time order."""
        events = []
        for pair, spec in self.specs.items():
            count, offsets = sample_arrivals(spec, t, streams, pair, slot_ns)
            if count:
                events.extend((off, pair) for off in offsets)
        events.sort()
        return events


def _is_silent(spec: ArrivalSpec) -> bool:
    return spec.rate() == 0.0
