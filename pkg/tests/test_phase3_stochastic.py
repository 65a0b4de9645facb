"""Tests for Phase 3: random streams, arrivals, generation and swaps."""

import numpy as np
import pytest

from src.models.errors import ConfigError
from src.models.switch import RateMatrix, SwitchParams
from src.stochastic import (
    ArrivalProcess,
    ArrivalSpec,
    RngStreams,
    sample_arrivals,
    sample_link_generation,
    sample_swap_outcomes,
    swap_trial,
)
from tests.helpers import sym


class TestRngStreams:
    """Tests for seeded substreams."""

    def test_same_key_same_stream(self):
        """Equal (seed, kind, index, chunk) keys give equal draws."""
        a = RngStreams(42).generator("arrivals", (0, 1), 3).random(5)
        b = RngStreams(42).generator("arrivals", (0, 1), 3).random(5)
        assert np.array_equal(a, b)

    def test_different_keys_differ(self):
        """Pair, kind and seed all change the stream."""
        s = RngStreams(42)
        base = s.generator("arrivals", (0, 1)).random(5)
        assert not np.array_equal(base, s.generator("arrivals", (0, 2)).random(5))
        assert not np.array_equal(base, s.generator("channel", (0, 1)).random(5))
        assert not np.array_equal(base, RngStreams(43).generator("arrivals", (0, 1)).random(5))

    def test_sequential_is_shared(self):
        """Sequential generators continue where the last caller stopped."""
        s = RngStreams(1)
        first = s.sequential("swap").random()
        second = s.sequential("swap").random()
        fresh = RngStreams(1).generator("swap").random(2)
        assert [first, second] == fresh.tolist()

    def test_seed_range(self):
        """Seeds must fit in 64 unsigned bits."""
        with pytest.raises(ValueError):
            RngStreams(-1)
        with pytest.raises(ValueError):
            RngStreams(2**64)
        RngStreams(2**64 - 1)


class TestArrivals:
    """Tests for arrival laws and sampling."""

    def test_constant_zero(self):
        """Constant(0) never produces a request."""
        assert sample_arrivals(ArrivalSpec.constant(0), 5, RngStreams(0)) == (0, [])

    def test_constant_count(self):
        """Constant(3) produces three sorted offsets inside the slot."""
        count, offsets = sample_arrivals(ArrivalSpec.constant(3), 7, RngStreams(0), slot_ns=1000.0)
        assert count == 3
        assert offsets == sorted(offsets)
        assert all(0.0 <= x < 1000.0 for x in offsets)

    def test_mixed_poisson_mean(self):
        """Mixture of Poisson(0.1) and Poisson(0.3) averages 0.2."""
        spec = ArrivalSpec.mixed_poisson(0.1, 0.3)
        draws = spec.draw(np.random.default_rng(2024), 10**6)
        sigma = np.sqrt(spec.variance())
        assert spec.rate() == pytest.approx(0.2)
        assert abs(draws.mean() - 0.2) <= 3 * sigma / 1000

    def test_mixed_poisson_moments(self):
        """Second moment and variance of the mixture."""
        spec = ArrivalSpec.mixed_poisson(0.1, 0.3)
        assert spec.second_moment() == pytest.approx(0.25)
        assert spec.variance() == pytest.approx(0.21)
        assert spec.a_max == pytest.approx(0.5)

    def test_mixed_poisson_from_rate(self):
        """A spread of 0.5 puts the components at half and 1.5 times the rate."""
        spec = ArrivalSpec.mixed_poisson_rate(0.2, 0.5)
        assert (spec.lambda1, spec.lambda2) == pytest.approx((0.1, 0.3))

    def test_bernoulli_rate_checked(self):
        """Bernoulli rates above one are rejected."""
        with pytest.raises(ConfigError):
            ArrivalSpec.bernoulli(1.5)

    def test_bernoulli_empirical_rate(self):
        """Sampled Bernoulli counts match the rate."""
        streams = RngStreams(9)
        spec = ArrivalSpec.bernoulli(0.3)
        counts = [sample_arrivals(spec, t, streams)[0] for t in range(20_000)]
        assert set(counts) <= {0, 1}
        assert np.mean(counts) == pytest.approx(0.3, abs=0.015)

    def test_sampling_is_addressable_by_slot(self):
        """A slot's arrivals do not depend on which slots were sampled before."""
        spec = ArrivalSpec.mixed_poisson(0.5, 1.5)
        s1 = RngStreams(5)
        forward = [sample_arrivals(spec, t, s1) for t in range(2100)]
        s2 = RngStreams(5)
        assert sample_arrivals(spec, 2050, s2) == forward[2050]
        assert sample_arrivals(spec, 3, s2) == forward[3]

    def test_process_skips_silent_pairs(self):
        """Zero-rate pairs produce no arrivals but keep their rate."""
        lam = sym(3, {(0, 1): 0.5}, dtype=float)
        process = ArrivalProcess.from_rates(RateMatrix(lam))
        assert list(process.specs) == [(0, 1)]
        assert process.rates(3) == RateMatrix(lam)
        events = [e for t in range(200) for e in process.sample(t, RngStreams(0), 1000.0)]
        assert events and all(pair == (0, 1) for _, pair in events)

    def test_process_events_time_ordered(self):
        """Arrivals of one slot come back in time order."""
        process = ArrivalProcess.from_rates(RateMatrix.uniform(4, 1.0), "mixed_poisson")
        events = process.sample(0, RngStreams(3), 1000.0)
        assert [off for off, _ in events] == sorted(off for off, _ in events)

    def test_unknown_family(self):
        """Unknown families are rejected."""
        with pytest.raises(ConfigError):
            ArrivalProcess.from_rates(RateMatrix.uniform(2, 0.1), "geometric")


class TestChannel:
    """Tests for link generation and swap outcomes."""

    def test_generation_extremes(self):
        """p=0 never generates, p=1 always does."""
        sp = SwitchParams(K=2, p=(0.0, 1.0), q=0.9)
        streams = RngStreams(0)
        draws = np.array([sample_link_generation(sp, streams, t) for t in range(300)])
        assert np.all(draws[:, 0] == 0)
        assert np.all(draws[:, 1] == 1)

    def test_generation_rate(self):
        """Per-interface success frequency matches p."""
        sp = SwitchParams(K=3, p=(0.2, 0.5, 0.9), q=0.9)
        streams = RngStreams(17)
        draws = np.array([sample_link_generation(sp, streams, t) for t in range(10_000)])
        assert draws.mean(axis=0) == pytest.approx([0.2, 0.5, 0.9], abs=0.02)

    def test_generation_deterministic(self):
        """Same seed, same generation trace."""
        sp = SwitchParams(K=4, p=(0.5,), q=0.9)
        a = [sample_link_generation(sp, RngStreams(8), t).tolist() for t in range(50)]
        b = [sample_link_generation(sp, RngStreams(8), t).tolist() for t in range(50)]
        assert a == b

    def test_swap_certain(self):
        """q=1 turns every attempt into a success."""
        F = sym(3, {(0, 1): 2, (1, 2): 1})
        out = sample_swap_outcomes(1.0, F, RngStreams(0))
        assert np.array_equal(out.R, F)
        assert out.attempts == {(0, 1): [True, True], (1, 2): [True]}

    def test_swap_impossible(self):
        """q=0 never succeeds."""
        F = sym(3, {(0, 1): 4})
        out = sample_swap_outcomes(0.0, F, RngStreams(0))
        assert not out.R.any()

    def test_swap_success_rate(self):
        """Successes over many attempts match q."""
        F = sym(2, {(0, 1): 20_000})
        out = sample_swap_outcomes(0.7, F, RngStreams(4))
        assert out.R[0, 1] / 20_000 == pytest.approx(0.7, abs=0.02)
        assert out.R[0, 1] == out.R[1, 0]

    def test_swap_stream_leaves_arrivals_alone(self):
        """Consuming swap draws does not shift arrival or generation draws."""
        sp = SwitchParams(K=3, p=(0.5,), q=0.5)
        spec = ArrivalSpec.bernoulli(0.4)
        quiet, busy = RngStreams(12), RngStreams(12)
        for t in range(100):
            for _ in range(5):
                swap_trial(0.5, busy)
            assert sample_arrivals(spec, t, quiet) == sample_arrivals(spec, t, busy)
            assert np.array_equal(sample_link_generation(sp, quiet, t), sample_link_generation(sp, busy, t))
