"""Tests for Phase 7: stability diagnostics."""

import numpy as np
import pytest

from src.analysis import (
    VerdictThresholds,
    backlog_slope,
    default_V_grid,
    drift_estimate,
    empirical_g,
    littles_law_check,
    locate_knee,
    stability_report,
    stability_verdict,
)
from src.engine import run
from src.models.errors import InsufficientTraceError
from src.models.switch import Request
from tests.helpers import make_config


class TestEmpiricalG:
    """Tests for the tail-fraction estimate."""

    def test_zero_trace(self):
        """An all-zero trace never exceeds any V >= 0."""
        assert not empirical_g(np.zeros(50), [0, 1, 10]).any()

    def test_direct_count(self):
        """[0, 5, 0, 5] exceeds 3 half of the time."""
        assert empirical_g([0, 5, 0, 5], [3])[0] == 0.5

    def test_strict_inequality(self):
        """Values equal to V do not count."""
        assert empirical_g([3, 3, 4], [3])[0] == pytest.approx(1 / 3)

    def test_per_pair(self):
        """A (slots, pairs) trace gives one curve per pair."""
        trace = np.array([[0, 2], [1, 2], [4, 0]])
        g = empirical_g(trace, [0, 1])
        assert g.shape == (2, 2)
        assert g[:, 0].tolist() == pytest.approx([2 / 3, 1 / 3])
        assert g[:, 1].tolist() == pytest.approx([2 / 3, 2 / 3])

    def test_nonincreasing_in_V(self):
        """The curve never rises with V."""
        trace = np.random.default_rng(1).integers(0, 30, 500)
        g = empirical_g(trace, default_V_grid(trace))
        assert np.all(np.diff(g) <= 0)
        assert g[-1] == 0.0

    def test_empty_trace(self):
        """An empty trace cannot be summarized."""
        with pytest.raises(InsufficientTraceError):
            empirical_g([], [1])


class TestDrift:
    """Tests for the sampled drift estimator."""

    def test_constant_trace(self):
        """A constant trace has zero drift."""
        est = drift_estimate(np.full(30, 7.0), 3)
        assert not est.samples.any()
        assert est.mean == 0.0

    def test_quadratic_of_ramp(self):
        """U(t) = t with T=2 gives samples 4t + 4."""
        t = np.arange(20, dtype=float)
        est = drift_estimate(t, 2, "quadratic")
        assert est.starts.tolist() == list(range(0, 18, 2))
        assert est.samples.tolist() == [4 * s + 4 for s in est.starts]
        assert est.intercept == pytest.approx(4.0)
        assert est.theta.tolist() == pytest.approx([-4.0])

    def test_linear_of_ramp(self):
        """The linear potential of a ramp grows by T per sample."""
        est = drift_estimate(np.arange(40, dtype=float), 5, "linear")
        assert np.all(est.samples == 5)
        assert est.high_backlog_mean == 5.0

    def test_multi_pair(self):
        """Quadratic potential sums over pairs."""
        trace = np.array([[0, 1], [1, 1], [2, 1]], dtype=float)
        est = drift_estimate(trace, 1)
        assert est.samples.tolist() == [1.0, 3.0]

    def test_too_short(self):
        """T must fit in the trace."""
        with pytest.raises(InsufficientTraceError):
            drift_estimate(np.arange(3), 3)

    def test_unknown_potential(self):
        """Only quadratic and linear potentials exist."""
        with pytest.raises(ValueError):
            drift_estimate(np.arange(10), 1, "cubic")


class TestLittlesLaw:
    """Tests for the backlog versus throughput x latency check."""

    def test_hand_example(self):
        """One request waiting two slots in a four-slot window."""
        req = Request(0, (0, 1), 100.0, 0, served_ns=2000.0, served_slot=2)
        report = littles_law_check([req], [0, 1, 1, 0])
        assert report.mean_latency_slots == 2.0
        assert report.rate == 0.25
        assert report.mean_queue == 0.5
        assert report.ratio == pytest.approx(1.0)

    def test_nothing_served(self):
        """No served requests leave every metric absent."""
        report = littles_law_check([], [0, 0, 0])
        assert report.to_dict() == {"mean_latency_slots": None, "mean_queue": None, "rate": None, "ratio": None}

    def test_holds_on_a_run(self):
        """Queued requests satisfy Little's law up to window edges."""
        config = make_config(
            switch={"K": 3, "p": 0.9, "q": 0.9},
            arrivals={"rate": 0.1},
            protocol={"name": "maxweight", "T0": 5},
            run={"horizon_slots": 5000, "seed": 3},
        )
        result = run(config)
        report = littles_law_check(result.served, result.backlog(), result.warmup)
        assert report.mean_latency_slots > 1
        assert report.ratio == pytest.approx(1.0, abs=0.05)


class TestSlopeAndVerdict:
    """Tests for the growth test and the verdict rules."""

    def test_flat_trace(self):
        """A constant backlog has slope 0 with a degenerate interval."""
        slope = backlog_slope(np.full(400, 3.0))
        assert slope.slope == 0.0
        assert slope.contains_zero()

    def test_ramp(self):
        """A ramp has slope one."""
        slope = backlog_slope(np.arange(400, dtype=float))
        assert slope.slope == pytest.approx(1.0)
        assert slope.ci_low > 0
        assert slope.window == (200, 400)

    def test_too_short(self):
        """Fewer than two slots per batch is refused."""
        with pytest.raises(InsufficientTraceError):
            backlog_slope(np.zeros(30))

    def test_zero_backlog_is_stable(self):
        """A run that never queues anything is stable."""
        verdict, _, g_stable, _ = stability_verdict(np.zeros(1000), np.zeros((1000, 3)))
        assert verdict == "stable"
        assert g_stable == 0.0

    def test_growing_backlog_is_unstable(self):
        """A backlog that keeps growing past V=100 is unstable."""
        ramp = np.arange(2000, dtype=float)
        verdict, slope, _, g_unstable = stability_verdict(ramp, ramp[:, None])
        assert verdict == "unstable"
        assert g_unstable > 0.9

    def test_flat_but_heavy_tail_is_inconclusive(self):
        """No trend but frequent excursions give neither verdict."""
        trace = np.tile([0.0] * 15 + [100.0], 200)
        verdict, *_ = stability_verdict(trace, trace[:, None])
        assert verdict == "inconclusive"

    def test_custom_thresholds(self):
        """Looser thresholds can flip an inconclusive trace to stable."""
        trace = np.tile([0.0] * 15 + [100.0], 200)
        loose = VerdictThresholds(stable_g=0.5)
        verdict, *_ = stability_verdict(trace, trace[:, None], loose)
        assert verdict == "stable"

    def test_small_steady_trend_is_not_flat(self):
        """A slow but steady climb is never called stable, however small
        the slope."""
        trace = 1e-4 * np.arange(4000, dtype=float)
        verdict, slope, *_ = stability_verdict(trace, trace[:, None])
        assert abs(slope.slope) < 1e-3
        assert slope.ci_low > 0
        assert verdict == "inconclusive"

    def test_v_max_sets_unstable_level(self):
        """A ramp that never reaches v_max is not called unstable."""
        ramp = np.arange(2000, dtype=float)
        verdict, *_ = stability_verdict(ramp, ramp[:, None], VerdictThresholds(v_max=5000))
        assert verdict == "inconclusive"

    def test_report_reads_config_thresholds(self):
        """The report takes its thresholds from the run config."""
        config = make_config(arrivals={"rate": 0.0}, run={"horizon_slots": 500})
        assert stability_report(run(config)) is not None
        strict = config.model_copy(update={"verdict": VerdictThresholds(batches=250)})
        assert stability_report(run(strict)) is None

    def test_report_on_zero_arrival_run(self):
        """A zero-arrival run is reported stable."""
        config = make_config(arrivals={"rate": 0.0}, run={"horizon_slots": 500})
        report = stability_report(run(config))
        assert report.verdict == "stable"
        assert report.g.shape[1] == 3
        doc = report.to_dict()
        assert doc["verdict"] == "stable"
        assert doc["littles_law"]["ratio"] is None

    def test_report_needs_window(self):
        """Too short a post-warm-up window gives no report."""
        assert stability_report(run(make_config(run={"horizon_slots": 30}))) is None

    @pytest.mark.slow
    def test_outside_region_is_unstable(self):
        """lambda=0.25 on K=5 grows without bound under on-demand."""
        config = make_config(
            switch={"K": 5, "p": 0.9, "q": 0.9},
            arrivals={"rate": 0.25},
            run={"horizon_slots": 20_000, "seed": 1, "trace_detail": "summary"},
        )
        assert stability_report(run(config)).verdict == "unstable"

    @pytest.mark.slow
    def test_half_load_is_stable(self):
        """Half the boundary load settles under on-demand."""
        config = make_config(
            switch={"K": 5, "p": 0.9, "q": 0.9},
            arrivals={"rate": 0.1},
            run={"horizon_slots": 20_000, "seed": 1, "trace_detail": "summary"},
        )
        assert stability_report(run(config)).verdict == "stable"


def on_demand_run(K: int, rate: float, seed: int, horizon: int = 20_000):
    config = make_config(
        switch={"K": K, "p": 0.9, "q": 0.9},
        arrivals={"rate": rate},
        run={"horizon_slots": horizon, "seed": seed, "trace_detail": "summary"},
    )
    return run(config)


@pytest.mark.slow
class TestLongRunBehavior:
    """Tests for drift, verdict order and growth rate over long on-demand runs."""

    def test_drift_negative_at_high_backlog(self):
        """Once the backlog is in its top decile it tends to shrink."""
        result = on_demand_run(5, 0.1, seed=2)
        u = result.U[result.slots >= result.warmup]
        est = drift_estimate(u, 1, "linear")
        assert est.high_backlog_mean < 0

    def test_verdict_monotone_in_load(self):
        """On the same seed a heavier load is never judged more stable."""
        order = {"unstable": 0, "inconclusive": 1, "stable": 2}
        boundary = 0.9 * 0.9 / 2
        for seed in range(3):
            verdicts = [
                stability_report(on_demand_run(3, scale * boundary, seed)).verdict
                for scale in (0.5, 0.8, 1.25, 1.5)
            ]
            ranks = [order[v] for v in verdicts]
            assert ranks == sorted(ranks, reverse=True), f"seed {seed}: {verdicts}"

    def test_growth_tracks_deficit(self):
        """Outside the region the backlog grows at least half as fast as
        arrivals exceed the best service rate."""
        K, rate, p, q = 5, 0.25, 0.9, 0.9
        result = on_demand_run(K, rate, seed=1)
        # uniform rates: the best flow fills every interface
        deficit = rate * K * (K - 1) / 2 - q * p * K / 2
        assert deficit == pytest.approx(0.475)
        slope = backlog_slope(result.backlog()[result.warmup:])
        assert slope.slope >= 0.5 * deficit


class TestLocateKnee:
    """Tests for the latency knee finder."""

    def test_unbounded_to_finite(self):
        """A drop from an unbounded latency is the steepest."""
        assert locate_knee([1, 2, 5, 10], [None, 50.0, 10.0, 9.0]) == 2

    def test_largest_drop(self):
        """The largest drop wins."""
        assert locate_knee([0.1, 0.2, 0.3, 0.4], [100.0, 80.0, 8.0, 7.0]) == 0.3

    def test_vanishing_tail_does_not_win(self):
        """Latency falling from 0.004 to 0 is no knee next to a collapse
        from 508 to 36 slots."""
        grid = [round(0.2 + 0.05 * k, 2) for k in range(8)]
        latency = [855.07, 708.09, 508.74, 35.7, 0.16, 0.004, 0.0, 0.0]
        assert locate_knee(grid, latency) == 0.35

    def test_unsorted_grid(self):
        """Values are sorted before looking for the drop."""
        assert locate_knee([10, 1, 5, 2], [9.0, float("inf"), 10.0, 50.0]) == 2

    def test_single_point(self):
        """One grid point has no knee."""
        assert locate_knee([1], [5.0]) is None

    def test_length_mismatch(self):
        """Values and latencies must pair up."""
        with pytest.raises(ValueError):
            locate_knee([1, 2], [1.0])
