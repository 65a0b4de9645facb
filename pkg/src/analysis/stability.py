"""
Finite-horizon stability diagnostics over completed traces.

The verdict thresholds are engineering heuristics, not guarantees: a run is
called stable when its backlog shows no significant trend and rarely
exceeds ten times its mean, unstable when the backlog grows and spends a
large share of the window above a fixed level.
"""

import math
from dataclasses import asdict, dataclass, field
from typing import TYPE_CHECKING, Iterable, Optional, Sequence

import numpy as np
from scipy import stats

from ..models.config import VerdictThresholds
from ..models.errors import InsufficientTraceError
from ..models.switch import Request

if TYPE_CHECKING:
    from ..engine.simulator import RunResult

VERDICTS = ("stable", "unstable", "inconclusive")


def _as_2d(trace) -> np.ndarray:
    arr = np.asarray(trace, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValueError(f"trace must be 1-D or 2-D, got shape {arr.shape}")
    return arr


def empirical_g(trace, V_grid: Sequence[float]) -> np.ndarray:
    """Fraction of slots with backlog strictly above V, for every V.

    A 1-D trace gives one value per V; a (slots, pairs) trace gives a
    (len(V_grid), pairs) array.
    """
    arr = np.asarray(trace, dtype=float)
    if arr.shape[0] == 0:
        raise InsufficientTraceError("empirical g needs at least one slot")
    V = np.asarray(V_grid, dtype=float)
    if arr.ndim == 1:
        return (arr[None, :] > V[:, None]).mean(axis=1)
    return (arr[None, :, :] > V[:, None, None]).mean(axis=1)


def default_V_grid(trace, points: int = 64) -> np.ndarray:
    """Integer grid from 0 to one above the largest observed backlog."""
    top = int(np.max(trace)) + 1 if np.size(trace) else 1
    if top + 1 <= points:
        return np.arange(top + 1, dtype=float)
    return np.unique(np.round(np.linspace(0, top, points)))


@dataclass
class DriftEstimate:
    """Sampled T-step drift of a quadratic or linear potential.

    The affine fit models drift as intercept - theta . u(t); high_backlog_mean
    averages the samples whose starting backlog is above its 90th percentile.
    """

    T: int
    kind: str
    starts: np.ndarray
    samples: np.ndarray
    mean: float
    intercept: float
    theta: np.ndarray
    high_backlog_mean: float

    def to_dict(self) -> dict:
        return {
            "T": self.T,
            "kind": self.kind,
            "samples": int(self.samples.size),
            "mean": self.mean,
            "intercept": self.intercept,
            "theta": self.theta.tolist(),
            "high_backlog_mean": self.high_backlog_mean,
        }


def _potential(u: np.ndarray, kind: str) -> np.ndarray:
    if kind == "quadratic":
        return (u * u).sum(axis=1)
    if kind == "linear":
        return u.sum(axis=1)
    raise ValueError(f"unknown potential {kind!r}")


def drift_estimate(trace, T: int, kind: str = "quadratic") -> DriftEstimate:
    """L(U(t+T)) - L(U(t)) at t = 0, T, 2T, ... with an affine fit."""
    u = _as_2d(trace)
    if T < 1:
        raise ValueError(f"T must be positive, got {T}")
    if u.shape[0] <= T:
        raise InsufficientTraceError(f"trace of {u.shape[0]} slots is too short for T={T}")
    L = _potential(u, kind)
    starts = np.arange(0, u.shape[0] - T, T)
    samples = L[starts + T] - L[starts]

    X = np.hstack([np.ones((starts.size, 1)), u[starts]])
    coef, *_ = np.linalg.lstsq(X, samples, rcond=None)
    level = u[starts].sum(axis=1)
    cut = np.percentile(level, 90)
    high = samples[level > cut]
    if high.size == 0:
        high = samples[level >= cut]
    return DriftEstimate(
        T=T,
        kind=kind,
        starts=starts,
        samples=samples,
        mean=float(samples.mean()),
        intercept=float(coef[0]),
        theta=-coef[1:],
        high_backlog_mean=float(high.mean()),
    )


@dataclass
class LittleLawReport:
    mean_latency_slots: Optional[float] = None
    mean_queue: Optional[float] = None
    rate: Optional[float] = None
    ratio: Optional[float] = None

    def to_dict(self) -> dict:
        return asdict(self)


def littles_law_check(served: Iterable[Request], backlog, start: int = 0) -> LittleLawReport:
    """Compare the time-average backlog with throughput x mean latency over
    slots [start, len(backlog)). Requests count when they arrived inside
    the window and were served."""
    backlog = np.asarray(backlog, dtype=float)
    window = backlog.size - start
    done = [
        r for r in served
        if r.served_slot is not None and start <= r.arrival_slot < backlog.size
    ]
    if not done or window <= 0:
        return LittleLawReport()
    latency = float(np.mean([r.latency_slots for r in done]))
    rate = len(done) / window
    mean_queue = float(backlog[start:].mean())
    expected = rate * latency
    ratio = mean_queue / expected if expected > 0 else None
    return LittleLawReport(latency, mean_queue, rate, ratio)


@dataclass
class SlopeTest:
    slope: float
    ci_low: float
    ci_high: float
    window: tuple[int, int]

    def contains_zero(self) -> bool:
        return self.ci_low <= 0.0 <= self.ci_high


def backlog_slope(backlog, batches: int = 20, confidence: float = 0.95) -> SlopeTest:
    """Least-squares slope of the backlog over the last half of the trace,
    fitted on batch means, with a t-based confidence interval."""
    backlog = np.asarray(backlog, dtype=float)
    n = backlog.size
    half = backlog[n // 2:]
    size = half.size // batches
    if size < 1:
        raise InsufficientTraceError(f"need at least {2 * batches} slots for the slope test, got {n}")
    used = half[: size * batches]
    means = used.reshape(batches, size).mean(axis=1)
    centers = n // 2 + size * np.arange(batches) + (size - 1) / 2
    if np.ptp(means) == 0:
        slope, stderr = 0.0, 0.0
    else:
        fit = stats.linregress(centers, means)
        slope, stderr = float(fit.slope), float(fit.stderr)
    half_width = stats.t.ppf(0.5 + confidence / 2, batches - 2) * stderr
    return SlopeTest(slope, slope - half_width, slope + half_width, (n // 2, n // 2 + size * batches))


@dataclass
class StabilityReport:
    """Stability evidence for one run.

    g holds one curve per pair over V_grid, computed on the post-warm-up
    window. g_stable is the largest pair value at V = v_multiple x mean
    backlog, g_unstable at V = v_max.
    """

    verdict: str
    pairs: list[tuple[int, int]]
    V_grid: np.ndarray
    g: np.ndarray
    slope: SlopeTest
    mean_backlog: float
    g_stable: float
    g_unstable: float
    drift: Optional[DriftEstimate] = None
    little: LittleLawReport = field(default_factory=LittleLawReport)
    horizon: int = 0
    warmup: int = 0

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "horizon_slots": self.horizon,
            "warmup_slots": self.warmup,
            "slope": self.slope.slope,
            "slope_ci": [self.slope.ci_low, self.slope.ci_high],
            "slope_window": list(self.slope.window),
            "mean_backlog": self.mean_backlog,
            "g_stable": self.g_stable,
            "g_unstable": self.g_unstable,
            "drift": self.drift.to_dict() if self.drift else None,
            "littles_law": self.little.to_dict(),
        }


def _max_g(pair_trace: np.ndarray, V: float) -> float:
    if pair_trace.size == 0:
        return 0.0
    return float(empirical_g(pair_trace, [V]).max())


def stability_verdict(
    backlog,
    pair_trace,
    thresholds: VerdictThresholds = VerdictThresholds(),
) -> tuple[str, SlopeTest, float, float]:
    """Classify a run as stable, unstable or inconclusive.

    backlog: total pending requests per slot. pair_trace: per-pair backlog,
    (slots, pairs). Returns the verdict with the slope test and the two g
    values it was based on.
    """
    backlog = np.asarray(backlog, dtype=float)
    u = _as_2d(pair_trace)
    slope = backlog_slope(backlog, thresholds.batches, thresholds.confidence)
    per_pair_mean = float(u.mean()) if u.size else 0.0
    g_stable = _max_g(u, max(thresholds.v_multiple * per_pair_mean, 1.0))
    g_unstable = _max_g(u, thresholds.v_max)

    if slope.contains_zero() and g_stable < thresholds.stable_g:
        verdict = "stable"
    elif slope.ci_low > 0 and g_unstable > thresholds.unstable_g:
        verdict = "unstable"
    else:
        verdict = "inconclusive"
    return verdict, slope, g_stable, g_unstable


def stability_report(
    result: "RunResult",
    thresholds: Optional[VerdictThresholds] = None,
    drift_T: int = 1,
) -> Optional[StabilityReport]:
    """Report over the post-warm-up window of a run, or None when the
    window is too short for the slope test. Thresholds default to the
    run config's `verdict` section."""
    if thresholds is None:
        thresholds = result.config.verdict
    start = result.warmup
    backlog = result.backlog()[start:]
    if backlog.size < 2 * thresholds.batches:
        return None
    keep = result.slots >= start
    u = result.U[keep]
    verdict, slope, g_stable, g_unstable = stability_verdict(backlog, u, thresholds)
    # drift_T counts recorded rows, i.e. drift_T * trace_stride slots
    drift = drift_estimate(u, drift_T, "linear") if u.shape[0] > drift_T else None
    grid = default_V_grid(u)
    return StabilityReport(
        verdict=verdict,
        pairs=result.pairs,
        V_grid=grid,
        g=empirical_g(u, grid) if u.shape[0] else np.zeros((grid.size, len(result.pairs))),
        slope=slope,
        mean_backlog=float(backlog.mean()),
        g_stable=g_stable,
        g_unstable=g_unstable,
        drift=drift,
        little=littles_law_check(result.served, result.backlog(), start),
        horizon=result.horizon,
        warmup=start,
    )


def locate_knee(values: Sequence[float], latencies: Sequence[Optional[float]]) -> Optional[float]:
    """Grid value right after the largest latency drop between neighbors.

    Drops are absolute, so a collapse from hundreds of slots outweighs a
    tail going from 0.004 to 0. Missing or infinite latencies count as
    unbounded; the first drop from one of them to a finite value wins.
    """
    if len(values) != len(latencies):
        raise ValueError("values and latencies differ in length")
    order = np.argsort(np.asarray(values, dtype=float), kind="stable")
    if order.size < 2:
        return None
    xs = [float(values[k]) for k in order]
    ys = [math.inf if latencies[k] is None or not math.isfinite(latencies[k]) else float(latencies[k]) for k in order]
    best, knee = -math.inf, None
    for a, b, x_next in zip(ys, ys[1:], xs[1:]):
        if math.isinf(a):
            drop = math.inf if math.isfinite(b) else 0.0
        else:
            drop = a - b
        if drop > best:
            best, knee = drop, x_next
    return knee
