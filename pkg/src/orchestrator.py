"""
Orchestrator - runs batches of simulations for sweeps and presets.

Runs execute in a process pool driven from asyncio (inline when jobs=1).
Each run reports a RunSummary; a failed run carries its error instead of
aborting the batch. Summaries come back in submission order whatever
order the runs finish in, so the collector writes deterministic files.
"""

import asyncio
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import pandas as pd

from .analysis.stability import stability_report
from .engine.simulator import run
from .experiments.presets import PresetRun
from .models.config import RunConfig
from .models.errors import ContractViolation, SwitchError

logger = logging.getLogger("qswitch-orchestrator")


@dataclass
class RunSummary:
    """Aggregates of one run in a batch."""
    index: int
    labels: dict
    seed: int
    mean_fidelity: Optional[float] = None
    mean_latency_ns: Optional[float] = None
    mean_latency_slots: Optional[float] = None
    mean_backlog_per_pair: Optional[float] = None
    stability_verdict: Optional[str] = None
    discards: dict = field(default_factory=dict)
    duration_s: float = 0.0
    error: Optional[str] = None
    contract_violation: bool = False

    @property
    def mean_latency_us(self) -> Optional[float]:
        return None if self.mean_latency_ns is None else self.mean_latency_ns / 1000.0

    def row(self) -> dict:
        return {
            **self.labels,
            "seed": self.seed,
            "mean_fidelity": self.mean_fidelity,
            "mean_latency_ns": self.mean_latency_ns,
            "mean_latency_us": self.mean_latency_us,
            "mean_latency_slots": self.mean_latency_slots,
            "mean_backlog_per_pair": self.mean_backlog_per_pair,
            "stability_verdict": self.stability_verdict,
            "error": self.error,
        }


def execute(index: int, labels: dict, config_json: str) -> RunSummary:
    """Run one config and summarize it. Top-level so worker processes can
    unpickle it; the config travels as JSON."""
    config = RunConfig.model_validate_json(config_json)
    start = time.perf_counter()
    try:
        result = run(config)
        report = stability_report(result)
    except SwitchError as e:
        logger.warning(f"Run {index} {labels} failed: {e}")
        return RunSummary(
            index,
            labels,
            config.run.seed,
            duration_s=time.perf_counter() - start,
            error=f"{type(e).__name__}: {e}",
            contract_violation=isinstance(e, ContractViolation),
        )
    return RunSummary(
        index=index,
        labels=labels,
        seed=config.run.seed,
        mean_fidelity=result.mean_fidelity,
        mean_latency_ns=result.mean_latency_ns,
        mean_latency_slots=result.mean_latency_slots,
        mean_backlog_per_pair=result.mean_backlog_per_pair,
        stability_verdict=report.verdict if report else None,
        discards=result.discard_totals,
        duration_s=time.perf_counter() - start,
    )


async def run_batch(
    runs: Sequence[PresetRun],
    jobs: int = 1,
    on_done: Optional[Callable[[RunSummary], None]] = None,
) -> list[RunSummary]:
    """Run every config, at most `jobs` at a time.

    on_done is called in the event loop as each run finishes (progress
    reporting); the returned list is ordered like `runs`.
    """
    logger.info(f"Batch of {len(runs)} runs with jobs={jobs}")
    summaries: list[RunSummary] = []
    if jobs <= 1:
        for i, r in enumerate(runs):
            summary = execute(i, r.labels, r.config.to_json())
            summaries.append(summary)
            if on_done:
                on_done(summary)
            await asyncio.sleep(0)
        return summaries

    loop = asyncio.get_running_loop()
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        tasks = [
            loop.run_in_executor(pool, execute, i, r.labels, r.config.to_json())
            for i, r in enumerate(runs)
        ]
        for coro in asyncio.as_completed(tasks):
            summary = await coro
            summaries.append(summary)
            if on_done:
                on_done(summary)
    summaries.sort(key=lambda s: s.index)
    return summaries


SWEEP_COLUMNS = ["value", "seed", "mean_fidelity", "mean_latency_ns", "stability_verdict"]


def _common_verdict(verdicts: pd.Series) -> Optional[str]:
    values = set(verdicts.dropna())
    if not values:
        return None
    return values.pop() if len(values) == 1 else "mixed"


def sweep_frame(summaries: Sequence[RunSummary]) -> pd.DataFrame:
    """One row per (value, seed) followed by a mean row per value."""
    if not summaries:
        return pd.DataFrame(columns=SWEEP_COLUMNS)
    raw = pd.DataFrame([s.row() for s in summaries])
    rows = []
    for value, group in raw.groupby("value", sort=False):
        rows.extend(group[SWEEP_COLUMNS].to_dict("records"))
        rows.append({
            "value": value,
            "seed": "mean",
            "mean_fidelity": pd.to_numeric(group["mean_fidelity"], errors="coerce").mean(),
            "mean_latency_ns": pd.to_numeric(group["mean_latency_ns"], errors="coerce").mean(),
            "stability_verdict": _common_verdict(group["stability_verdict"]),
        })
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)


def preset_frame(summaries: Sequence[RunSummary], columns: Sequence[str]) -> pd.DataFrame:
    return pd.DataFrame([s.row() for s in summaries], columns=list(columns))
