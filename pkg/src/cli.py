#!/usr/bin/env python3
"""
qswitch - star-switch entanglement swapping simulator.

Verbs:
    capacity  capacity-region report for a config
    run       one simulation, result files into --out
    sweep     one parameter over a value list and several seeds
    preset    a named experiment (tables and figure curves)

Exit codes: 0 success, 1 invalid input, 2 contract violation during a run.
"""

import argparse
import asyncio
import logging
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

# Add src to path for imports
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from dotenv import load_dotenv
from rich.console import Console
from rich.progress import BarColumn, Progress, SpinnerColumn, TaskProgressColumn, TextColumn
from rich.table import Table

from src.analysis.stability import stability_report
from src.capacity.region import boundary_q, never_stable, region_membership
from src.engine.outputs import write_csv, write_run_outputs
from src.engine.simulator import run
from src.experiments.presets import PRESETS, SWEEP_PARAMS, PresetRun, get_preset, sweep_runs
from src.models.config import RunConfig, load_config
from src.models.errors import ConfigError, ContractViolation, SwitchError, T0SelectionError
from src.models.switch import node_pairs
from src.orchestrator import RunSummary, preset_frame, run_batch, sweep_frame

load_dotenv()

console = Console()
logger = logging.getLogger("qswitch-cli")

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_CONTRACT = 2


def setup_logging(level: Optional[str] = None) -> None:
    level = (level or os.getenv("QSWITCH_LOG_LEVEL") or "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format='%(asctime)s [%(levelname)s] %(name)s: %(message)s',
        datefmt='%H:%M:%S',
    )


def results_dir(out: Optional[str], default_name: str) -> Path:
    if out:
        return Path(out)
    return Path(os.getenv("QSWITCH_RESULTS_DIR", "results")) / default_name


def default_jobs() -> int:
    try:
        return max(1, int(os.getenv("QSWITCH_JOBS", "1")))
    except ValueError:
        return 1


def _fmt(x: Optional[float], spec: str = ".4f") -> str:
    return "-" if x is None or x != x else format(x, spec)


def _load(args) -> RunConfig:
    config = load_config(args.config)
    if getattr(args, "seed", None) is not None:
        config = config.with_seed(args.seed)
    if getattr(args, "horizon", None) is not None:
        config = config.model_copy(
            update={"run": config.run.model_copy(update={"horizon_slots": args.horizon})}
        )
    return config


def cmd_capacity(args) -> int:
    config = load_config(args.config)
    params = config.switch.to_params()
    rates = config.arrivals.rate_matrix(params.K)
    report = region_membership(rates, params)
    q_star = boundary_q(rates, params)

    color = {"inside": "green", "boundary": "yellow", "outside": "red"}[report.verdict]
    console.print(f"[bold]Verdict:[/bold] [{color}]{report.verdict}[/{color}]")
    console.print(f"[bold]Margin:[/bold] {report.margin:.6g}")
    q_text = f"{q_star:.6g}" + (" (no q <= 1 supports these rates)" if never_stable(q_star) else "")
    console.print(f"[bold]Boundary q*:[/bold] {q_text}")
    if report.inside:
        console.print(f"[bold]Largest uniform slack:[/bold] {report.epsilon_max:.6g}")

    table = Table(title="Minimal swap flow lambda/q per slot", show_lines=True)
    table.add_column("pair", style="cyan")
    table.add_column("flow", justify="right")
    for i, j in node_pairs(params.K):
        table.add_row(f"{i}-{j}", f"{report.flow[i, j]:.6g}")
    console.print(table)
    return EXIT_OK


def cmd_run(args) -> int:
    config = _load(args)
    out = results_dir(args.out, "run")
    with console.status(f"Simulating {config.run.horizon_slots} slots..."):
        result = run(config)
        report = stability_report(result)
    write_run_outputs(result, out, report)
    verdict = report.verdict if report else "-"
    latency_us = None if result.mean_latency_ns is None else result.mean_latency_ns / 1000
    console.print(
        f"fidelity={_fmt(result.mean_fidelity)} latency_us={_fmt(latency_us, '.3f')} "
        f"backlog/pair={_fmt(result.mean_backlog_per_pair, '.3f')} served={result.served_after_warmup} "
        f"verdict={verdict}"
    )
    console.print(f"[dim]Results saved to: {out}[/dim]")
    return EXIT_OK


def _parse_values(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise ConfigError(f"--values must be a comma-separated list of numbers: {e}") from e


async def _run_with_progress(runs: list[PresetRun], jobs: int, title: str) -> list[RunSummary]:
    with Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        BarColumn(),
        TaskProgressColumn(),
        console=console,
    ) as progress:
        task = progress.add_task(f"[cyan]{title}", total=len(runs))

        def on_done(summary: RunSummary) -> None:
            if summary.error:
                progress.console.print(f"  [red]✗[/red] {summary.labels} ({summary.error[:60]})")
            progress.advance(task)

        return await run_batch(runs, jobs, on_done)


def _batch_exit(summaries: Sequence[RunSummary]) -> int:
    failed = [s for s in summaries if s.error]
    if not failed:
        return EXIT_OK
    console.print(f"[red]Failed: {len(failed)}/{len(summaries)} runs[/red]")
    return EXIT_CONTRACT if any(s.contract_violation for s in failed) else EXIT_INVALID


def _print_frame(df, title: str) -> None:
    table = Table(title=title, show_lines=False)
    for col in df.columns:
        table.add_column(str(col), justify="right" if col != "protocol" else "left")
    for row in df.itertuples(index=False):
        table.add_row(*[_fmt(v) if isinstance(v, float) else str(v) for v in row])
    console.print(table)


def cmd_sweep(args) -> int:
    if args.param not in SWEEP_PARAMS:
        raise ConfigError(f"unknown sweep parameter {args.param!r}; choose from {', '.join(SWEEP_PARAMS)}")
    config = _load(args)
    runs = sweep_runs(config, args.param, _parse_values(args.values), args.seeds)
    summaries = asyncio.run(_run_with_progress(runs, args.jobs, f"Sweeping {args.param} ({len(runs)} runs)"))
    out = results_dir(args.out, f"sweep_{args.param}")
    out.mkdir(parents=True, exist_ok=True)
    df = sweep_frame(summaries)
    write_csv(df, out / "sweep.csv")
    _print_frame(df, f"Sweep over {args.param}")
    console.print(f"[dim]Results saved to: {out / 'sweep.csv'}[/dim]")
    return _batch_exit(summaries)


def cmd_preset(args) -> int:
    preset = get_preset(args.name)
    runs = preset.runs(args.seed or 0, args.horizon)
    summaries = asyncio.run(_run_with_progress(runs, args.jobs, f"{preset.name} ({len(runs)} runs)"))
    out = results_dir(args.out, preset.name)
    out.mkdir(parents=True, exist_ok=True)
    df = preset_frame(summaries, preset.columns)
    write_csv(df, out / f"{preset.name}.csv")
    _print_frame(df, preset.description)
    console.print(f"[dim]Results saved to: {out / (preset.name + '.csv')}[/dim]")
    return _batch_exit(summaries)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qswitch", description="Quantum switch swapping simulator")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING (default from QSWITCH_LOG_LEVEL)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("capacity", help="capacity-region report")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("run", help="simulate one config")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--horizon", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="sweep one parameter")
    p.add_argument("--config", required=True)
    p.add_argument("--param", required=True, help=", ".join(SWEEP_PARAMS))
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--seeds", type=int, default=1)
    p.add_argument("--seed", type=int)
    p.add_argument("--horizon", type=int)
    p.add_argument("--jobs", type=int, default=default_jobs())
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("preset", help="run a named experiment")
    p.add_argument("name", help=", ".join(PRESETS))
    p.add_argument("--seed", type=int)
    p.add_argument("--horizon", type=int)
    p.add_argument("--jobs", type=int, default=default_jobs())
    p.add_argument("--out")
    p.set_defaults(func=cmd_preset)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level)
    try:
        return args.func(args)
    except (ConfigError, T0SelectionError) as e:
        console.print(f"[red]Error:[/red] {e}")
        return EXIT_INVALID
    except ContractViolation as e:
        console.print(f"[red]Contract violation:[/red] {e}")
        return EXIT_CONTRACT
    except SwitchError as e:
        console.print(f"[red]Error:[/red] {e}")
        return EXIT_CONTRACT
    except OSError as e:
        console.print(f"[red]IO error:[/red] {e}")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
