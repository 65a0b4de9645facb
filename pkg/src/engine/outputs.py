"""
Result files of a run: summary.json plus slots.csv, served.csv,
discards.csv and g_curve.csv. Column layouts are documented in
docs/CONFIG.md; numbers use the C locale.
"""

import json
import math
from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd

from ..analysis.stability import StabilityReport
from ..capacity.region import boundary_q, region_membership
from ..models.switch import node_pairs
from .simulator import RunResult

FLOAT_FORMAT = "%.10g"
SERVED_COLUMNS = ["pair", "arrival_ns", "served_ns", "latency_ns", "latency_slots", "fidelity"]
DISCARD_COLUMNS = ["t", "cause", "count"]


def pair_name(pair) -> str:
    return f"{pair[0]}-{pair[1]}"


def json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return str(obj)


def _finite(x: Optional[float]) -> Optional[float]:
    return x if x is None or math.isfinite(x) else None


def write_csv(df: pd.DataFrame, path: Path) -> None:
    df.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


def slots_frame(result: RunResult) -> pd.DataFrame:
    pairs = [pair_name(p) for p in node_pairs(result.params.K)]
    cols = {"t": result.slots}
    blocks = [("U", result.U, pairs), ("E0", result.E0, range(result.params.K)),
              ("F", result.F, pairs), ("R", result.R, pairs)]
    for prefix, data, names in blocks:
        if data is None:
            continue
        for k, name in enumerate(names):
            cols[f"{prefix}_{name}"] = data[:, k]
    return pd.DataFrame(cols)


def served_frame(result: RunResult) -> pd.DataFrame:
    rows = [
        (pair_name(r.pair), r.arrival_ns, r.served_ns, r.latency_ns, r.latency_slots, r.served_fidelity)
        for r in result.served
    ]
    return pd.DataFrame(rows, columns=SERVED_COLUMNS)


def discards_frame(result: RunResult) -> pd.DataFrame:
    return pd.DataFrame(result.discards, columns=DISCARD_COLUMNS)


def g_curve_frame(report: Optional[StabilityReport], K: int) -> pd.DataFrame:
    columns = ["V"] + [f"g_{pair_name(p)}" for p in node_pairs(K)]
    if report is None:
        return pd.DataFrame(columns=columns)
    data = np.column_stack([report.V_grid, report.g])
    return pd.DataFrame(data, columns=columns)


def summary_document(result: RunResult, report: Optional[StabilityReport]) -> dict:
    rates = result.config.arrivals.rate_matrix(result.params.K)
    membership = region_membership(rates, result.params)
    q_star = boundary_q(rates, result.params)
    aggregates = result.aggregates()
    aggregates["mean_backlog"] = [[float(x) for x in row] for row in result.mean_backlog]
    return {
        "config": json.loads(result.config.to_json()),
        "capacity": {
            "verdict": membership.verdict,
            "margin": membership.margin,
            "boundary_q": _finite(q_star),
        },
        "protocol": {"T0": result.T0, "epsilon": result.epsilon},
        "aggregates": aggregates,
        "discards": result.discard_totals,
        "stability": report.to_dict() if report else None,
    }


def write_run_outputs(
    result: RunResult,
    out_dir: Union[str, Path],
    report: Optional[StabilityReport] = None,
) -> dict[str, Path]:
    """Write every result file into out_dir; returns them by name."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {name: out / name for name in ("summary.json", "slots.csv", "served.csv", "discards.csv", "g_curve.csv")}
    doc = summary_document(result, report)
    paths["summary.json"].write_text(json.dumps(doc, indent=2, default=json_default) + "\n")
    write_csv(slots_frame(result), paths["slots.csv"])
    write_csv(served_frame(result), paths["served.csv"])
    write_csv(discards_frame(result), paths["discards.csv"])
    write_csv(g_curve_frame(report, result.params.K), paths["g_curve.csv"])
    return paths
