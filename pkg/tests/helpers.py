"""Builders shared by the test modules."""

from typing import Optional

import numpy as np

from src.models.config import RunConfig


def sym(K: int, entries: dict, dtype=np.int64) -> np.ndarray:
    """Symmetric K x K matrix with the given {(i, j): value} entries."""
    m = np.zeros((K, K), dtype=dtype)
    for (i, j), v in entries.items():
        m[i, j] = m[j, i] = v
    return m


def make_config(
    switch: Optional[dict] = None,
    arrivals: Optional[dict] = None,
    protocol: Optional[dict] = None,
    run: Optional[dict] = None,
) -> RunConfig:
    doc = {
        "switch": {"K": 3, **(switch or {})},
        "arrivals": arrivals or {"rate": 0.1},
        "protocol": protocol or {},
        "run": {"horizon_slots": 200, **(run or {})},
    }
    return RunConfig.model_validate(doc)
