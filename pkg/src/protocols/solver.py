"""
Exact maximum-weight integer b-matching on the complete graph.

maximize   sum_{i<j} w_ij F_ij
subject to sum_j F_ij <= c_i,  F_ij >= 0 integer

Solved as an integer program with HiGHS through scipy.optimize.milp. Edges
are ordered by weight (descending), then (i, j). Among optimal matchings
the lexicographically largest F in that order is returned: edges are
fixed one at a time, re-solving with the optimal weight held only when an
edge sits below the room the earlier edges left it.
"""

import logging
from typing import Sequence

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, OptimizeResult, milp

from ..models.errors import ContractViolation

logger = logging.getLogger("qswitch-solver")

MILP_OPTIONS = {"mip_rel_gap": 0.0, "presolve": True}


def _milp(cost: np.ndarray, constraints: list[LinearConstraint], lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    res: OptimizeResult = milp(
        cost,
        constraints=constraints,
        integrality=np.ones(cost.size),
        bounds=Bounds(lower, upper),
        options=MILP_OPTIONS,
    )
    if res.status != 0 or res.x is None:
        raise ContractViolation(f"max-weight matching solve failed: {res.message}")
    return np.rint(res.x).astype(np.int64)


def solve_mw(weights: np.ndarray, capacities: Sequence[int]) -> np.ndarray:
    """Optimal symmetric swap matrix F* for weights U and capacities E0."""
    K = len(capacities)
    caps = np.asarray([int(c) for c in capacities], dtype=np.int64)
    weights = np.asarray(weights)
    if np.any(caps < 0) or np.any(weights < 0):
        raise ValueError("weights and capacities must be nonnegative")
    edges = [
        (int(weights[i, j]), i, j)
        for i in range(K)
        for j in range(i + 1, K)
        if weights[i, j] > 0 and caps[i] > 0 and caps[j] > 0
    ]
    edges.sort(key=lambda e: (-e[0], e[1], e[2]))

    F = np.zeros((K, K), dtype=np.int64)
    if not edges:
        return F
    n = len(edges)
    w = np.array([e[0] for e in edges], dtype=float)
    upper = np.array([min(caps[i], caps[j]) for _, i, j in edges], dtype=np.int64)
    incidence = np.zeros((K, n))
    for col, (_, i, j) in enumerate(edges):
        incidence[i, col] = incidence[j, col] = 1.0

    if np.all(incidence @ upper <= caps):
        # no two edges compete for a node
        x = upper
    else:
        nodes = LinearConstraint(incidence, -np.inf, caps)
        lo = np.zeros(n)
        hi = upper.astype(float)
        x = _milp(-w, [nodes], lo, hi)
        best = int(round(float(w @ x)))
        optimal = LinearConstraint(w[None, :], best - 0.5, np.inf)
        rem = caps.copy()
        solves = 1
        for col, (_, i, j) in enumerate(edges):
            if x[col] < min(upper[col], rem[i], rem[j]):
                cost = np.zeros(n)
                cost[col] = -1.0
                x = _milp(cost, [nodes, optimal], lo, hi)
                solves += 1
            lo[col] = hi[col] = x[col]
            rem[i] -= x[col]
            rem[j] -= x[col]
        logger.debug(f"max-weight matching over {n} pairs: weight {best}, {solves} solves")
    for (_, i, j), v in zip(edges, x):
        F[i, j] = F[j, i] = int(v)
    return F


def objective(weights: np.ndarray, F: np.ndarray) -> int:
    return int(np.triu(np.asarray(weights) * F, 1).sum())
