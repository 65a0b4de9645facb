"""
Capacity region of the switch and the stationary protocol's rate plan.

A rate matrix is supportable iff the minimal swap flow f = lambda / q fits
the per-interface generation rates (sum_i f_ij <= p_j) and the swap budget
(sum_{i<j} f_ij <= W).
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..models.errors import ContractViolation, InfeasibleEpsilonError, T0SelectionError
from ..models.switch import RateMatrix, SwitchParams, node_pairs
from ..stochastic.arrivals import ArrivalProcess, ArrivalSpec

logger = logging.getLogger("qswitch-capacity")

BOUNDARY_TOL = 1e-12
DEFAULT_T0_CAP = 10**7
DELTA_GRID_DEPTH = 64


@dataclass(frozen=True, eq=False)
class MembershipReport:
    verdict: str
    margin: float
    epsilon_max: float
    flow: np.ndarray
    node_slack: np.ndarray

    @property
    def inside(self) -> bool:
        return self.verdict == "inside"


@dataclass(frozen=True, eq=False)
class StationaryPlan:
    """Labeling rates of the stationary protocol.

    f_tilde[i][j]: target swap attempts per slot for pair (i, j).
    label_prob[i][j]: probability a fresh pair on interface i is tagged (i, j).
    """

    f_tilde: np.ndarray
    epsilon: float
    label_prob: np.ndarray
    idle_prob: np.ndarray
    delta: float
    T0: int


def _check_shapes(rates: RateMatrix, params: SwitchParams) -> None:
    if rates.K != params.K:
        raise ContractViolation(f"rate matrix has K={rates.K} but switch has K={params.K}")


def region_membership(rates: RateMatrix, params: SwitchParams) -> MembershipReport:
    _check_shapes(rates, params)
    K = params.K
    p = np.asarray(params.p)
    flow = rates.lam / params.q
    node_slack = p - flow.sum(axis=0)
    margin = float(node_slack.min())
    total = float(np.triu(rates.lam, 1).sum())
    if params.W is not None:
        margin = min(margin, params.W - total / params.q)

    if margin > BOUNDARY_TOL:
        verdict = "inside"
    elif margin >= -BOUNDARY_TOL:
        verdict = "boundary"
    else:
        verdict = "outside"

    eps = 0.0
    if verdict == "inside":
        node_room = (params.q * p - rates.node_load()) / (K - 1)
        eps = float(node_room.min())
        if params.W is not None:
            eps = min(eps, (params.q * params.W - total) / (K * (K - 1) / 2))
        eps = max(eps, 0.0)
    return MembershipReport(verdict, margin, eps, flow, node_slack)


def kl_divergence(x: float, y: float) -> float:
    """D(x || y) between Bernoulli laws."""
    if not 0.0 <= x <= 1.0 or not 0.0 < y < 1.0:
        raise ValueError(f"need x in [0, 1] and y in (0, 1), got x={x}, y={y}")
    d = 0.0
    if x > 0:
        d += x * math.log(x / y)
    if x < 1:
        d += (1 - x) * math.log((1 - x) / (1 - y))
    return d


def choose_delta(rates: RateMatrix, f_tilde: np.ndarray, epsilon: float, q: float) -> float:
    """Largest delta on the grid eps/4 * 2^-m with
    lambda - delta + eps/4 <= q (f_tilde - eps/2)(1 - delta) for every pair."""
    pairs = node_pairs(rates.K)
    for m in range(DELTA_GRID_DEPTH):
        delta = epsilon / 4 * 2.0**-m
        if all(
            rates.lam[i, j] - delta + epsilon / 4
            <= q * (f_tilde[i, j] - epsilon / 2) * (1 - delta) + BOUNDARY_TOL
            for i, j in pairs
        ):
            return delta
    raise ContractViolation(f"no delta found for epsilon={epsilon}")


def _arrival_T0(spec: ArrivalSpec, delta: float) -> int:
    """Slots after which the empirical mean is within delta of the rate
    with probability at least 1 - delta."""
    if spec.family == "constant" or spec.variance() == 0.0:
        return 1
    if spec.family == "bernoulli":
        return math.ceil(math.log(2 / delta) / (2 * delta * delta))
    if spec.family == "mixed_poisson":
        return math.ceil(spec.variance() / delta**3)
    raise T0SelectionError(f"no concentration bound for {spec.family!r}; supply T0")


def select_T0(
    f_tilde: np.ndarray,
    epsilon: float,
    delta: float,
    arrivals: Optional[ArrivalProcess],
    cap: int = DEFAULT_T0_CAP,
) -> int:
    """Smallest period meeting both the arrival-mean bound and the
    Chernoff bound exp(-T0 D(f - eps/2 || f)) <= delta / 2 on every labeled
    generation stream."""
    if delta >= 1.0:
        return 1
    if arrivals is None:
        raise T0SelectionError("arrival law unknown; supply T0")

    T0 = 1
    K = f_tilde.shape[0]
    for i, j in node_pairs(K):
        spec = arrivals.spec((i, j))
        if spec is not None:
            T0 = max(T0, _arrival_T0(spec, delta))
        f = float(f_tilde[i, j])
        x = f - epsilon / 2
        if x <= 0 or f >= 1:
            continue
        T0 = max(T0, math.ceil(math.log(2 / delta) / kl_divergence(x, f)))
        if T0 > cap:
            break

    if T0 > cap:
        raise T0SelectionError(f"required T0={T0} exceeds cap {cap}; supply T0")
    return T0


def build_stationary_plan(
    rates: RateMatrix,
    params: SwitchParams,
    epsilon: float,
    arrivals: Optional[ArrivalProcess] = None,
    T0: Optional[int] = None,
    t0_cap: int = DEFAULT_T0_CAP,
) -> StationaryPlan:
    """Target flows (lambda + eps) / q and the labeling law they induce.

    T0 is computed by select_T0 unless given.
    """
    if not epsilon > 0:
        raise InfeasibleEpsilonError(f"epsilon must be positive, got {epsilon}")
    _check_shapes(rates, params)
    lam_eps = rates.lam + epsilon
    np.fill_diagonal(lam_eps, 0.0)
    report = region_membership(RateMatrix(lam_eps), params)
    if report.verdict == "outside":
        raise InfeasibleEpsilonError(
            f"epsilon={epsilon} leaves the capacity region (margin {report.margin:.3g})"
        )

    f_tilde = lam_eps / params.q
    p = np.asarray(params.p)
    with np.errstate(divide="ignore", invalid="ignore"):
        label_prob = np.where(p[:, None] > 0, f_tilde / p[:, None], 0.0)
    label_prob = np.clip(label_prob, 0.0, 1.0)
    idle_prob = np.clip(1.0 - label_prob.sum(axis=1), 0.0, 1.0)

    delta = choose_delta(rates, f_tilde, epsilon, params.q)
    if T0 is None:
        T0 = select_T0(f_tilde, epsilon, delta, arrivals, t0_cap)
        logger.info(f"Stationary plan: epsilon={epsilon:.4g}, delta={delta:.4g}, T0={T0}")
    if T0 < 1:
        raise ContractViolation(f"T0 must be a positive integer, got {T0}")
    return StationaryPlan(f_tilde, epsilon, label_prob, idle_prob, delta, int(T0))


def boundary_q(rates: RateMatrix, params: SwitchParams) -> float:
    """Smallest q at which the rates are supportable; above 1 means never."""
    _check_shapes(rates, params)
    load = rates.node_load()
    q_star = 0.0
    for j, p in enumerate(params.p):
        if load[j] > 0:
            q_star = max(q_star, load[j] / p if p > 0 else math.inf)
    if params.W is not None:
        q_star = max(q_star, rates.total() / params.W)
    return q_star


def never_stable(q_star: float) -> bool:
    return q_star > 1.0
