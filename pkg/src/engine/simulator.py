"""
Slot-by-slot simulation of the switch as a Mesa model.

One slot t covers [t*slot_ns, (t+1)*slot_ns). At the opening boundary the
switch drops pairs that fell below the fidelity threshold, asks the
protocol for its swaps, serves queued requests from stored and fresh
end-to-end pairs and runs periodic discards. Requests then arrive at
their offsets inside the slot and may be served on the spot. Link pairs
generated during the slot are admitted at the closing boundary, one
InterfaceAgent per interface.
"""

import logging
from collections import deque
from dataclasses import dataclass, field
from itertools import count
from typing import Optional

import numpy as np
import pandas as pd
from mesa import Agent, Model
from mesa.datacollection import DataCollector
from mesa.time import BaseScheduler

from ..capacity.region import build_stationary_plan, region_membership
from ..models.config import RunConfig
from ..models.errors import ContractViolation, InfeasibleEpsilonError
from ..models.switch import (
    EprPair,
    Pair,
    QueueState,
    Request,
    SlotEvents,
    SwitchParams,
    node_pairs,
    remove_pairs,
    step_queues,
    total_backlog,
)
from ..physics.dephasing import current_fidelity, swapped_pair
from ..protocols import Scheduler, SchedulerDecision, make_scheduler
from ..protocols.policies import select_qubits, select_requests
from ..stochastic.arrivals import ArrivalProcess
from ..stochastic.channel import sample_link_generation, sample_swap_outcomes, swap_trial
from ..stochastic.streams import RngStreams
from .memory import InterfaceMemory, SwitchMemory

logger = logging.getLogger("qswitch-engine")

MEMORY_FULL = "memory-full"
FIDELITY = "fidelity"
PROTOCOL_DISCARD = "protocol-discard"
DISCARD_CAUSES = (MEMORY_FULL, FIDELITY, PROTOCOL_DISCARD)


def admit_pair(
    memory: InterfaceMemory,
    pair: EprPair,
    policy: str = "drop-newest",
) -> tuple[bool, Optional[EprPair]]:
    """Store a fresh link pair. Returns (admitted, pair lost to a full memory).

    drop-newest refuses the fresh pair; drop-oldest evicts the oldest stored
    pair to make room.
    """
    if not memory.full:
        memory.add(pair)
        return True, None
    if policy == "drop-oldest":
        evicted = memory.evict_oldest()
        memory.add(pair)
        return True, evicted
    return False, pair


def serve_matches(
    queue: deque,
    pool: list[EprPair],
    now_ns: float,
    slot: int,
    params: SwitchParams,
    qubit_policy: str = "yqf",
) -> tuple[list[Request], list[EprPair]]:
    """Hand end-to-end pairs to the oldest queued requests.

    Pairs are picked from the pool by the qubit policy. Returns the served
    requests, removed from the queue, and the surplus pairs.
    """
    n = min(len(queue), len(pool))
    if n == 0:
        return [], pool
    picked = select_qubits(qubit_policy, pool, n)
    served = select_requests(queue, n, ordered=True)
    for _ in range(n):
        queue.popleft()
    for req, pair in zip(served, picked):
        req.served_ns = now_ns
        req.served_slot = slot
        req.served_fidelity = current_fidelity(pair, now_ns, params)
    taken = {p.id for p in picked}
    return served, [p for p in pool if p.id not in taken]


@dataclass(eq=False)
class RunResult:
    """Traces and aggregates of one run.

    Pair-indexed traces have one column per unordered pair in node_pairs(K)
    order and one row per recorded slot (every trace_stride slots, state at
    the opening boundary, events of that slot). In summary trace mode only
    U is kept.
    """

    config: RunConfig
    params: SwitchParams
    warmup: int
    slots: np.ndarray
    U: np.ndarray
    E: Optional[np.ndarray]
    E0: Optional[np.ndarray]
    A: Optional[np.ndarray]
    A_raw: Optional[np.ndarray]
    C0: Optional[np.ndarray]
    F: Optional[np.ndarray]
    R: Optional[np.ndarray]
    series: pd.DataFrame
    served: list[Request]
    discards: list[tuple[int, str, int]]
    discard_totals: dict[str, int]
    arrivals_total: np.ndarray
    served_total: np.ndarray
    final_state: QueueState
    mean_fidelity: Optional[float]
    mean_latency_ns: Optional[float]
    mean_latency_slots: Optional[float]
    mean_backlog: np.ndarray
    served_after_warmup: int
    T0: Optional[int] = None
    epsilon: Optional[float] = None

    @property
    def horizon(self) -> int:
        return self.config.run.horizon_slots

    @property
    def pairs(self) -> list[Pair]:
        return node_pairs(self.params.K)

    @property
    def mean_backlog_per_pair(self) -> float:
        return float(np.triu(self.mean_backlog, 1).sum()) / len(self.pairs)

    def backlog(self) -> np.ndarray:
        """Total pending requests at the opening boundary of every slot."""
        return self.series["backlog"].to_numpy(dtype=float)

    def pair_trace(self, pair: Pair) -> np.ndarray:
        return self.U[:, self.pairs.index(tuple(sorted(pair)))]

    def aggregates(self) -> dict:
        return {
            "mean_fidelity": self.mean_fidelity,
            "mean_latency_ns": self.mean_latency_ns,
            "mean_latency_slots": self.mean_latency_slots,
            "mean_backlog_per_pair": self.mean_backlog_per_pair,
            "served": self.served_after_warmup,
            "arrivals": int(np.triu(self.arrivals_total, 1).sum()),
            "warmup_slots": self.warmup,
            "horizon_slots": self.horizon,
        }


def build_scheduler(config: RunConfig, params: SwitchParams) -> tuple[Scheduler, Optional[int], Optional[float]]:
    """Scheduler for the configured protocol, with the T0 and epsilon it runs with."""
    proto = config.protocol
    K = params.K
    if not proto.name.startswith("stationary"):
        scheduler = make_scheduler(
            proto.name, params, proto.qubit_policy, T0=proto.T0, visit_order=proto.visit_order
        )
        return scheduler, proto.T0, None

    rates = config.arrivals.rate_matrix(K).scaled(proto.plan_scale)
    epsilon = proto.epsilon
    if epsilon is None:
        report = region_membership(rates, params)
        if not report.inside:
            raise InfeasibleEpsilonError(
                f"planned rates are {report.verdict} the capacity region; no slack for a stationary plan"
            )
        epsilon = report.epsilon_max / 2
    T0 = proto.T0
    if T0 is None and proto.name == "stationary":
        T0 = 1
    process = ArrivalProcess.from_rates(rates, config.arrivals.family, config.arrivals.spread)
    plan = build_stationary_plan(rates, params, epsilon, process, T0)
    if proto.T0 is None and proto.name == "stationary-discard":
        logger.info(f"Discard period chosen from concentration bounds: T0={plan.T0}")
    return make_scheduler(proto.name, params, proto.qubit_policy, plan=plan), plan.T0, epsilon


def _pair_counts(pairs: dict[Pair, list[EprPair]], K: int) -> np.ndarray:
    m = np.zeros((K, K), dtype=np.int64)
    for (i, j), lost in pairs.items():
        m[i, j] = m[j, i] = len(lost)
    return m


class InterfaceAgent(Agent):
    """One switch interface: turns this slot's generation draw into a
    stored link pair."""

    def __init__(self, k: int, model: "SwitchModel"):
        super().__init__(k, model)
        self.k = k
        self.memory = model.memory[k]

    def step(self):
        m = self.model
        if not m.generated[self.k]:
            return
        born = (m.t + 1) * m.params.slot_ns
        pair = EprPair(m.next_id(), "link", (self.k,), (born, born))
        pair.label = m.scheduler.label(pair, m.streams)
        if pair.label is None and m.scheduler.discards_unlabeled():
            m.record_discard(PROTOCOL_DISCARD, 1)
            return
        admitted, lost = admit_pair(self.memory, pair, m.config.protocol.memory_full_policy)
        if admitted:
            m.C0[self.k] += 1
        if lost is not None:
            m.record_discard(MEMORY_FULL, 1)
            if lost is not pair:
                m.evicted[self.k] += 1


class SwitchModel(Model):
    """The switch, its memory, request queues and active protocol."""

    def __init__(self, config: RunConfig):
        super().__init__()
        self.config = config
        self.params = params = config.switch.to_params()
        K = params.K
        self.streams = RngStreams(config.run.seed)
        self.process = config.arrivals.process(K)
        self.memory = SwitchMemory(params, config.protocol.qubit_policy)
        self.scheduler, self.T0, self.epsilon = build_scheduler(config, params)
        immediate = config.protocol.immediate_service
        if immediate and not self.scheduler.serves_on_arrival:
            logger.warning(f"{self.scheduler.name} serves only at its decision slots; ignoring immediate_service")
            immediate = False
        self.immediate = self.scheduler.serves_on_arrival if immediate is None else immediate

        self.t = 0
        self.state = QueueState.zeros(K)
        self.queues: dict[Pair, deque] = {pair: deque() for pair in node_pairs(K)}
        self._request_ids = count()

        self.schedule = BaseScheduler(self)
        for k in range(K):
            self.schedule.add(InterfaceAgent(k, self))
        self.datacollector = DataCollector(
            model_reporters={
                "backlog": lambda m: total_backlog(m.state),
                "stored_link": lambda m: int(m.state.E0.sum()),
                "stored_e2e": lambda m: int(np.triu(m.state.E, 1).sum()),
            }
        )

        run = config.run
        self.warmup = run.warmup
        self.full_trace = run.trace_detail == "full"
        self._iu = np.triu_indices(K, 1)
        P = len(self._iu[0])
        n_rec = -(-run.horizon_slots // run.trace_stride)
        self.rec_slots = np.arange(0, run.horizon_slots, run.trace_stride, dtype=np.int64)
        self.rec_U = np.zeros((n_rec, P), dtype=np.int32)
        if self.full_trace:
            self.rec = {
                name: np.zeros((n_rec, P), dtype=np.int32) for name in ("E", "A", "A_raw", "F", "R")
            }
            self.rec["E0"] = np.zeros((n_rec, K), dtype=np.int32)
            self.rec["C0"] = np.zeros((n_rec, K), dtype=np.int32)
        self._row = 0

        self.served: list[Request] = []
        self.discards: list[tuple[int, str, int]] = []
        self._slot_discards: dict[str, int] = {}
        self.discard_totals = {cause: 0 for cause in DISCARD_CAUSES}
        self.arrivals_total = np.zeros((K, K), dtype=np.int64)
        self.served_total = np.zeros((K, K), dtype=np.int64)
        self._U_sum = np.zeros((K, K), dtype=np.int64)
        self._fidelity_sum = 0.0
        self._latency_ns_sum = 0.0
        self._latency_slots_sum = 0
        self._served_n = 0

    def record_discard(self, cause: str, n: int) -> None:
        if n:
            self._slot_discards[cause] = self._slot_discards.get(cause, 0) + n
            self.discard_totals[cause] += n

    def _serve(self, req: Request, pair: Optional[EprPair] = None, now_ns: Optional[float] = None) -> None:
        if pair is not None:
            req.served_ns = now_ns
            req.served_slot = self.t
            req.served_fidelity = current_fidelity(pair, now_ns, self.params)
            req.on_arrival = True
        i, j = req.pair
        self.served_total[i, j] += 1
        self.served_total[j, i] += 1
        if req.arrival_slot >= self.warmup:
            self._fidelity_sum += req.served_fidelity
            self._latency_ns_sum += req.latency_ns
            self._latency_slots_sum += req.latency_slots
            self._served_n += 1
        if self.full_trace:
            self.served.append(req)

    def _swap_products(self, decision: SchedulerDecision, now_ns: float) -> dict[Pair, list[EprPair]]:
        outcomes = sample_swap_outcomes(self.params.q, decision.F, self.streams)
        self._R = outcomes.R
        fresh = {}
        for pair, hits in outcomes.attempts.items():
            made = [
                swapped_pair(a, b, now_ns, self.params, self.next_id())
                for (a, b), ok in zip(decision.chosen_pairs[pair], hits)
                if ok
            ]
            if made:
                fresh[pair] = made
        return fresh

    def _serve_boundary(self, fresh: dict[Pair, list[EprPair]], now_ns: float, serve: bool = True) -> None:
        policy = self.scheduler.qubit_policy
        for pair in node_pairs(self.params.K):
            self.memory.store_e2e(fresh.get(pair, ()))
            if not serve:
                continue
            queue = self.queues[pair]
            n = min(len(queue), self.memory.e2e_count(pair))
            if n == 0:
                continue
            pool = self.memory.e2e.take(pair, n)
            served, _ = serve_matches(queue, pool, now_ns, self.t, self.params, policy)
            for req in served:
                self._serve(req)

    def _serve_on_arrival(self, req: Request, now_ns: float, E_used: np.ndarray, F_arr: np.ndarray) -> bool:
        i, j = req.pair
        policy = self.scheduler.qubit_policy
        if self.memory.e2e_count(req.pair):
            pick = self.memory.e2e.take(req.pair, 1)[0]
            E_used[i, j] += 1
            E_used[j, i] += 1
            self._serve(req, pick, now_ns)
            return True
        if not self.scheduler.serves_on_arrival:
            return False
        label = self.scheduler.arrival_label(req.pair)
        mi, mj = self.memory[i], self.memory[j]
        while mi.size(label) and mj.size(label) and (self._budget is None or self._budget > 0):
            a = mi.take(label, 1, policy)[0]
            b = mj.take(label, 1, policy)[0]
            F_arr[i, j] += 1
            F_arr[j, i] += 1
            if self._budget is not None:
                self._budget -= 1
            if swap_trial(self.params.q, self.streams):
                self._serve(req, swapped_pair(a, b, now_ns, self.params, self.next_id()), now_ns)
                return True
        return False

    def _arrivals(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        K = self.params.K
        A = np.zeros((K, K), dtype=np.int64)
        A_raw = np.zeros_like(A)
        E_used = np.zeros_like(A)
        F_arr = np.zeros_like(A)
        start = self.t * self.params.slot_ns
        for offset, pair in self.process.sample(self.t, self.streams, self.params.slot_ns):
            i, j = pair
            req = Request(next(self._request_ids), pair, start + offset, self.t)
            A_raw[i, j] += 1
            A_raw[j, i] += 1
            self.arrivals_total[i, j] += 1
            self.arrivals_total[j, i] += 1
            if self.immediate and self._serve_on_arrival(req, req.arrival_ns, E_used, F_arr):
                continue
            self.queues[pair].append(req)
            A[i, j] += 1
            A[j, i] += 1
        return A, A_raw, E_used, F_arr

    def _record_start(self) -> None:
        t, state = self.t, self.state
        if t >= self.warmup:
            self._U_sum += state.U
        if t % self.config.run.trace_stride:
            return
        self.rec_U[self._row] = state.U[self._iu]
        if self.full_trace:
            self.rec["E"][self._row] = state.E[self._iu]
            self.rec["E0"][self._row] = state.E0

    def _record_events(self, ev: SlotEvents, A_raw: np.ndarray) -> None:
        if self.t % self.config.run.trace_stride:
            return
        if self.full_trace:
            row = self._row
            self.rec["A"][row] = ev.A[self._iu]
            self.rec["A_raw"][row] = A_raw[self._iu]
            self.rec["F"][row] = ev.F[self._iu]
            self.rec["R"][row] = ev.R[self._iu]
            self.rec["C0"][row] = ev.C0
        self._row += 1

    def check_invariants(self) -> None:
        state, K = self.state, self.params.K
        state.validate(self.params.mem_per_interface)
        if list(state.E0) != self.memory.link_counts():
            raise ContractViolation("stored link pair count disagrees with memory")
        for i, j in node_pairs(K):
            queued = len(self.queues[(i, j)])
            if state.U[i, j] != queued:
                raise ContractViolation(f"U[{i},{j}]={state.U[i, j]} but {queued} requests are queued")
            if state.E[i, j] != self.memory.e2e_count((i, j)):
                raise ContractViolation(f"E[{i},{j}] disagrees with stored end-to-end pairs")
            if self.arrivals_total[i, j] != self.served_total[i, j] + queued:
                raise ContractViolation(f"request accounting broken for pair ({i},{j})")

    def step(self):
        try:
            self._slot()
        except ContractViolation as e:
            if e.slot is not None:
                raise
            raise type(e)(e.cause, slot=self.t) from e

    def _slot(self):
        params, K = self.params, self.params.K
        now = self.t * params.slot_ns
        self.datacollector.collect(self)
        self._record_start()
        self._slot_discards = {}

        link, e2e = self.memory.sweep(now)
        swept_link = np.array([len(x) for x in link], dtype=np.int64)
        swept_e2e = _pair_counts(e2e, K)
        self.record_discard(FIDELITY, int(swept_link.sum() + np.triu(swept_e2e, 1).sum()))
        state = remove_pairs(self.state, swept_link, swept_e2e)

        decision = self.scheduler.decide(self.t, state, self.memory)
        fresh = self._swap_products(decision, now)
        serve = self.scheduler.serves_at(self.t)
        self._serve_boundary(fresh, now, serve)

        drained_link = np.zeros(K, dtype=np.int64)
        drained_e2e = np.zeros((K, K), dtype=np.int64)
        if decision.discard_now:
            link, e2e = self.memory.drain()
            drained_link = np.array([len(x) for x in link], dtype=np.int64)
            drained_e2e = _pair_counts(e2e, K)
            self.record_discard(PROTOCOL_DISCARD, int(drained_link.sum() + np.triu(drained_e2e, 1).sum()))

        self._budget = None if params.W is None else params.W - decision.swap_count()
        A, A_raw, E_used, F_arr = self._arrivals()

        self.generated = sample_link_generation(params, self.streams, self.t)
        self.C0 = np.zeros(K, dtype=np.int64)
        self.evicted = np.zeros(K, dtype=np.int64)
        self.schedule.step()

        ev = SlotEvents(A, self.C0, decision.F + F_arr, self._R, E_used, serve)
        state = step_queues(state, ev)
        self.state = remove_pairs(state, drained_link + self.evicted, drained_e2e)
        self._record_events(ev, A_raw)
        for cause in DISCARD_CAUSES:
            if cause in self._slot_discards:
                self.discards.append((self.t, cause, self._slot_discards[cause]))
        if self.config.run.check_invariants:
            self.check_invariants()
        logger.debug(f"slot {self.t}: backlog={total_backlog(self.state)} swaps={decision.swap_count()}")
        self.t += 1

    def result(self) -> RunResult:
        n = self._served_n
        window = self.t - self.warmup
        mean_backlog = self._U_sum / window if window > 0 else np.zeros_like(self._U_sum, dtype=float)
        rec = self.rec if self.full_trace else {}
        return RunResult(
            config=self.config,
            params=self.params,
            warmup=self.warmup,
            slots=self.rec_slots,
            U=self.rec_U,
            E=rec.get("E"),
            E0=rec.get("E0"),
            A=rec.get("A"),
            A_raw=rec.get("A_raw"),
            C0=rec.get("C0"),
            F=rec.get("F"),
            R=rec.get("R"),
            series=self.datacollector.get_model_vars_dataframe(),
            served=self.served,
            discards=self.discards,
            discard_totals=dict(self.discard_totals),
            arrivals_total=self.arrivals_total,
            served_total=self.served_total,
            final_state=self.state,
            mean_fidelity=self._fidelity_sum / n if n else None,
            mean_latency_ns=self._latency_ns_sum / n if n else None,
            mean_latency_slots=self._latency_slots_sum / n if n else None,
            mean_backlog=mean_backlog,
            served_after_warmup=n,
            T0=self.T0,
            epsilon=self.epsilon,
        )


def run(config: RunConfig) -> RunResult:
    """Simulate `config` for its horizon. Deterministic given the seed."""
    run_cfg = config.run
    if run_cfg.horizon_slots and run_cfg.warmup >= run_cfg.horizon_slots:
        logger.warning(
            f"Warm-up of {run_cfg.warmup} slots covers the whole horizon; aggregates will be empty"
        )
    model = SwitchModel(config)
    logger.info(
        f"Run start: protocol={config.protocol.name}/{config.protocol.qubit_policy}, "
        f"K={model.params.K}, horizon={run_cfg.horizon_slots}, seed={run_cfg.seed}"
    )
    for _ in range(run_cfg.horizon_slots):
        model.step()
    result = model.result()
    logger.info(
        f"Run end: served={result.served_after_warmup}, "
        f"backlog={total_backlog(result.final_state)}, discards={result.discard_totals}"
    )
    return result
