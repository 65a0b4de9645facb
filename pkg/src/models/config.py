"""
JSON run configuration.

A config is one document with the sections `switch`, `arrivals`,
`protocol` and `run`. Unbounded quantities (W, memory, T2) are null.
See docs/CONFIG.md for the field reference.
"""

import json
import math
import re
from pathlib import Path
from typing import Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ..stochastic.arrivals import ArrivalProcess
from .errors import ConfigError
from .switch import RateMatrix, SwitchParams


class SwitchConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    K: int = Field(ge=2)
    p: Union[float, list[float]] = 0.9
    q: float = Field(0.9, gt=0, le=1)
    W: Optional[int] = Field(None, ge=1)
    mem_per_interface: Optional[int] = Field(None, ge=1)
    T2_ns: Optional[float] = Field(None, gt=0)
    slot_ns: float = Field(1000.0, gt=0)
    fidelity_threshold: float = Field(0.5, ge=0.5, le=1)
    end_node_dephasing: bool = True

    def to_params(self) -> SwitchParams:
        p = self.p if isinstance(self.p, list) else [self.p]
        return SwitchParams(
            K=self.K,
            p=tuple(p),
            q=self.q,
            W=self.W,
            mem_per_interface=self.mem_per_interface,
            T2_ns=math.inf if self.T2_ns is None else self.T2_ns,
            slot_ns=self.slot_ns,
            fidelity_threshold=self.fidelity_threshold,
            end_node_dephasing=self.end_node_dephasing,
        )


class ArrivalConfig(BaseModel):
    """Either one `rate` for every pair or a full symmetric `rates` matrix,
    in requests per slot."""

    model_config = ConfigDict(extra="forbid")

    family: Literal["bernoulli", "mixed_poisson", "constant"] = "bernoulli"
    rate: Optional[float] = Field(None, ge=0)
    rates: Optional[list[list[float]]] = None
    spread: float = Field(0.5, ge=0, le=1)

    @model_validator(mode="after")
    def _one_rate_source(self):
        if (self.rate is None) == (self.rates is None):
            raise ValueError("give exactly one of 'rate' or 'rates'")
        return self

    def rate_matrix(self, K: int) -> RateMatrix:
        if self.rate is not None:
            return RateMatrix.uniform(K, self.rate)
        return RateMatrix(np.asarray(self.rates, dtype=float))

    def process(self, K: int) -> ArrivalProcess:
        return ArrivalProcess.from_rates(self.rate_matrix(K), self.family, self.spread)


class ProtocolConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: Literal["stationary", "stationary-discard", "maxweight", "maxweight-discard", "on-demand"] = "on-demand"
    qubit_policy: Literal["yqf", "oqf"] = "yqf"
    request_policy: Literal["fifo"] = "fifo"
    T0: Optional[int] = Field(None, ge=1)
    epsilon: Optional[float] = Field(None, gt=0)
    plan_scale: float = Field(1.0, gt=0)
    visit_order: Optional[list[tuple[int, int]]] = None
    immediate_service: Optional[bool] = None
    memory_full_policy: Literal["drop-newest", "drop-oldest"] = "drop-newest"


class RunSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    horizon_slots: int = Field(10_000, ge=0)
    seed: int = Field(0, ge=0, lt=2**64)
    warmup_slots: Optional[int] = Field(None, ge=0)
    trace_detail: Literal["full", "summary"] = "full"
    trace_stride: int = Field(1, ge=1)
    check_invariants: bool = True

    @model_validator(mode="after")
    def _warmup_within_horizon(self):
        if self.warmup_slots is not None and self.warmup_slots > self.horizon_slots:
            raise ValueError("warmup_slots exceeds horizon_slots")
        return self

    @property
    def warmup(self) -> int:
        """Slots excluded from aggregates; 10% of the horizon by default."""
        if self.warmup_slots is not None:
            return self.warmup_slots
        return self.horizon_slots // 10


class VerdictThresholds(BaseModel):
    """Knobs of the stability verdict.

    v_multiple scales the mean per-pair backlog into the level a stable run
    should rarely exceed; v_max is the fixed level an unstable run spends
    a large share of the window above.
    """

    model_config = ConfigDict(extra="forbid")

    stable_g: float = Field(0.05, gt=0, lt=1)
    unstable_g: float = Field(0.1, gt=0, lt=1)
    v_multiple: float = Field(10.0, gt=0)
    v_max: float = Field(100.0, gt=0)
    batches: int = Field(20, ge=3)
    confidence: float = Field(0.95, gt=0, lt=1)


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    switch: SwitchConfig
    arrivals: ArrivalConfig
    protocol: ProtocolConfig = ProtocolConfig()
    run: RunSection = RunSection()
    verdict: VerdictThresholds = VerdictThresholds()

    @model_validator(mode="after")
    def _consistent_sizes(self):
        K = self.switch.K
        if isinstance(self.switch.p, list) and len(self.switch.p) not in (1, K):
            raise ValueError(f"switch.p has {len(self.switch.p)} entries for K={K}")
        if self.arrivals.rates is not None:
            if len(self.arrivals.rates) != K or any(len(row) != K for row in self.arrivals.rates):
                raise ValueError(f"arrivals.rates must be a {K}x{K} matrix")
        if self.protocol.name.startswith("maxweight") and self.protocol.T0 is None:
            raise ValueError("max-weight protocols need protocol.T0")
        return self

    def to_json(self) -> str:
        return self.model_dump_json(indent=2)

    def with_seed(self, seed: int) -> "RunConfig":
        return self.model_copy(update={"run": self.run.model_copy(update={"seed": seed})})


def _locate(text: str, loc: tuple) -> tuple[Optional[int], Optional[int]]:
    """Line and column of the deepest named key of a validation error."""
    for key in reversed(loc):
        if isinstance(key, str):
            m = re.search(rf'"{re.escape(key)}"\s*:', text)
            if m:
                line = text.count("\n", 0, m.start()) + 1
                column = m.start() - (text.rfind("\n", 0, m.start()) + 1) + 1
                return line, column
    return None, None


def parse_config(text: str) -> RunConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"invalid JSON: {e.msg}", e.lineno, e.colno) from e
    try:
        return RunConfig.model_validate(raw)
    except ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(part) for part in first["loc"]) or "config"
        line, column = _locate(text, first["loc"])
        raise ConfigError(f"{where}: {first['msg']}", line, column) from e


def load_config(path: Union[str, Path]) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e.strerror}") from e
    return parse_config(text)
