"""
Parameter sweeps and the named experiment presets.

A preset expands into a list of labeled RunConfigs; the orchestrator runs
them and the preset's columns select what goes into its combined CSV.
"""

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from pydantic import ValidationError

from ..models.config import ArrivalConfig, ProtocolConfig, RunConfig, RunSection, SwitchConfig
from ..models.errors import ConfigError, UnknownParameterError, UnknownPresetError

SWEEP_PARAMS = ("q", "T2", "mem", "lambda_scale")

# settings shared by every preset
P_GEN = 0.9
Q_SWAP = 0.9
MEMORY_SLOTS = 100
T2_NS = 1_000_000.0
DISCARD_THRESHOLD = 0.75
PRESET_HORIZON = 20_000


@dataclass(frozen=True)
class PresetRun:
    """One run of a sweep or preset with the labels it is reported under."""

    labels: dict
    config: RunConfig


def apply_param(config: RunConfig, param: str, value: float) -> RunConfig:
    """Copy of config with one sweep parameter set.

    q: swap success probability. T2: dephasing time in ns.
    mem: memory slots per interface. lambda_scale: factor on every rate.
    """
    switch, arrivals = config.switch, config.arrivals
    if param == "q":
        switch = switch.model_copy(update={"q": float(value)})
    elif param == "T2":
        switch = switch.model_copy(update={"T2_ns": float(value)})
    elif param == "mem":
        switch = switch.model_copy(update={"mem_per_interface": int(value)})
    elif param == "lambda_scale":
        if arrivals.rate is not None:
            arrivals = arrivals.model_copy(update={"rate": arrivals.rate * value})
        else:
            scaled = (np.asarray(arrivals.rates) * value).tolist()
            arrivals = arrivals.model_copy(update={"rates": scaled})
    else:
        raise UnknownParameterError(f"unknown sweep parameter {param!r}; choose from {', '.join(SWEEP_PARAMS)}")
    # re-validate so swept values obey the same bounds as configs on disk
    try:
        return RunConfig.model_validate(
            {**config.model_dump(), "switch": switch.model_dump(), "arrivals": arrivals.model_dump()}
        )
    except ValidationError as e:
        raise ConfigError(f"{param}={value}: {e.errors()[0]['msg']}") from e


def sweep_runs(config: RunConfig, param: str, values: Sequence[float], seeds: int = 1) -> list[PresetRun]:
    """One run per (value, seed); seeds count up from the config's seed."""
    if param not in SWEEP_PARAMS:
        raise UnknownParameterError(f"unknown sweep parameter {param!r}; choose from {', '.join(SWEEP_PARAMS)}")
    runs = []
    for value in values:
        swept = apply_param(config, param, value)
        for s in range(seeds):
            seed = config.run.seed + s
            runs.append(PresetRun({"value": value, "seed": seed}, swept.with_seed(seed)))
    return runs


def base_config(
    K: int,
    rate: float,
    protocol: str = "on-demand",
    qubit_policy: str = "yqf",
    T0: Optional[int] = None,
    seed: int = 0,
    horizon: int = PRESET_HORIZON,
) -> RunConfig:
    """Experiment defaults: p = q = 0.9, 100 slots per interface, T2 = 1 ms,
    mixed Poisson arrivals with the same rate on every pair."""
    return RunConfig(
        switch=SwitchConfig(
            K=K,
            p=P_GEN,
            q=Q_SWAP,
            mem_per_interface=MEMORY_SLOTS,
            T2_ns=T2_NS,
            fidelity_threshold=DISCARD_THRESHOLD,
        ),
        arrivals=ArrivalConfig(family="mixed_poisson", rate=rate),
        protocol=ProtocolConfig(name=protocol, qubit_policy=qubit_policy, T0=T0),
        run=RunSection(horizon_slots=horizon, seed=seed),
    )


def per_pair_rate(K: int, total: float) -> float:
    """Rate per unordered pair when `total` requests per slot are spread
    evenly over all pairs."""
    return total / (K * (K - 1) / 2)


TABLE_PROTOCOLS = (
    ("stationary", "stationary", None),
    ("maxweight T0=1", "maxweight", 1),
    ("maxweight T0=20", "maxweight", 20),
    ("on-demand", "on-demand", None),
)
POLICIES = ("yqf", "oqf")
FIGURE_K = (4, 8)


def _table(rate: float) -> Callable[[int, int], list[PresetRun]]:
    def build(seed: int, horizon: int) -> list[PresetRun]:
        return [
            PresetRun(
                {"protocol": label, "policy": policy},
                base_config(5, rate, name, policy, T0, seed, horizon),
            )
            for label, name, T0 in TABLE_PROTOCOLS
            for policy in POLICIES
        ]

    return build


def _figure(param: str, grid: Sequence[float], total_rate: float) -> Callable[[int, int], list[PresetRun]]:
    def build(seed: int, horizon: int) -> list[PresetRun]:
        runs = []
        for K in FIGURE_K:
            for policy in POLICIES:
                base = base_config(K, per_pair_rate(K, total_rate), "on-demand", policy, None, seed, horizon)
                for value in grid:
                    runs.append(PresetRun({"K": K, "policy": policy, param: value}, apply_param(base, param, value)))
        return runs

    return build


@dataclass(frozen=True)
class ExperimentPreset:
    name: str
    description: str
    build: Callable[[int, int], list[PresetRun]]
    columns: tuple[str, ...]
    horizon: int = PRESET_HORIZON

    def runs(self, seed: int = 0, horizon: Optional[int] = None) -> list[PresetRun]:
        return self.build(seed, self.horizon if horizon is None else horizon)


TABLE_COLUMNS = ("protocol", "policy", "mean_fidelity", "mean_latency_us")
MEMORY_GRID = (1, 2, 5, 10, 20, 30, 50, 100)
T2_GRID = (2e4, 5e4, 1e5, 2e5, 5e5, 1e6, 2e6, 5e6)
Q_GRID = tuple(round(0.05 * k, 2) for k in range(1, 21))

PRESETS = {
    p.name: p
    for p in (
        ExperimentPreset(
            "table-heavy",
            "All protocols and qubit policies, K=5, 0.2 requests per slot per pair",
            _table(0.2),
            TABLE_COLUMNS,
        ),
        ExperimentPreset(
            "table-light",
            "All protocols and qubit policies, K=5, 0.12 requests per slot per pair",
            _table(0.12),
            TABLE_COLUMNS,
        ),
        ExperimentPreset(
            "fig-memory",
            "On-demand fidelity and latency against memory slots per interface",
            _figure("mem", MEMORY_GRID, 2.0),
            ("K", "policy", "mem", "mean_fidelity", "mean_latency_us", "stability_verdict"),
        ),
        ExperimentPreset(
            "fig-T2",
            "On-demand fidelity and latency against the dephasing time",
            _figure("T2", T2_GRID, 2.0),
            ("K", "policy", "T2", "mean_fidelity", "mean_latency_us", "stability_verdict"),
        ),
        ExperimentPreset(
            "fig-q",
            "On-demand fidelity and latency against the swap success probability",
            _figure("q", Q_GRID, 1.2),
            ("K", "policy", "q", "mean_fidelity", "mean_latency_us", "stability_verdict"),
        ),
    )
}


def get_preset(name: str) -> ExperimentPreset:
    try:
        return PRESETS[name]
    except KeyError:
        raise UnknownPresetError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None
