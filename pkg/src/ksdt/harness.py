"""Seeded experiment runner and the packaged studies built on it."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .config import STREAM_CHAIN, STREAM_TARGET_DRAWS, RunConfig
from .errors import ConfigError, ContractError, NumericError
from .io import TraceRecord
from .kernel import SteinKernel
from .sampler import IID, ChainState, SamplerConfig, spmcmc_next
from .state import KsdState
from .thinner import (
    CONSTANT,
    DECAYING,
    FIXED,
    LINEAR,
    NONE,
    POWERLOG,
    SQRTLOG,
    BudgetSchedule,
    GrowthSchedule,
    InnerLoopReport,
    ThinnerConfig,
    ksdt_step,
)

Observer = Callable[[int, KsdState, InnerLoopReport], None]


def normalized_ksd(ksd: float, size: int) -> float:
    """KSD scaled by sqrt(|D|), penalizing larger dictionaries."""
    if size < 1:
        raise ContractError("dictionary size must be >= 1")
    if ksd < 0:
        raise ContractError("KSD must be non-negative")
    return ksd * math.sqrt(size)


@dataclass
class RunResult:
    records: list[TraceRecord]
    state: KsdState
    chain: ChainState
    config: RunConfig


def execute(cfg: RunConfig, observer: Observer | None = None) -> RunResult:
    """Run ``cfg.steps`` outer-loop steps and return trace, dictionary and chain.

    ``observer(t, state, report)`` is called after every step; it must not
    mutate the state.
    """
    target = cfg.build_target()
    kernel = SteinKernel(cfg.kernel_spec(target.dim), target.score, target.dim)
    state = KsdState(kernel, full_gram=cfg.full_gram)
    for p in cfg.initial_points:
        if len(p) != target.dim:
            raise ConfigError("initial_points", f"points must have dimension {target.dim}")
        state.insert(np.asarray(p, dtype=np.float64))

    start = target.sample(cfg.rng(STREAM_TARGET_DRAWS))
    chain = ChainState(current=start, rng=cfg.rng(STREAM_CHAIN))

    records = []
    t0 = time.perf_counter()
    for t in range(1, cfg.steps + 1):
        try:
            x = spmcmc_next(target, chain, cfg.sampler, state)
            report = ksdt_step(state, x, t, cfg.thinning)
            if cfg.recompute_every and t % cfg.recompute_every == 0:
                state.recompute()
        except NumericError as exc:
            if exc.step is None:
                exc.step = t
                exc.args = (f"{exc.args[0]} [step {t}]",)
            raise
        if observer is not None:
            observer(t, state, report)
        if t % cfg.record_every == 0 or t == cfg.steps:
            ksd = state.ksd()
            records.append(
                TraceRecord(
                    step=t,
                    dict_size=len(state),
                    ksd=ksd,
                    normalized_ksd=normalized_ksd(ksd, len(state)),
                    kernel_evals=kernel.evals,
                    wall_ms=int((time.perf_counter() - t0) * 1000) if cfg.wall_time else 0,
                )
            )
    return RunResult(records, state, chain, cfg)


def run_experiment(cfg: RunConfig, observer: Observer | None = None) -> list[TraceRecord]:
    return execute(cfg, observer).records


def meta_for(cfg: RunConfig) -> dict:
    return {"config": cfg.to_dict(), "seed": cfg.seed, "repeat": cfg.repeat}


# Packaged configurations -------------------------------------------------

def linear_growth() -> GrowthSchedule:
    return GrowthSchedule(LINEAR, c=0.5)


def sqrt_growth() -> GrowthSchedule:
    return GrowthSchedule(SQRTLOG)


def unthinned() -> ThinnerConfig:
    return ThinnerConfig(BudgetSchedule(CONSTANT, 0.0), GrowthSchedule(NONE))


def constant_budget(growth: GrowthSchedule, epsilon: float = 0.0) -> ThinnerConfig:
    return ThinnerConfig(BudgetSchedule(CONSTANT, epsilon), growth)


def decaying_budget(growth: GrowthSchedule) -> ThinnerConfig:
    return ThinnerConfig(BudgetSchedule(DECAYING, growth=growth), growth)


BIMODAL_TARGET = {
    "kind": "mixture",
    "means": [[0.0, 0.0], [1.0, 1.0]],
    "cov": [0.5, 0.5],
    "weights": [0.5, 0.5],
}


def bimodal_config(**changes) -> RunConfig:
    """i.i.d. feed with best-of-5 selection on the two-mode mixture."""
    base = RunConfig(
        target=dict(BIMODAL_TARGET),
        sampler=SamplerConfig(IID, m=5),
        thinning=constant_budget(linear_growth()),
        steps=2000,
    )
    return base.with_(**changes)


def mode_adaptation_config(**changes) -> RunConfig:
    """Fixed floor of 10, zero budget, i.i.d. feed with best-of-5 selection."""
    base = RunConfig(
        target={"kind": "grid", "modes": 1, "variance": 0.5},
        sampler=SamplerConfig(IID, m=5),
        thinning=constant_budget(GrowthSchedule(FIXED, floor=10)),
        steps=2000,
    )
    return base.with_(**changes)


@dataclass
class ModeResult:
    modes: int
    retained: list[int]  # final dictionary size per repeat

    @property
    def mean_retained(self) -> float:
        return float(np.mean(self.retained))


def mode_adaptation_experiment(mode_counts, template: RunConfig | None = None, repeats: int = 5) -> list[ModeResult]:
    """Final dictionary size on equal-weight grid mixtures of each mode count.

    Repeat ``r`` uses stream ``(template.seed, r)``, so the same repeat index
    is paired across mode counts.
    """
    template = template or mode_adaptation_config()
    variance = template.target.get("variance", 0.5) if template.target.get("kind") == "grid" else 0.5
    results = []
    for k in mode_counts:
        target = {"kind": "grid", "modes": int(k), "variance": variance}
        retained = []
        for r in range(repeats):
            res = execute(template.with_(target=target, repeat=r))
            retained.append(len(res.state))
        results.append(ModeResult(int(k), retained))
    return results


def alpha_growth(alpha: float, c: float = 0.5) -> GrowthSchedule:
    """Size floor c * sqrt(t^alpha log t); alpha = 2 maps to linear growth c * t."""
    if not 1.0 < alpha <= 2.0:
        raise ConfigError("alpha", f"alpha must lie in (1, 2], got {alpha}")
    if alpha == 2.0:
        return GrowthSchedule(LINEAR, c=c)
    return GrowthSchedule(POWERLOG, c=c, alpha=alpha)


def alpha_sweep(alphas, template: RunConfig | None = None) -> dict[float, list[TraceRecord]]:
    """One trace per growth exponent on the two-mode mixture."""
    template = (template or bimodal_config()).with_(target=dict(BIMODAL_TARGET))
    cells = sweep_configs(template, "alpha", alphas)
    return {float(a): run_experiment(cfg) for a, (_, cfg) in zip(alphas, cells)}


def sweep_configs(template: RunConfig, param: str, values) -> list[tuple[str, RunConfig]]:
    """Expand a one-parameter sweep into (label, config) cells."""
    cells = []
    for v in values:
        if param == "alpha":
            growth = alpha_growth(float(v))
            budget = template.thinning.budget
            if budget.kind == DECAYING:
                budget = BudgetSchedule(DECAYING, growth=growth)
            cfg = template.with_(thinning=ThinnerConfig(budget, growth))
        elif param == "seed":
            cfg = template.with_(seed=int(v))
        elif param == "m":
            s = template.sampler
            cfg = template.with_(sampler=SamplerConfig(s.kind, s.step, int(v), s.continue_from))
        elif param == "epsilon":
            cfg = template.with_(thinning=ThinnerConfig(BudgetSchedule(CONSTANT, float(v)), template.thinning.growth))
        else:
            raise ConfigError("param", f"cannot sweep {param!r}; choose alpha, seed, m or epsilon")
        cells.append((f"{param}={v}", cfg))
    return cells


def loglog_slope(steps, values) -> float:
    """Least-squares slope of log(values) against log(steps)."""
    x = np.log(np.asarray(steps, dtype=np.float64))
    y = np.log(np.asarray(values, dtype=np.float64))
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)

