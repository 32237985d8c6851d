"""Run configuration: parsing, validation and seeded stream derivation.

A config is a flat TOML (or JSON) document::

    kernel = "imq"            # or "rbf"; bandwidth defaults to the dimension
    steps = 2000
    seed = 0
    record_every = 10

    [target]
    kind = "mixture"          # "gaussian" | "mixture" | "grid"
    means = [[0.0, 0.0], [1.0, 1.0]]
    cov = [0.5, 0.5]
    weights = [0.5, 0.5]

    [sampler]
    kind = "iid"              # "rwm" | "mala" | "iid"
    step = 0.5
    m = 5

    [thinning]
    budget = "constant"       # or "decaying"
    epsilon = 0.0
    growth = "linear"         # "sqrtlog" | "powerlog" | "fixed" | "none"
    c = 0.5

``wall_time = true`` fills the trace's ``wall_ms`` column with measured
elapsed time; it is 0 otherwise so that repeated runs are byte-identical.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import numpy as np

from .errors import ConfigError
from .kernel import IMQ, RBF, BaseKernelSpec
from .sampler import SamplerConfig
from .target import Gaussian, GaussianMixture, grid_mixture
from .thinner import DECAYING, BudgetSchedule, GrowthSchedule, ThinnerConfig

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

STREAM_CHAIN = 0
STREAM_TARGET_DRAWS = 1

_TOP_KEYS = {
    "kernel", "bandwidth", "target", "sampler", "thinning", "steps", "seed", "repeat",
    "record_every", "output", "initial_points", "recompute_every", "full_gram", "wall_time",
}


@dataclass(frozen=True)
class RunConfig:
    target: dict
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    thinning: ThinnerConfig = field(default_factory=ThinnerConfig)
    kernel: str = IMQ
    bandwidth: float | None = None
    steps: int = 2000
    seed: int = 0
    repeat: int = 0
    record_every: int = 10
    output: str | None = None
    initial_points: tuple = ()
    recompute_every: int | None = None
    full_gram: bool = False
    wall_time: bool = False

    def __post_init__(self):
        if not (isinstance(self.steps, int) and self.steps >= 1):
            raise ConfigError("steps", "must be an integer >= 1")
        if not (isinstance(self.seed, int) and 0 <= self.seed < 2**64):
            raise ConfigError("seed", "must be an unsigned 64-bit integer")
        if not (isinstance(self.repeat, int) and self.repeat >= 0):
            raise ConfigError("repeat", "must be a non-negative integer")
        if not (isinstance(self.record_every, int) and 1 <= self.record_every <= self.steps):
            raise ConfigError("record_every", "must be an integer in [1, steps]")
        if self.kernel not in (IMQ, RBF):
            raise ConfigError("kernel", f"must be 'imq' or 'rbf', got {self.kernel!r}")
        if self.bandwidth is not None and not self.bandwidth > 0:
            raise ConfigError("bandwidth", "must be positive")
        if self.recompute_every is not None and not (
            isinstance(self.recompute_every, int) and self.recompute_every >= 1
        ):
            raise ConfigError("recompute_every", "must be a positive integer")

    def build_target(self) -> GaussianMixture:
        return build_target(self.target)

    def kernel_spec(self, dim: int) -> BaseKernelSpec:
        return BaseKernelSpec.for_dim(self.kernel, dim, self.bandwidth)

    def rng(self, stream: int) -> np.random.Generator:
        """Independent generator for a labelled stream of this (seed, repeat)."""
        return np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=(self.repeat, stream)))

    def with_(self, **changes) -> "RunConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        """Fully resolved config, suitable for JSON and for :func:`parse_config`."""
        g = self.thinning.growth
        b = self.thinning.budget
        return {
            "kernel": self.kernel,
            "bandwidth": self.kernel_spec(self.build_target().dim).bandwidth,
            "steps": self.steps,
            "seed": self.seed,
            "repeat": self.repeat,
            "record_every": self.record_every,
            "output": self.output,
            "initial_points": [list(p) for p in self.initial_points],
            "recompute_every": self.recompute_every,
            "full_gram": self.full_gram,
            "wall_time": self.wall_time,
            "target": self.target,
            "sampler": {
                "kind": self.sampler.kind,
                "step": self.sampler.step,
                "m": self.sampler.m,
                "continue_from": self.sampler.continue_from,
            },
            "thinning": {
                "budget": b.kind,
                "epsilon": b.epsilon,
                "growth": g.kind,
                "c": g.c,
                "alpha": g.alpha,
                "floor": g.floor,
            },
        }


def _floats(value, name):
    try:
        arr = np.asarray(value, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ConfigError(name, f"expected numbers: {exc}") from None
    return arr


def build_target(spec: dict) -> GaussianMixture:
    kind = spec.get("kind", "gaussian")
    if kind == "grid":
        modes = spec.get("modes", 1)
        if not isinstance(modes, int):
            raise ConfigError("target.modes", "must be an integer")
        return grid_mixture(modes, float(spec.get("variance", 0.5)))
    means = _floats(spec.get("means", [[0.0, 0.0]]), "target.means")
    if kind == "gaussian":
        mean = means.reshape(-1) if means.ndim <= 1 or means.shape[0] == 1 else None
        if mean is None:
            raise ConfigError("target.means", "a gaussian target takes a single mean")
        cov = _floats(spec.get("cov", 1.0), "target.cov")
        if cov.ndim > 1:
            cov = cov.reshape(-1)
        if cov.ndim == 1 and cov.size not in (1, mean.size):
            raise ConfigError("target.cov", "covariance diagonal length must match the dimension")
        if np.any(cov <= 0):
            raise ConfigError("target.cov", "covariance diagonal entries must be positive")
        return Gaussian(mean, np.broadcast_to(cov, mean.shape))
    if kind == "mixture":
        means = np.atleast_2d(means)
        k, d = means.shape
        cov = _floats(spec.get("cov", 1.0), "target.cov")
        if cov.ndim == 0:
            cov = np.full((k, d), float(cov))
        elif cov.ndim == 1:
            if cov.size != d:
                raise ConfigError("target.cov", "shared covariance diagonal must have one entry per dimension")
            cov = np.tile(cov, (k, 1))
        weights = _floats(spec.get("weights", [1.0 / k] * k), "target.weights")
        return GaussianMixture(weights, means, cov)
    raise ConfigError("target.kind", f"must be 'gaussian', 'mixture' or 'grid', got {kind!r}")


def _table(raw: dict, name: str) -> dict:
    value = raw.get(name, {})
    if not isinstance(value, dict):
        raise ConfigError(name, "must be a table")
    return value


def _typed(table: dict, key: str, kind, default, prefix: str):
    value = table.get(key, default)
    if value is None or kind is None:
        return value
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if not isinstance(value, kind) or isinstance(value, bool) and kind is not bool:
        raise ConfigError(f"{prefix}{key}", f"expected {kind.__name__}, got {value!r}")
    return value


def parse_config(raw: dict[str, Any]) -> RunConfig:
    """Validate a config mapping; every error names the offending field."""
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown config key")
    target = _table(raw, "target") or {"kind": "gaussian", "means": [[0.0, 0.0]], "cov": 1.0}
    build_target(target)

    s = _table(raw, "sampler")
    sampler = SamplerConfig(
        kind=_typed(s, "kind", str, "iid", "sampler."),
        step=_typed(s, "step", float, 1.0, "sampler."),
        m=_typed(s, "m", int, 1, "sampler."),
        continue_from=_typed(s, "continue_from", str, "last", "sampler."),
    )

    th = _table(raw, "thinning")
    growth = GrowthSchedule(
        kind=_typed(th, "growth", str, "linear", "thinning."),
        c=_typed(th, "c", float, 0.5, "thinning."),
        alpha=_typed(th, "alpha", float, 1.5, "thinning."),
        floor=_typed(th, "floor", int, 10, "thinning."),
    )
    budget_kind = _typed(th, "budget", str, "constant", "thinning.")
    budget = BudgetSchedule(
        kind=budget_kind,
        epsilon=_typed(th, "epsilon", float, 0.0, "thinning."),
        growth=growth if budget_kind == DECAYING else None,
    )

    initial = raw.get("initial_points", [])
    initial = tuple(tuple(float(v) for v in p) for p in _floats(initial, "initial_points").reshape(len(initial), -1)) if initial else ()

    return RunConfig(
        target=target,
        sampler=sampler,
        thinning=ThinnerConfig(budget=budget, growth=growth),
        kernel=_typed(raw, "kernel", str, IMQ, ""),
        bandwidth=_typed(raw, "bandwidth", float, None, ""),
        steps=_typed(raw, "steps", int, 2000, ""),
        seed=_typed(raw, "seed", int, 0, ""),
        repeat=_typed(raw, "repeat", int, 0, ""),
        record_every=_typed(raw, "record_every", int, 10, ""),
        output=_typed(raw, "output", str, None, ""),
        initial_points=initial,
        recompute_every=_typed(raw, "recompute_every", int, None, ""),
        full_gram=_typed(raw, "full_gram", bool, False, ""),
        wall_time=_typed(raw, "wall_time", bool, False, ""),
    )


def load_config(path) -> RunConfig:
    """Read a ``.toml`` or ``.json`` config file (a trace's meta sidecar works too)."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc}") from None
    try:
        if path.suffix == ".json":
            raw = json.loads(text)
            raw = raw.get("config", raw)
        else:
            raw = tomllib.loads(text)
    except (ValueError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError("config", f"cannot parse {path}: {exc}") from None
    return parse_config(raw)
