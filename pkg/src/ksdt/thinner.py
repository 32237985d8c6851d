"""Online KSD thinning: budget and growth schedules, the destructive inner
loop and one step of the outer loop."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ContractError
from .state import KsdState

LINEAR = "linear"
SQRTLOG = "sqrtlog"
POWERLOG = "powerlog"
FIXED = "fixed"
NONE = "none"
GROWTH_KINDS = (LINEAR, SQRTLOG, POWERLOG, FIXED, NONE)

CONSTANT = "constant"
DECAYING = "decaying"


@dataclass(frozen=True)
class GrowthSchedule:
    """Minimum dictionary size f(t).

    * ``linear``:   c * t
    * ``sqrtlog``:  sqrt(t log t)
    * ``powerlog``: c * sqrt(t**alpha * log t), alpha in (1, 2]
    * ``fixed``:    the constant ``floor``
    * ``none``:     t, i.e. nothing is ever thinned
    """

    kind: str = LINEAR
    c: float = 0.5
    alpha: float = 1.5
    floor: int = 10

    def __post_init__(self):
        if self.kind not in GROWTH_KINDS:
            raise ConfigError("thinning.growth", f"must be one of {GROWTH_KINDS}, got {self.kind!r}")
        if self.kind in (LINEAR, POWERLOG) and not self.c > 0:
            raise ConfigError("thinning.c", "growth constant must be positive")
        if self.kind == POWERLOG and not 1.0 < self.alpha <= 2.0:
            raise ConfigError("thinning.alpha", "alpha must lie in (1, 2]")
        if self.kind == FIXED and not (isinstance(self.floor, (int, np.integer)) and self.floor >= 1):
            raise ConfigError("thinning.floor", "fixed floor must be an integer >= 1")

    def value(self, t: int) -> float:
        """Real-valued f(t)."""
        _check_step(t)
        if self.kind == LINEAR:
            return self.c * t
        if self.kind == SQRTLOG:
            return math.sqrt(t * math.log(t))
        if self.kind == POWERLOG:
            return self.c * math.sqrt(t**self.alpha * math.log(t))
        if self.kind == FIXED:
            return float(self.floor)
        return float(t)


def _check_step(t):
    if t < 1:
        raise ContractError(f"step index must be >= 1, got {t}")


def growth_floor_at(g: GrowthSchedule, t: int) -> int:
    """Integer size floor: ceil(f(t)), at least 1."""
    return max(1, math.ceil(g.value(t)))


@dataclass(frozen=True)
class BudgetSchedule:
    """Thinning budget: constant ``epsilon`` or log(t) / f(t)^2."""

    kind: str = CONSTANT
    epsilon: float = 0.0
    growth: GrowthSchedule | None = None

    def __post_init__(self):
        if self.kind not in (CONSTANT, DECAYING):
            raise ConfigError("thinning.budget", f"must be 'constant' or 'decaying', got {self.kind!r}")
        if self.kind == CONSTANT and not (self.epsilon >= 0 and math.isfinite(self.epsilon)):
            raise ConfigError("thinning.epsilon", "budget must be finite and >= 0")
        if self.kind == DECAYING and self.growth is None:
            raise ConfigError("thinning.growth", "a decaying budget needs a growth schedule")


def budget_at(b: BudgetSchedule, t: int) -> float:
    _check_step(t)
    if b.kind == CONSTANT:
        return b.epsilon
    f = b.growth.value(t)
    return math.log(t) / f**2 if f > 0 else 0.0


@dataclass(frozen=True)
class ThinnerConfig:
    budget: BudgetSchedule = field(default_factory=BudgetSchedule)
    growth: GrowthSchedule = field(default_factory=GrowthSchedule)


@dataclass
class InnerLoopReport:
    """What one call of :func:`ksdt_inner` did."""

    reference: float  # squared KSD of the input dictionary
    epsilon: float
    floor: int
    size_in: int
    final: float = math.nan  # squared KSD of the output dictionary
    removed: list = field(default_factory=list)  # removed points, in order


def ksdt_inner(state: KsdState, epsilon: float, floor: int) -> InnerLoopReport:
    """Destructive thinning of ``state`` in place.

    Removes least influential points while the dictionary is larger than
    ``floor`` and the squared KSD after removal stays strictly below the
    reference squared KSD plus ``epsilon``.
    """
    if len(state) < 1:
        raise ContractError("cannot thin an empty dictionary")
    if epsilon < 0:
        raise ContractError("budget must be non-negative")
    if floor < 1:
        raise ContractError("size floor must be >= 1")
    reference = state.ksd_squared()
    limit = reference + epsilon
    report = InnerLoopReport(reference, epsilon, floor, len(state))
    # The entry test is non-strict so that a zero budget can still thin.
    while state.ksd_squared() <= limit and len(state) > floor:
        j, remaining = state.least_influential()
        if max(remaining, 0.0) / (len(state) - 1) ** 2 < limit:
            report.removed.append(state.points[j].copy())
            state.remove(j)
        else:
            break
    report.final = state.ksd_squared()
    return report


def ksdt_step(state: KsdState, point, t: int, cfg: ThinnerConfig) -> InnerLoopReport:
    """One outer-loop iteration: insert ``point`` then thin with the
    step-``t`` budget and size floor."""
    _check_step(t)
    state.insert(point)
    return ksdt_inner(state, budget_at(cfg.budget, t), growth_floor_at(cfg.growth, t))
