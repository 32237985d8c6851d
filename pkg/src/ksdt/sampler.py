"""Transition kernels feeding the thinner, and best-of-m candidate selection.

Three samplers are available: random-walk Metropolis with an isotropic
Gaussian proposal, Metropolis-adjusted Langevin (MALA), and exact i.i.d.
draws from the target. :func:`spmcmc_next` runs ``m`` steps of one of them
and returns the candidate that gives the smallest KSD once appended to the
current dictionary.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .state import KsdState
from .target import GaussianMixture

log = logging.getLogger(__name__)

RWM = "rwm"
MALA = "mala"
IID = "iid"
SAMPLER_KINDS = (RWM, MALA, IID)


@dataclass(frozen=True)
class SamplerConfig:
    kind: str = IID
    step: float = 1.0
    m: int = 1
    continue_from: str = "last"

    def __post_init__(self):
        if self.kind not in SAMPLER_KINDS:
            raise ConfigError("sampler.kind", f"must be one of {SAMPLER_KINDS}, got {self.kind!r}")
        if self.kind != IID and not (isinstance(self.step, (int, float)) and self.step > 0):
            raise ConfigError("sampler.step", "step size must be positive")
        if not (isinstance(self.m, int) and self.m >= 1):
            raise ConfigError("sampler.m", "candidate batch size must be an integer >= 1")
        if self.continue_from not in ("last", "selected"):
            raise ConfigError("sampler.continue_from", "must be 'last' or 'selected'")


@dataclass
class ChainState:
    current: np.ndarray
    rng: np.random.Generator
    accept_count: int = 0
    proposal_count: int = 0
    log_density: float | None = None
    score: np.ndarray | None = None

    def move_to(self, target: GaussianMixture, x) -> None:
        self.current = np.array(x, dtype=np.float64)
        self.log_density = float(target.log_density(self.current))
        self.score = target.score(self.current)

    def ensure_cache(self, target: GaussianMixture) -> None:
        if self.log_density is None or self.score is None:
            self.move_to(target, self.current)

    @property
    def acceptance_rate(self) -> float:
        return self.accept_count / self.proposal_count if self.proposal_count else float("nan")


def rwm_step(target: GaussianMixture, chain: ChainState, step: float) -> bool:
    """One random-walk Metropolis step; returns whether the proposal was accepted."""
    chain.ensure_cache(target)
    proposal = chain.current + step * chain.rng.standard_normal(chain.current.shape)
    logp = float(target.log_density(proposal))
    chain.proposal_count += 1
    log_ratio = logp - chain.log_density
    if not math.isfinite(logp):
        log.warning("RWM proposal with non-finite density rejected")
        return False
    if math.log(chain.rng.random()) < log_ratio:
        chain.current = proposal
        chain.log_density = logp
        chain.score = None
        chain.accept_count += 1
        return True
    return False


def mala_log_proposal(target: GaussianMixture, x, y, step: float, score_x=None) -> float:
    """log q(y | x) up to a constant shared by both directions."""
    if score_x is None:
        score_x = target.score(x)
    mean = np.asarray(x) + 0.5 * step * score_x
    diff = np.asarray(y) - mean
    return -float(diff @ diff) / (2.0 * step)


def mala_log_acceptance(target: GaussianMixture, x, y, step: float) -> float:
    """log of the MALA acceptance probability min(1, ratio) for moving x -> y."""
    forward = mala_log_proposal(target, x, y, step)
    backward = mala_log_proposal(target, y, x, step)
    log_ratio = float(target.log_density(y)) - float(target.log_density(x)) + backward - forward
    return min(0.0, log_ratio)


def mala_step(target: GaussianMixture, chain: ChainState, step: float, proposal=None) -> bool:
    """One MALA step. ``proposal`` overrides the Langevin draw (testing hook)."""
    chain.ensure_cache(target)
    x = chain.current
    if proposal is None:
        noise = chain.rng.standard_normal(x.shape)
        proposal = x + 0.5 * step * chain.score + math.sqrt(step) * noise
    proposal = np.asarray(proposal, dtype=np.float64)
    chain.proposal_count += 1
    u = chain.rng.random()
    with np.errstate(all="ignore"):
        logp = float(target.log_density(proposal)) if np.all(np.isfinite(proposal)) else math.nan
        score_y = target.score(proposal) if math.isfinite(logp) else None
    if score_y is None or not np.all(np.isfinite(score_y)):
        log.warning("MALA proposal with non-finite density or score rejected")
        return False
    forward = mala_log_proposal(target, x, proposal, step, chain.score)
    backward = mala_log_proposal(target, proposal, x, step, score_y)
    log_ratio = logp - chain.log_density + backward - forward
    if math.log(u) < log_ratio:
        chain.current = proposal
        chain.log_density = logp
        chain.score = score_y
        chain.accept_count += 1
        return True
    return False


def iid_step(target: GaussianMixture, chain: ChainState) -> bool:
    chain.current = target.sample(chain.rng)
    chain.log_density = None
    chain.score = None
    chain.proposal_count += 1
    chain.accept_count += 1
    return True


def sampler_step(target: GaussianMixture, chain: ChainState, cfg: SamplerConfig) -> bool:
    if cfg.kind == RWM:
        return rwm_step(target, chain, cfg.step)
    if cfg.kind == MALA:
        return mala_step(target, chain, cfg.step)
    return iid_step(target, chain)


def spmcmc_next(target: GaussianMixture, chain: ChainState, cfg: SamplerConfig, state: KsdState) -> np.ndarray:
    """Draw ``cfg.m`` candidates and return the one minimizing KSD(D + {y}).

    Ties go to the earliest candidate. With ``m == 1`` the single draw is
    returned without touching the kernel. The chain resumes from its last raw
    state unless ``cfg.continue_from == "selected"``.
    """
    candidates = np.empty((cfg.m, target.dim))
    for i in range(cfg.m):
        sampler_step(target, chain, cfg)
        candidates[i] = chain.current
    if cfg.m == 1:
        return candidates[0].copy()
    best = int(np.argmin(state.insertion_objectives(candidates)))
    selected = candidates[best].copy()
    if cfg.continue_from == "selected" and cfg.kind != IID:
        chain.move_to(target, selected)
    return selected
