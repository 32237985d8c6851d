"""Online MCMC thinning with the kernelized Stein discrepancy."""

from .errors import ConfigError, ContractError, EmptyDictionaryError, KsdtError, NumericError
from .kernel import BaseKernelSpec, SteinKernel, base_cross_diag, base_eval, base_grad_x, stein_eval
from .target import Gaussian, GaussianMixture, bimodal, grid_mixture, iid_draw, log_density_unnormalized, score
from .state import KsdState, ksd_value
from .sampler import ChainState, SamplerConfig, mala_step, rwm_step, spmcmc_next
from .thinner import (
    BudgetSchedule,
    GrowthSchedule,
    ThinnerConfig,
    budget_at,
    growth_floor_at,
    ksdt_inner,
    ksdt_step,
)
from .config import RunConfig, load_config, parse_config
from .io import TraceRecord, read_trace, write_snapshot, write_trace
from .harness import (
    alpha_sweep,
    execute,
    mode_adaptation_experiment,
    normalized_ksd,
    run_experiment,
)

__version__ = "0.1.0"
