"""Analytic targets with diagonal-covariance Gaussian components.

Log-densities are unnormalized: the ``(2 pi)^(d/2)`` factor is dropped, so a
standard normal has ``log p(x) = -|x|^2 / 2``. Mixture components keep their
relative ``det(cov)^(-1/2)`` factors so that unequal covariances are weighted
correctly.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ConfigError, ContractError

WEIGHT_TOL = 1e-12


class GaussianMixture:
    """Weighted mixture of diagonal Gaussians.

    Parameters
    ----------
    weights : (K,) non-negative, summing to one
    means : (K, d)
    cov_diags : (K, d) strictly positive variances
    """

    def __init__(self, weights, means, cov_diags):
        weights = np.asarray(weights, dtype=np.float64).reshape(-1)
        means = np.atleast_2d(np.asarray(means, dtype=np.float64))
        cov_diags = np.atleast_2d(np.asarray(cov_diags, dtype=np.float64))
        if cov_diags.shape[0] == 1 and means.shape[0] > 1:
            cov_diags = np.repeat(cov_diags, means.shape[0], axis=0)
        if means.shape[0] != weights.shape[0] or cov_diags.shape != means.shape:
            raise ConfigError("target", f"shape mismatch: weights {weights.shape}, means {means.shape}, cov {cov_diags.shape}")
        if np.any(weights < 0) or abs(weights.sum() - 1.0) > WEIGHT_TOL:
            raise ConfigError("target.weights", "weights must be non-negative and sum to 1")
        if not np.all(cov_diags > 0):
            raise ConfigError("target.cov", "covariance diagonal entries must be positive")
        if not (np.all(np.isfinite(means)) and np.all(np.isfinite(cov_diags))):
            raise ConfigError("target", "means and covariances must be finite")
        self.weights = weights
        self.means = means
        self.cov_diags = cov_diags
        self.dim = means.shape[1]
        with np.errstate(divide="ignore"):
            self._log_w = np.log(weights) - 0.5 * np.sum(np.log(cov_diags), axis=1)
        self._prec = 1.0 / cov_diags

    @property
    def n_components(self) -> int:
        return self.weights.shape[0]

    def _check(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.dim:
            raise ContractError(f"expected dimension {self.dim}, got {x.shape[-1]}")
        if not np.all(np.isfinite(x)):
            raise ContractError("non-finite input coordinates")
        return x

    def _component_logs(self, x):
        # (..., K) unnormalized component log densities, and the (..., K, d) offsets
        diff = x[..., None, :] - self.means
        quad = np.sum(diff * diff * self._prec, axis=-1)
        return self._log_w - 0.5 * quad, diff

    def log_density(self, x):
        """Unnormalized log density; accepts a point or an (n, d) batch."""
        x = self._check(x)
        logs, _ = self._component_logs(x)
        top = np.max(logs, axis=-1)
        return top + np.log(np.sum(np.exp(logs - top[..., None]), axis=-1))

    def score(self, x):
        """Gradient of the log density, via softmax responsibilities."""
        x = self._check(x)
        logs, diff = self._component_logs(x)
        top = np.max(logs, axis=-1, keepdims=True)
        resp = np.exp(logs - top)
        resp /= np.sum(resp, axis=-1, keepdims=True)
        return -np.sum(resp[..., None] * diff * self._prec, axis=-2)

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        """One exact draw: pick a component by weight, then a diagonal Gaussian."""
        k = rng.choice(self.n_components, p=self.weights) if self.n_components > 1 else 0
        z = rng.standard_normal(self.dim)
        return self.means[k] + np.sqrt(self.cov_diags[k]) * z

    def mean(self) -> np.ndarray:
        return self.weights @ self.means

    def covariance(self) -> np.ndarray:
        mu = self.mean()
        second = sum(
            w * (np.diag(c) + np.outer(m, m)) for w, m, c in zip(self.weights, self.means, self.cov_diags)
        )
        return second - np.outer(mu, mu)


class Gaussian(GaussianMixture):
    """Single diagonal Gaussian."""

    def __init__(self, mean, cov_diag):
        mean = np.atleast_1d(np.asarray(mean, dtype=np.float64))
        cov_diag = np.broadcast_to(np.asarray(cov_diag, dtype=np.float64), mean.shape)
        super().__init__([1.0], mean[None, :], cov_diag[None, :])

    def log_density(self, x):
        x = self._check(x)
        diff = x - self.means[0]
        return -0.5 * np.sum(diff * diff * self._prec[0], axis=-1)

    def score(self, x):
        x = self._check(x)
        return -(x - self.means[0]) * self._prec[0]


def log_density_unnormalized(target: GaussianMixture, x):
    return target.log_density(x)


def score(target: GaussianMixture, x):
    return target.score(x)


def iid_draw(target: GaussianMixture, rng: np.random.Generator) -> np.ndarray:
    return target.sample(rng)


def grid_mixture(n_modes: int, variance: float = 0.5, dim: int = 2) -> GaussianMixture:
    """Equal-weight mixture with modes on consecutive integer grid points.

    Modes fill a square grid of side ``ceil(sqrt(n_modes))`` row by row, so
    4 modes sit on {0,1}^2 and 10 modes on the first ten points of {0..3}^2.
    """
    if n_modes < 1:
        raise ConfigError("modes", "mode count must be at least 1")
    if dim != 2:
        raise ConfigError("target.dim", "grid mixtures are two-dimensional")
    side = math.isqrt(n_modes - 1) + 1
    means = np.array([(i % side, i // side) for i in range(n_modes)], dtype=np.float64)
    weights = np.full(n_modes, 1.0 / n_modes)
    return GaussianMixture(weights, means, np.full_like(means, variance))


def bimodal() -> GaussianMixture:
    """Two equal modes at (0, 0) and (1, 1) with covariance 0.5 I."""
    return GaussianMixture([0.5, 0.5], [[0.0, 0.0], [1.0, 1.0]], [[0.5, 0.5], [0.5, 0.5]])
