"""Base kernels (IMQ, RBF) and the Stein kernel built on top of them.

All derivatives are analytic. With ``r = x - y`` and ``s = |r|^2`` both base
kernels are radial, so their gradients take the form

    grad_x k(x, y) = -g(s) r,    grad_y k(x, y) = +g(s) r

which lets the Stein kernel be written as

    k0(x, y) = <sx, sy> k + g <sx - sy, r> + trace

where ``sx`` and ``sy`` are the target scores at ``x`` and ``y``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ContractError, NumericError

IMQ = "imq"
RBF = "rbf"


@dataclass(frozen=True)
class BaseKernelSpec:
    """A base kernel family plus its bandwidth.

    ``bandwidth`` is the squared length scale ``h`` of the RBF kernel
    ``exp(-|x-y|^2 / (2h))``; it is ignored for IMQ, which is fixed to
    ``(1 + |x-y|^2)^(-1/2)``.
    """

    family: str = IMQ
    bandwidth: float | None = None

    def __post_init__(self):
        if self.family not in (IMQ, RBF):
            raise ContractError(f"unknown kernel family {self.family!r}")
        if self.family == RBF:
            if self.bandwidth is None or not self.bandwidth > 0:
                raise ContractError("RBF kernel requires bandwidth h > 0")

    @classmethod
    def for_dim(cls, family: str, dim: int, bandwidth: float | None = None):
        """Build a spec, defaulting the RBF bandwidth to the problem dimension."""
        if family == RBF and bandwidth is None:
            bandwidth = float(dim)
        return cls(family, bandwidth)


def _check_pair(x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape[-1] != y.shape[-1]:
        raise ContractError(f"dimension mismatch: {x.shape[-1]} vs {y.shape[-1]}")
    return x, y


def _radial_parts(spec: BaseKernelSpec, sq: np.ndarray, d: int):
    """Return (k, g, trace) for squared distances ``sq``.

    ``g`` is the radial factor with grad_x k = -g r; ``trace`` is
    sum_i d^2 k / dx_i dy_i.
    """
    if spec.family == IMQ:
        base = 1.0 + sq
        k = base ** -0.5
        g = base ** -1.5
        trace = d * g - 3.0 * sq * base ** -2.5
    else:
        h = spec.bandwidth
        k = np.exp(-sq / (2.0 * h))
        g = k / h
        trace = k * (d / h - sq / h**2)
    return k, g, trace


def base_eval(spec: BaseKernelSpec, x, y):
    """k(x, y). Broadcasts over leading axes."""
    x, y = _check_pair(x, y)
    r = x - y
    sq = np.sum(r * r, axis=-1)
    k, _, _ = _radial_parts(spec, sq, x.shape[-1])
    return k


def base_grad_x(spec: BaseKernelSpec, x, y):
    """Gradient of k(x, y) in its first argument."""
    x, y = _check_pair(x, y)
    r = x - y
    sq = np.sum(r * r, axis=-1)
    _, g, _ = _radial_parts(spec, sq, x.shape[-1])
    return -np.asarray(g)[..., None] * r


def base_cross_diag(spec: BaseKernelSpec, x, y):
    """sum_i d^2 k(x, y) / dx_i dy_i."""
    x, y = _check_pair(x, y)
    r = x - y
    sq = np.sum(r * r, axis=-1)
    _, _, trace = _radial_parts(spec, sq, x.shape[-1])
    return trace


def stein_from_scores(spec: BaseKernelSpec, x, sx, y, sy):
    """Stein kernel values given precomputed scores.

    ``x``/``sx`` and ``y``/``sy`` broadcast against each other, so a single
    point can be paired with a whole array of dictionary points.
    """
    x, y = _check_pair(x, y)
    r = x - y
    sq = np.sum(r * r, axis=-1)
    k, g, trace = _radial_parts(spec, sq, x.shape[-1])
    score_dot = np.sum(sx * sy, axis=-1)
    cross = np.sum((sx - sy) * r, axis=-1)
    return score_dot * k + g * cross + trace


class SteinKernel:
    """Stein kernel k0 for a target with score function ``score``.

    ``evals`` counts every pairwise k0 evaluation made through this object,
    so callers can audit the kernel-evaluation budget of each operation.
    """

    def __init__(self, base: BaseKernelSpec, score: Callable[[np.ndarray], np.ndarray], dim: int):
        if dim < 1:
            raise ContractError("dimension must be positive")
        self.base = base
        self.score = score
        self.dim = int(dim)
        self.evals = 0

    def scores(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=np.float64)
        s = np.asarray(self.score(points), dtype=np.float64)
        if not np.all(np.isfinite(s)):
            bad = np.argwhere(~np.all(np.isfinite(np.atleast_2d(s)), axis=-1))[0, 0]
            raise NumericError("non-finite score", point=np.atleast_2d(points)[bad])
        return s

    def __call__(self, x, y) -> float:
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        self._check_dim(x)
        self._check_dim(y)
        return float(self.row(x, self.scores(x), y[None, :], self.scores(y)[None, :])[0])

    def self_value(self, x, sx) -> float:
        """k0(x, x), one evaluation."""
        return float(self.row(x, sx, x[None, :], sx[None, :])[0])

    def row(self, x, sx, points, point_scores) -> np.ndarray:
        """k0(x, p) for every row p of ``points``."""
        points = np.asarray(points, dtype=np.float64).reshape(-1, self.dim)
        if points.shape[0] == 0:
            return np.empty(0)
        vals = stein_from_scores(self.base, x, sx, points, point_scores)
        self.evals += points.shape[0]
        if not np.all(np.isfinite(vals)):
            raise NumericError("non-finite Stein kernel value", point=x)
        return vals

    def gram(self, points, point_scores=None) -> np.ndarray:
        """Full Gram matrix; n^2 evaluations."""
        points = np.asarray(points, dtype=np.float64).reshape(-1, self.dim)
        if point_scores is None:
            point_scores = self.scores(points)
        vals = stein_from_scores(
            self.base, points[:, None, :], point_scores[:, None, :], points[None, :, :], point_scores[None, :, :]
        )
        self.evals += points.shape[0] ** 2
        if not np.all(np.isfinite(vals)):
            raise NumericError("non-finite Stein kernel value in Gram matrix")
        return vals

    def _check_dim(self, x):
        if x.ndim != 1 or x.shape[0] != self.dim:
            raise ContractError(f"expected a point of dimension {self.dim}, got shape {x.shape}")


def stein_eval(sk: SteinKernel, x, y) -> float:
    """k0(x, y) for a single pair of points."""
    return sk(x, y)
