"""Incremental kernelized Stein discrepancy of a point dictionary.

The state keeps, for the current dictionary D = {x_1..x_n}:

* ``row_sums[i] = sum_j k0(x_i, x_j)`` (self term included),
* ``self_k[i] = k0(x_i, x_i)``,
* ``total = sum_ij k0(x_i, x_j)``,

so that KSD(q_D) = sqrt(total) / n, and both the least influential point and
the best insertion candidate can be found without the full Gram matrix.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ContractError, EmptyDictionaryError, NumericError
from .kernel import SteinKernel

NEGATIVE_TOTAL_TOL = 1e-8


class KsdState:
    """Dictionary of points with cached Stein-kernel row sums.

    Parameters
    ----------
    kernel : SteinKernel
    full_gram : bool
        Also cache the full Gram matrix (O(n^2) memory). Removal then reads the
        dropped row from the cache instead of recomputing it. Meant for small
        problems and cross-checks.
    """

    def __init__(self, kernel: SteinKernel, full_gram: bool = False):
        self.kernel = kernel
        self.dim = kernel.dim
        self.full_gram = full_gram
        self.points = np.empty((0, self.dim))
        self.scores = np.empty((0, self.dim))
        self.row_sums = np.empty(0)
        self.self_k = np.empty(0)
        self.total = 0.0
        self.gram = np.empty((0, 0)) if full_gram else None

    @classmethod
    def from_points(cls, kernel: SteinKernel, points, full_gram: bool = False) -> "KsdState":
        state = cls(kernel, full_gram=full_gram)
        for x in np.atleast_2d(np.asarray(points, dtype=np.float64)):
            state.insert(x)
        return state

    def __len__(self) -> int:
        return self.points.shape[0]

    def copy(self) -> "KsdState":
        other = KsdState.__new__(KsdState)
        other.__dict__.update(self.__dict__)
        for name in ("points", "scores", "row_sums", "self_k", "gram"):
            value = getattr(self, name)
            setattr(other, name, None if value is None else value.copy())
        return other

    def _point(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.dim,):
            raise ContractError(f"expected a point of dimension {self.dim}, got shape {x.shape}")
        return x

    def insert(self, x) -> None:
        """Append ``x``; exactly len(self) + 1 kernel evaluations."""
        x = self._point(x)
        sx = self.kernel.scores(x)
        row = self.kernel.row(x, sx, self.points, self.scores)
        kxx = self.kernel.self_value(x, sx)
        cross = float(np.sum(row))
        self.row_sums = np.append(self.row_sums + row, cross + kxx)
        self.self_k = np.append(self.self_k, kxx)
        self.points = np.vstack([self.points, x])
        self.scores = np.vstack([self.scores, sx])
        self.total += 2.0 * cross + kxx
        if self.full_gram:
            n = len(self)
            gram = np.empty((n, n))
            gram[:-1, :-1] = self.gram
            gram[-1, :-1] = row
            gram[:-1, -1] = row
            gram[-1, -1] = kxx
            self.gram = gram
        self._check_total(x)

    def remove(self, index: int) -> None:
        """Drop the point at ``index``; len(self) - 1 kernel evaluations
        (none with ``full_gram``)."""
        n = len(self)
        if not 0 <= index < n:
            raise ContractError(f"index {index} out of range for dictionary of size {n}")
        keep = np.arange(n) != index
        if self.full_gram:
            row = self.gram[index, keep]
            self.gram = self.gram[np.ix_(keep, keep)]
        else:
            row = self.kernel.row(self.points[index], self.scores[index], self.points[keep], self.scores[keep])
        removed = self.points[index]
        self.total -= 2.0 * self.row_sums[index] - self.self_k[index]
        self.row_sums = self.row_sums[keep] - row
        self.self_k = self.self_k[keep]
        self.points = self.points[keep]
        self.scores = self.scores[keep]
        if n == 1:
            self.total = 0.0
        self._check_total(removed)

    def squared_sum(self) -> float:
        """Gram sum clamped at zero."""
        return max(self.total, 0.0)

    def ksd(self) -> float:
        n = len(self)
        if n == 0:
            raise EmptyDictionaryError("KSD of an empty dictionary is undefined")
        return math.sqrt(self.squared_sum()) / n

    def ksd_squared(self) -> float:
        n = len(self)
        if n == 0:
            raise EmptyDictionaryError("KSD of an empty dictionary is undefined")
        return self.squared_sum() / n**2

    def removal_sums(self) -> np.ndarray:
        """Gram sum left after dropping each point: T - 2 r_j + k0(x_j, x_j)."""
        return self.total - 2.0 * self.row_sums + self.self_k

    def least_influential(self) -> tuple[int, float]:
        """Index whose removal gives the smallest KSD, and the Gram sum left.

        Pure arithmetic on cached sums; ties go to the smallest index.
        """
        if len(self) < 2:
            raise ContractError("least influential point needs at least two points")
        gain = 2.0 * self.row_sums - self.self_k
        j = int(np.argmax(gain))
        return j, float(self.total - gain[j])

    def insertion_objective(self, y) -> float:
        """k0(y, y)/2 + sum_i k0(x_i, y); inserting ``y`` adds twice this to
        the Gram sum. len(self) + 1 kernel evaluations."""
        y = self._point(y)
        sy = self.kernel.scores(y)
        row = self.kernel.row(y, sy, self.points, self.scores)
        return 0.5 * self.kernel.self_value(y, sy) + float(np.sum(row))

    def insertion_objectives(self, candidates) -> np.ndarray:
        """:meth:`insertion_objective` for each row of an (m, d) candidate batch."""
        candidates = np.atleast_2d(np.asarray(candidates, dtype=np.float64))
        return np.array([self.insertion_objective(y) for y in candidates])

    def recompute(self) -> None:
        """Rebuild row sums and total from scratch (n^2 evaluations)."""
        gram = self.kernel.gram(self.points, self.scores)
        self.row_sums = gram.sum(axis=1)
        self.self_k = np.diag(gram).copy()
        self.total = float(self.row_sums.sum())
        if self.full_gram:
            self.gram = gram

    def _check_total(self, point) -> None:
        if not math.isfinite(self.total):
            raise NumericError("Gram sum is not finite", point=point)
        scale = max(np.max(np.abs(self.row_sums), initial=0.0), np.max(np.abs(self.self_k), initial=0.0))
        if self.total < -NEGATIVE_TOTAL_TOL * scale:
            raise NumericError(f"Gram sum {self.total!r} is negative beyond rounding", point=point)


def ksd_value(state: KsdState) -> float:
    return state.ksd()

