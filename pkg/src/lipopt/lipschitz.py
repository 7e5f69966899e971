"""Evaluation histories, the Lipschitz upper bound and the slope-based constant estimate.

Given evaluations ``(x_i, f_i)`` and a constant ``k``, the tightest upper envelope of
all ``k``-Lipschitz functions through the data is

    UB(x) = min_i f_i + k * ||x - x_i||

and a point can still be a maximizer iff ``UB(x) >= max_i f_i``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.spatial.distance import cdist

from .geometry import as_point


class DegeneratePairWarning(UserWarning):
    """Two evaluations share the same point; their slope is undefined and skipped."""


class Evaluation(NamedTuple):
    point: np.ndarray
    value: float


class EvaluationHistory:
    """Append-only record of evaluations with running max/min and max pairwise slope.

    Points and values live in preallocated arrays so ``points``/``values`` are cheap
    views. Inserting the t-th evaluation costs O(t) for the slope update.
    """

    def __init__(self, dim: int, capacity: int = 64):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        self.dim = dim
        self._x = np.empty((max(capacity, 1), dim))
        self._y = np.empty(max(capacity, 1))
        self._n = 0
        self.cached_max = -math.inf
        self.cached_min = math.inf
        self.argmax = -1
        self.cached_max_slope = 0.0
        self.degenerate_pairs = 0
        self.inconsistent = False

    @classmethod
    def from_arrays(cls, points, values) -> "EvaluationHistory":
        points = np.atleast_2d(np.asarray(points, dtype=float))
        values = np.asarray(values, dtype=float).ravel()
        if points.shape[0] != values.size:
            raise ValueError("points and values must have the same length")
        h = cls(points.shape[1], capacity=len(values))
        for x, y in zip(points, values):
            h.insert(x, y)
        return h

    def __len__(self) -> int:
        return self._n

    @property
    def points(self) -> np.ndarray:
        return self._x[: self._n]

    @property
    def values(self) -> np.ndarray:
        return self._y[: self._n]

    @property
    def best_point(self) -> np.ndarray:
        return self._x[self.argmax]

    def __getitem__(self, i) -> Evaluation:
        if isinstance(i, slice):
            raise TypeError("use prefix() for sub-histories")
        if i < 0:
            i += self._n
        if not 0 <= i < self._n:
            raise IndexError(i)
        return Evaluation(self._x[i].copy(), float(self._y[i]))

    def __iter__(self):
        for i in range(self._n):
            yield self[i]

    def prefix(self, t: int) -> "EvaluationHistory":
        """A fresh history holding the first ``t`` evaluations."""
        return EvaluationHistory.from_arrays(self.points[:t], self.values[:t])

    def insert(self, point, value) -> None:
        x = as_point(point, self.dim)
        y = float(value)
        if not math.isfinite(y):
            raise ValueError(f"non-finite value {value!r} at {x}")
        n = self._n
        if n == self._x.shape[0]:
            self._x = np.concatenate([self._x, np.empty_like(self._x)])
            self._y = np.concatenate([self._y, np.empty_like(self._y)])
        if n:
            dist = np.sqrt(((self._x[:n] - x) ** 2).sum(axis=1))
            gaps = np.abs(self._y[:n] - y)
            zero = dist == 0.0
            if zero.any():
                self.degenerate_pairs += int(zero.sum())
                if np.any(gaps[zero] > 0.0):
                    self.inconsistent = True
                warnings.warn(
                    f"duplicate evaluation point {x}; zero-distance pair skipped",
                    DegeneratePairWarning,
                    stacklevel=3,
                )
                dist, gaps = dist[~zero], gaps[~zero]
            if dist.size:
                self.cached_max_slope = max(self.cached_max_slope, float(np.max(gaps / dist)))
        self._x[n] = x
        self._y[n] = y
        self._n = n + 1
        if y > self.cached_max:
            self.cached_max = y
            self.argmax = n
        self.cached_min = min(self.cached_min, y)


def max_slope_insert(history: EvaluationHistory, e: Evaluation) -> EvaluationHistory:
    history.insert(e.point, e.value)
    return history


def pairwise_max_slope(points, values) -> float:
    """O(t^2) reference computation of max_{i != j} |f_i - f_j| / ||x_i - x_j||."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    values = np.asarray(values, dtype=float)
    best = 0.0
    for i in range(len(values)):
        for j in range(i + 1, len(values)):
            d = float(np.linalg.norm(points[i] - points[j]))
            if d > 0.0:
                best = max(best, abs(values[i] - values[j]) / d)
    return best


def upper_bound_batch(points, values, k: float, xs) -> np.ndarray:
    """Vectorised UB over rows of ``xs`` (shape (m, d))."""
    xs = np.atleast_2d(xs)
    if len(values) == 0:
        raise ValueError("upper bound needs at least one evaluation")
    return np.min(values[None, :] + k * cdist(xs, points), axis=1)


def upper_bound(history: EvaluationHistory, k: float, x) -> float:
    if len(history) == 0:
        raise ValueError("upper bound needs at least one evaluation")
    if k < 0:
        raise ValueError("k must be non-negative")
    x = as_point(x, history.dim)
    return float(upper_bound_batch(history.points, history.values, k, x[None, :])[0])


def accepts(history: EvaluationHistory, k: float, x) -> bool:
    """Decision rule: True iff ``x`` is still a potential maximizer for constant ``k``."""
    return upper_bound(history, k, x) >= history.cached_max


@dataclass(frozen=True)
class LipschitzMesh:
    """Geometric grid ``k_i = (1 + alpha)**i`` over the integers ``i``."""

    alpha: float

    def __post_init__(self):
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise ValueError(f"alpha must be positive, got {self.alpha}")

    @classmethod
    def default_for(cls, dim: int) -> "LipschitzMesh":
        return cls(0.01 / dim)

    def value(self, i: int) -> float:
        return (1.0 + self.alpha) ** i

    def index_of(self, slope: float) -> int:
        """Smallest ``i`` with ``k_i >= slope`` (slope > 0)."""
        i = math.ceil(math.log(slope) / math.log1p(self.alpha))
        # log rounding can miss the boundary by one step either way
        while self.value(i) < slope:
            i += 1
        while self.value(i - 1) >= slope:
            i -= 1
        return i


def mesh_round_up(mesh: LipschitzMesh, slope: float) -> float:
    if slope < 0 or math.isnan(slope):
        raise ValueError(f"slope must be non-negative, got {slope}")
    if slope == 0:
        return 0.0
    return mesh.value(mesh.index_of(slope))
