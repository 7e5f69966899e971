"""Axis-aligned box domains, uniform sampling and Euclidean metric helpers."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def as_point(x, dim: int | None = None) -> np.ndarray:
    """Coerce ``x`` to a finite 1-d float array, optionally checking its length."""
    p = np.asarray(x, dtype=float)
    if p.ndim == 0:
        p = p.reshape(1)
    if p.ndim != 1 or p.size < 1:
        raise ValueError(f"a point must be a non-empty 1-d vector, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise ValueError(f"point has non-finite coordinates: {p}")
    if dim is not None and p.size != dim:
        raise ValueError(f"dimension mismatch: expected {dim}, got {p.size}")
    return p


@dataclass(frozen=True, eq=False)
class BoxDomain:
    """The box ``[lower[0], upper[0]] x ... x [lower[d-1], upper[d-1]]``."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lower, dtype=float)).copy()
        hi = np.atleast_1d(np.asarray(self.upper, dtype=float)).copy()
        if lo.ndim != 1 or lo.shape != hi.shape or lo.size < 1:
            raise ValueError("lower and upper must be 1-d vectors of equal length >= 1")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ValueError("domain bounds must be finite")
        if not np.all(lo < hi):
            raise ValueError("domain needs lower[i] < upper[i] in every coordinate")
        lo.flags.writeable = False
        hi.flags.writeable = False
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def cube(cls, low: float, high: float, dim: int) -> "BoxDomain":
        return cls(np.full(dim, float(low)), np.full(dim, float(high)))

    @property
    def dim(self) -> int:
        return self.lower.size

    @property
    def widths(self) -> np.ndarray:
        return self.upper - self.lower

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)

    @property
    def volume(self) -> float:
        return float(np.prod(self.widths))

    def contains(self, x) -> bool:
        p = np.asarray(x, dtype=float)
        if p.shape[-1:] != (self.dim,):
            return False
        return bool(np.all((p >= self.lower) & (p <= self.upper)))

    def sample(self, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
        """Uniform draws; one point consumes exactly ``dim`` doubles from ``rng``."""
        shape = (self.dim,) if size is None else (size, self.dim)
        return self.lower + self.widths * rng.random(shape)

    def __eq__(self, other):
        if not isinstance(other, BoxDomain):
            return NotImplemented
        return np.array_equal(self.lower, other.lower) and np.array_equal(self.upper, other.upper)

    def __hash__(self):
        return hash((self.lower.tobytes(), self.upper.tobytes()))

    def __repr__(self):
        return f"BoxDomain(lower={self.lower.tolist()}, upper={self.upper.tolist()})"


def uniform_sample(domain: BoxDomain, rng: np.random.Generator) -> np.ndarray:
    return domain.sample(rng)


def distance(p, q) -> float:
    p = as_point(p)
    q = as_point(q)
    if p.size != q.size:
        raise ValueError(f"dimension mismatch: {p.size} vs {q.size}")
    return float(np.linalg.norm(p - q))


def diameter(domain: BoxDomain) -> float:
    return float(np.linalg.norm(domain.widths))


def inradius(domain: BoxDomain) -> float:
    return float(np.min(domain.widths) / 2.0)


def max_distance_from(domain: BoxDomain, x) -> float:
    """Largest distance from ``x`` to any point of the box (attained at a corner)."""
    x = as_point(x, domain.dim)
    far = np.maximum(np.abs(x - domain.lower), np.abs(domain.upper - x))
    return float(np.linalg.norm(far))


def make_rng(seed) -> np.random.Generator:
    """Seedable stream; pass a Generator through unchanged."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)
