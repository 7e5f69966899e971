"""Closed-form rate bounds, the slope coefficient Gamma, covering radii and Condition 1 checks.

Bounds are returned as computed, even when they exceed ``k * diam`` and say
nothing; callers that want a clamp can apply one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np
from scipy.spatial import cKDTree

from .geometry import BoxDomain, diameter, inradius, make_rng
from .objectives import ObjectiveSpec


@dataclass(frozen=True)
class BoundQuery:
    """Every symbol that appears in the bounds. Unused fields keep their defaults."""

    n: int
    delta: float
    d: int
    k: float = 1.0
    diam: float = 1.0
    rad: float = 0.5
    kappa: float = 1.0
    c_kappa: float = 1.0
    D: float = 1.0
    p: float = 0.1
    gamma: float = 1.0

    def __post_init__(self):
        if self.n < 0 or self.d < 1:
            raise ValueError("need n >= 0 and d >= 1")
        if not 0 < self.delta <= 1:
            raise ValueError(f"delta must lie in (0, 1], got {self.delta}")
        if self.k < 0 or self.diam <= 0 or self.rad <= 0 or self.D <= 0:
            raise ValueError("need k >= 0 and positive diam, rad, D")
        if self.kappa < 1 or self.c_kappa <= 0:
            raise ValueError("need kappa >= 1 and c_kappa > 0")
        if not 0 < self.p <= 1 or not 0 < self.gamma <= 1:
            raise ValueError("need p and gamma in (0, 1]")

    @classmethod
    def for_domain(cls, domain: BoxDomain, n: int, delta: float, **kw) -> "BoundQuery":
        return cls(n=n, delta=delta, d=domain.dim, diam=diameter(domain), rad=inradius(domain), **kw)


def prs_covering_bound(q: BoundQuery) -> float:
    """Covering radius of n uniform points, with probability at least 1 - delta."""
    return q.diam * ((math.log(q.n / q.delta) + q.d * math.log(q.d)) / q.n) ** (1 / q.d)


def lipo_gap_bound(q: BoundQuery) -> float:
    """LIPO optimisation gap on Lip(k), with probability at least 1 - delta."""
    return q.k * q.diam * (math.log(1 / q.delta) / q.n) ** (1 / q.d)


def lipo_spike_lower(q: BoundQuery) -> float:
    """Gap that some k-Lipschitz function forces on LIPO, with probability at least 1 - delta."""
    return q.k * q.rad * (q.delta / q.n) ** (1 / q.d)


def _fast_rate_constant(q: BoundQuery) -> float:
    return (q.c_kappa * q.D ** (q.kappa - 1) / (8 * q.k)) ** q.d


def fast_rate_bound(q: BoundQuery) -> float:
    """LIPO gap under the (kappa, c_kappa) decreasing condition.

    Exponential in n when kappa = 1, polynomial when kappa > 1.
    """
    C = _fast_rate_constant(q)
    denom = math.log(q.n / q.delta) + 2 * (2 * math.sqrt(q.d)) ** q.d
    if q.kappa == 1:
        return q.k * q.diam * math.exp(-C * q.n * math.log(2) / denom)
    growth = 2 ** (q.d * (q.kappa - 1)) - 1
    power = -q.kappa / (q.d * (q.kappa - 1))
    return q.k * q.diam * 2 ** q.kappa / 2 * (1 + C * q.n * growth / denom) ** power


def exp_lower_bound(q: BoundQuery) -> float:
    """Gap that no algorithm avoids under the decreasing condition (probability 1 - delta)."""
    L = math.log(1 / q.delta)
    return q.c_kappa * q.rad ** q.kappa * math.exp(
        -(q.kappa / q.d) * (q.n + math.sqrt(2 * q.n * L) + L)
    )


def minimax_constants(d: int, diam: float, rad: float) -> tuple[float, float]:
    """Constants (c1, c2) of the minimax rate over Lipschitz functions."""
    if d < 1 or diam <= 0 or rad <= 0:
        raise ValueError("need d >= 1 and positive diam, rad")
    return rad / (8 * math.sqrt(d)), diam * math.factorial(d)


def adalipo_gap_bound(q: BoundQuery) -> float:
    """AdaLIPO gap with probability 1 - delta; ``q.k`` plays the mesh value above k*.

    gamma = 1 follows the ln(0) = -inf convention, dropping the Gamma term.
    """
    lead = 5 / q.p
    if q.gamma < 1:
        lead += 2 * math.log(q.delta / 3) / (q.p * math.log1p(-q.gamma))
    return q.k * q.diam * lead ** (1 / q.d) * (math.log(3 / q.delta) / q.n) ** (1 / q.d)


def gamma_estimate(spec: ObjectiveSpec, k: float, m: int, rng=None) -> float:
    """Fraction of m uniform pairs whose slope exceeds k (coincident pairs redrawn)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    rng = make_rng(rng)
    a = spec.domain.sample(rng, m)
    b = spec.domain.sample(rng, m)
    dist = np.linalg.norm(a - b, axis=1)
    bad = np.flatnonzero(dist == 0)
    while bad.size:
        b[bad] = spec.domain.sample(rng, bad.size)
        dist[bad] = np.linalg.norm(a[bad] - b[bad], axis=1)
        bad = bad[dist[bad] == 0]
    slope = np.abs(spec.batch(a) - spec.batch(b)) / dist
    return float(np.mean(slope > k))


def _grid_chunks(domain: BoxDomain, per_dim: int, chunk: int = 1 << 18) -> Iterator[np.ndarray]:
    """Nodes of the regular grid (corners included) in blocks of at most ``chunk`` rows."""
    if per_dim < 2:
        raise ValueError("grid_per_dim must be >= 2")
    axes = [np.linspace(lo, hi, per_dim) for lo, hi in zip(domain.lower, domain.upper)]
    total = per_dim ** domain.dim
    for start in range(0, total, chunk):
        idx = np.unravel_index(np.arange(start, min(start + chunk, total)), (per_dim,) * domain.dim)
        yield np.column_stack([ax[i] for ax, i in zip(axes, idx)])


def grid_slack(domain: BoxDomain, grid_per_dim: int) -> float:
    """Half-diagonal of a grid cell: the true covering radius is at most the grid one plus this."""
    return 0.5 * float(np.linalg.norm(domain.widths / (grid_per_dim - 1)))


def covering_radius(points, domain: BoxDomain, grid_per_dim: int) -> float:
    """Largest distance from a grid node to the nearest point (grid estimate of the sup)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.size == 0:
        raise ValueError("need at least one point")
    tree = cKDTree(pts)
    return float(max(tree.query(g)[0].max() for g in _grid_chunks(domain, grid_per_dim)))


def check_decreasing_condition(spec: ObjectiveSpec, grid_per_dim: int,
                               kappa: float | None = None, c_kappa: float | None = None,
                               slack: float = 1e-9) -> bool:
    """Whether f(x*) - f(x) >= c_kappa * ||x - x*||^kappa at every grid node.

    ``kappa``/``c_kappa`` default to the spec's own metadata.
    """
    if spec.known_argmax is None or (spec.condition_kappa is None and None in (kappa, c_kappa)):
        raise ValueError(f"{spec.name} has no decreasing-condition metadata")
    kap, c = spec.condition_kappa or (None, None)
    kap = kappa if kappa is not None else kap
    c = c_kappa if c_kappa is not None else c
    xs = np.asarray(spec.known_argmax, dtype=float)
    top = float(spec.batch(xs)[0])
    for g in _grid_chunks(spec.domain, grid_per_dim):
        drop = top - spec.batch(g)
        need = c * np.linalg.norm(g - xs, axis=1) ** kap
        if np.any(drop < need - slack):
            return False
    return True
