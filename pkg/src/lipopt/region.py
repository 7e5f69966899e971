"""Uniform sampling from the set of potential maximizers.

The set ``{x : UB(x) >= max_i f_i}`` is only known implicitly and can have tiny
volume once the optimizer closes in on a maximum, so drawing uniform points over
the whole domain until one passes the test stalls. Instead we keep a union of
boxes that provably contains the set and draw proposals uniformly from it.
A proposal is accepted with the exact decision rule, so an accepted point is
uniform on the potential maximizers no matter how fine the boxes are.

For a box ``B`` and any evaluation ``i``,

    max_{x in B} UB(x)  <=  f_i + k * max_{x in B} ||x - x_i||,

so a box is discarded as soon as one evaluation pushes that bound below the best
value. Each box remembers the few evaluations ("witnesses") that gave its
smallest bounds; children are bounded with their parent's witnesses only, which
keeps refinement cheap and the bound valid. With fixed ``k`` the target set only
shrinks as evaluations arrive, so the cover is kept and tightened across steps.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .geometry import BoxDomain
from .lipschitz import EvaluationHistory

N_WITNESSES = 24
# Boxes stop splitting once k * width is within this many ulps of the best value:
# below that, slopes between evaluations inside one box are rounding noise.
VALUE_ULPS = 1e6
_FULL_BUDGET = 1 << 17  # boxes * evaluations for an exhaustive bound


@numba.njit(cache=True)
def _far(c, h, p):
    """Distance from ``p`` to the farthest corner of the box (center ``c``, half-widths ``h``)."""
    acc = 0.0
    for j in range(c.shape[0]):
        t = abs(c[j] - p[j]) + h[j]
        acc += t * t
    return math.sqrt(acc)


@numba.njit(cache=True)
def _absorb(centers, halves, bounds, wit, wterm, points, values, k, start):
    """Fold evaluations ``start:`` into every box, each replacing its worst witness."""
    for m in range(centers.shape[0]):
        for i in range(start, values.shape[0]):
            term = values[i] + k * _far(centers[m], halves[m], points[i])
            if term < bounds[m]:
                bounds[m] = term
            slot = 0
            for w in range(1, wterm.shape[1]):
                if wterm[m, w] > wterm[m, slot]:
                    slot = w
            if term < wterm[m, slot]:
                wit[m, slot] = i
                wterm[m, slot] = term


@numba.njit(cache=True)
def _witness_terms(centers, halves, wit, points, values, k):
    out = np.full(wit.shape, np.inf)
    for m in range(centers.shape[0]):
        for w in range(wit.shape[1]):
            j = wit[m, w]
            if j >= 0:
                out[m, w] = values[j] + k * _far(centers[m], halves[m], points[j])
    return out


@numba.njit(cache=True)
def _dist(a, b):
    acc = 0.0
    for j in range(a.shape[0]):
        t = a[j] - b[j]
        acc += t * t
    return math.sqrt(acc)


@numba.njit(cache=True)
def _scan(xs, wit, points, values, k, best, fb_ub):
    """Test proposals in order; return (first accepted index or -1, fallback index, its UB).

    Each proposal is first bounded with its box's witnesses and then, if it can
    still pass or beat the running fallback, against every evaluation. A bound is
    abandoned as soon as it drops to the fallback level, since it can then neither
    be accepted (fallback < best) nor replace the fallback.
    """
    fb_i = -1
    for i in range(xs.shape[0]):
        x = xs[i]
        m = math.inf
        for w in range(wit.shape[1]):
            j = wit[i, w]
            if j >= 0:
                m = min(m, values[j] + k * _dist(x, points[j]))
        if m <= fb_ub:
            continue
        for j in range(values.shape[0]):
            m = min(m, values[j] + k * _dist(x, points[j]))
            if m <= fb_ub:
                break
        if m <= fb_ub:
            continue
        if m >= best:
            return i, fb_i, fb_ub
        fb_i, fb_ub = i, m
    return -1, fb_i, fb_ub


@dataclass
class Proposal:
    point: np.ndarray | None
    rejects: int
    fallback: bool


class PotentialMaximizerCover:
    """Box cover of ``{x : UB_k(x) >= best}`` for a fixed constant ``k``."""

    def __init__(self, domain: BoxDomain, k: float, min_rel_width: float = 1e-9,
                 n_witnesses: int = N_WITNESSES):
        if k < 0:
            raise ValueError("k must be non-negative")
        self.domain = domain
        self.k = float(k)
        self.min_half = 0.5 * min_rel_width * domain.widths
        self.n_wit = n_witnesses
        self.reset()

    def reset(self) -> None:
        """Back to the single box covering the whole domain."""
        self.centers = self.domain.center[None, :].copy()
        self.halves = (0.5 * self.domain.widths)[None, :].copy()
        self.bounds = np.array([math.inf])
        self.wit = np.full((1, self.n_wit), -1, dtype=np.intp)
        self.wterm = np.full((1, self.n_wit), math.inf)
        self.n_seen = 0

    def __len__(self) -> int:
        return self.centers.shape[0]

    @property
    def volumes(self) -> np.ndarray:
        return np.prod(2.0 * self.halves, axis=1)

    def volume_fraction(self) -> float:
        return float(self.volumes.sum() / self.domain.volume)

    def floor(self, best: float) -> np.ndarray:
        """Smallest half-widths worth splitting given the current best value."""
        if self.k == 0.0:
            return np.full_like(self.min_half, math.inf)
        by_value = VALUE_ULPS * np.finfo(float).eps * abs(best) / self.k
        return np.maximum(self.min_half, by_value)

    def at_floor(self, best: float) -> bool:
        """True when no box can be bisected any further."""
        return bool(np.all(self.halves <= self.floor(best)))

    def sync(self, history: EvaluationHistory) -> None:
        """Fold unseen evaluations into every box's bound and drop dead boxes."""
        if self.n_seen < len(history):
            _absorb(self.centers, self.halves, self.bounds, self.wit, self.wterm,
                    history.points, history.values, self.k, self.n_seen)
        self.n_seen = len(history)
        keep = self.bounds >= history.cached_max
        if not keep.all():
            self._take(keep)

    def _take(self, sel) -> None:
        self.centers = self.centers[sel]
        self.halves = self.halves[sel]
        self.bounds = self.bounds[sel]
        self.wit = self.wit[sel]
        self.wterm = self.wterm[sel]

    def split(self, cells, history: EvaluationHistory) -> bool:
        """Bisect the given boxes along their longest side (relative to the domain).

        Returns False when none of them is still wider than the resolution floor.
        """
        cells = np.unique(np.asarray(cells, dtype=np.intp))
        rel = self.halves[cells] / self.floor(history.cached_max)
        cells = cells[np.max(rel, axis=1) > 1.0]
        if cells.size == 0:
            return False
        axis = np.argmax(rel[np.max(rel, axis=1) > 1.0], axis=1)
        r = np.arange(cells.size)
        h = self.halves[cells].copy()
        h[r, axis] *= 0.5
        lo = self.centers[cells].copy()
        hi = lo.copy()
        lo[r, axis] -= h[r, axis]
        hi[r, axis] += h[r, axis]
        cc = np.concatenate([lo, hi])
        ch = np.concatenate([h, h])
        wit = np.concatenate([self.wit[cells], self.wit[cells]])
        if 2 * cells.size * len(history) <= _FULL_BUDGET:
            # small enough to bound against every evaluation and pick fresh witnesses
            wit[:] = -1
            wterm = np.full(wit.shape, math.inf)
            bounds = np.full(cc.shape[0], math.inf)
            _absorb(cc, ch, bounds, wit, wterm, history.points, history.values, self.k, 0)
        else:
            wterm = _witness_terms(cc, ch, wit, history.points, history.values, self.k)
        parent = np.concatenate([self.bounds[cells], self.bounds[cells]])
        bounds = np.minimum(parent, wterm.min(axis=1))
        alive = bounds >= history.cached_max
        rest = np.ones(len(self), dtype=bool)
        rest[cells] = False
        self.centers = np.concatenate([self.centers[rest], cc[alive]])
        self.halves = np.concatenate([self.halves[rest], ch[alive]])
        self.bounds = np.concatenate([self.bounds[rest], bounds[alive]])
        self.wit = np.concatenate([self.wit[rest], wit[alive]])
        self.wterm = np.concatenate([self.wterm[rest], wterm[alive]])
        return True

    def propose(self, rng: np.random.Generator, size: int) -> tuple[np.ndarray, np.ndarray]:
        """``size`` points uniform on the union of boxes, with their box indices."""
        cum = np.cumsum(self.volumes)
        cell = np.searchsorted(cum, rng.random(size) * cum[-1], side="right")
        cell = np.minimum(cell, len(self) - 1)
        u = rng.random((size, self.domain.dim))
        x = self.centers[cell] + self.halves[cell] * (2.0 * u - 1.0)
        return np.clip(x, self.domain.lower, self.domain.upper), cell


def sample_potential_maximizer(
    cover: PotentialMaximizerCover,
    history: EvaluationHistory,
    k: float,
    rng: np.random.Generator,
    max_rejects: int,
    first_batch: int = 32,
    max_batch: int = 2048,
) -> Proposal:
    """Draw one point uniformly from ``{x : UB_k(x) >= best}``.

    ``cover`` must have been built for a constant ``>= k``. Proposals are tested
    with the exact rule in draw order and the first acceptance is returned. After
    ``max_rejects`` rejections the rejected proposal with the largest upper bound
    is returned instead, flagged as a fallback. The same fallback is taken early
    when every box sits at the resolution floor and a whole batch was rejected:
    the set is then below what double precision can sample from.
    """
    if cover.k < k:
        raise ValueError("cover was built for a smaller constant than requested")
    cover.sync(history)
    best = history.cached_max
    points, values = history.points, history.values
    rejects = 0
    fb_point, fb_ub = None, -math.inf
    batch = first_batch
    refine = True
    if len(cover) == 0:
        # the set is empty (k is too small for the data); draw plain uniform
        # proposals up to the cap so the fallback is the best of max_rejects
        cover.reset()
        cover.n_seen = len(history)
        refine = False
    while rejects < max_rejects:
        size = min(batch, max_rejects - rejects)
        xs, cell = cover.propose(rng, size)
        hit, j, ub = _scan(xs, cover.wit[cell], points, values, k, best, fb_ub)
        if hit >= 0:
            return Proposal(xs[hit], rejects + hit, False)
        rejects += size
        if j >= 0:
            fb_point, fb_ub = xs[j], ub
        if refine:
            cover.split(cell, history)
            if cover.at_floor(best):
                break
        batch = min(2 * batch, max_batch)
    return Proposal(fb_point, rejects, True)
