"""Ask/tell engines for pure random search, LIPO and AdaLIPO, and a run driver."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .geometry import BoxDomain, as_point, make_rng
from .lipschitz import EvaluationHistory, LipschitzMesh, mesh_round_up
from .region import PotentialMaximizerCover, sample_potential_maximizer


class Kind(str, enum.Enum):
    PRS = "prs"
    LIPO = "lipo"
    ADALIPO = "adalipo"


@dataclass(frozen=True)
class OptimizerConfig:
    """Algorithm choice and its parameters.

    ``mesh=None`` for AdaLIPO means the default ``alpha = 0.01 / d``, resolved
    once the domain dimension is known.
    """

    kind: Kind
    k: float | None = None
    p: float = 0.1
    mesh: LipschitzMesh | None = None
    max_rejects: int = 100_000
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.kind is Kind.LIPO and (self.k is None or not self.k >= 0):
            raise ValueError("LIPO needs a Lipschitz constant k >= 0")
        if self.kind is Kind.ADALIPO and not 0 < self.p < 1:
            raise ValueError("AdaLIPO needs an exploration probability 0 < p < 1")
        if self.max_rejects < 1:
            raise ValueError("max_rejects must be >= 1")

    @classmethod
    def prs(cls, seed: int = 0) -> "OptimizerConfig":
        return cls(Kind.PRS, seed=seed)

    @classmethod
    def lipo(cls, k: float, seed: int = 0, **kw) -> "OptimizerConfig":
        return cls(Kind.LIPO, k=k, seed=seed, **kw)

    @classmethod
    def adalipo(cls, p: float = 0.1, alpha: float | None = None, seed: int = 0,
                **kw) -> "OptimizerConfig":
        mesh = None if alpha is None else LipschitzMesh(alpha)
        return cls(Kind.ADALIPO, p=p, mesh=mesh, seed=seed, **kw)

    def with_seed(self, seed: int) -> "OptimizerConfig":
        return OptimizerConfig(self.kind, self.k, self.p, self.mesh, self.max_rejects, seed)

    @property
    def label(self) -> str:
        if self.kind is Kind.PRS:
            return "prs"
        if self.kind is Kind.LIPO:
            return f"lipo:{self.k:g}"
        if self.mesh is None:
            return f"adalipo:{self.p:g}"
        return f"adalipo:{self.p:g},{self.mesh.alpha:g}"


@dataclass(frozen=True)
class StepRecord:
    """What happened at one evaluation. ``explore`` is None on the first step."""

    explore: bool | None
    k_hat: float
    rejects: int
    fallback: bool


class Optimizer:
    """One run's state. Call ``ask`` for a point, evaluate it, then ``tell``.

    >>> opt = Optimizer(OptimizerConfig.lipo(k=1.0, seed=3), BoxDomain.cube(0, 1, 2))
    >>> x = opt.ask(); opt.tell(x, -float(np.sum(x ** 2)))
    >>> len(opt.history)
    1
    """

    def __init__(self, config: OptimizerConfig, domain: BoxDomain):
        self.config = config
        self.domain = domain
        self.rng = make_rng(config.seed)
        self.history = EvaluationHistory(domain.dim, capacity=256)
        self.mesh = config.mesh or LipschitzMesh.default_for(domain.dim)
        self.k_hat = 0.0
        self.trace: list[StepRecord] = []
        self._pending: tuple[np.ndarray, bool | None, int, bool] | None = None
        self._cover: PotentialMaximizerCover | None = None

    @property
    def k(self) -> float:
        """Constant used by the decision rule at the next exploitation step."""
        if self.config.kind is Kind.LIPO:
            return float(self.config.k)
        return self.k_hat

    def _cover_for(self, k: float) -> PotentialMaximizerCover:
        # a cover built for a larger constant is still valid, just looser
        if self._cover is None or self._cover.k < k:
            self._cover = PotentialMaximizerCover(self.domain, k)
        return self._cover

    def _exploit(self):
        prop = sample_potential_maximizer(
            self._cover_for(self.k), self.history, self.k, self.rng, self.config.max_rejects
        )
        return prop.point, prop.rejects, prop.fallback

    def ask(self) -> np.ndarray:
        if self._pending is not None:
            return self._pending[0].copy()
        kind = self.config.kind
        if len(self.history) == 0 or kind is Kind.PRS:
            x, explore, rejects, fb = self.domain.sample(self.rng), None, 0, False
            if kind is Kind.PRS and len(self.history):
                explore = True
        elif kind is Kind.LIPO:
            explore = False
            x, rejects, fb = self._exploit()
        else:
            # one Bernoulli draw per step whichever branch follows
            explore = bool(self.rng.random() < self.config.p)
            if explore:
                x, rejects, fb = self.domain.sample(self.rng), 0, False
            else:
                x, rejects, fb = self._exploit()
        self._pending = (x, explore, rejects, fb)
        return x.copy()

    def tell(self, point, value) -> None:
        point = as_point(point, self.domain.dim)
        value = float(value)
        if not math.isfinite(value):
            raise ValueError(f"objective returned {value!r} at {point.tolist()}")
        self.history.insert(point, value)
        if self.config.kind is Kind.ADALIPO:
            self.k_hat = mesh_round_up(self.mesh, self.history.cached_max_slope)
        if self._pending is not None:
            _, explore, rejects, fb = self._pending
        else:
            explore, rejects, fb = None, 0, False
        self._pending = None
        self.trace.append(StepRecord(explore, self.k_hat, rejects, fb))


def ask(state: Optimizer) -> np.ndarray:
    return state.ask()


def tell(state: Optimizer, point, value) -> Optimizer:
    state.tell(point, value)
    return state


@dataclass
class RunResult:
    history: EvaluationHistory
    best_index: int
    best_value: float
    trace: list[StepRecord] = field(repr=False)

    @property
    def best_point(self) -> np.ndarray:
        return self.history.points[self.best_index].copy()

    @property
    def values(self) -> np.ndarray:
        return self.history.values.copy()

    @property
    def fallbacks(self) -> int:
        return sum(r.fallback for r in self.trace)

    @property
    def k_hat(self) -> float:
        return self.trace[-1].k_hat if self.trace else 0.0


def run(
    config: OptimizerConfig,
    objective: Callable[[np.ndarray], float],
    domain: BoxDomain,
    n: int,
) -> RunResult:
    """Spend ``n`` evaluations of ``objective`` and return the full record."""
    if n < 1:
        raise ValueError("budget n must be >= 1")
    opt = Optimizer(config, domain)
    for _ in range(n):
        x = opt.ask()
        y = objective(x)
        try:
            y = float(y)
        except (TypeError, ValueError):
            raise ValueError(f"objective returned non-scalar {y!r} at {x.tolist()}") from None
        opt.tell(x, y)
    h = opt.history
    return RunResult(h, h.argmax, h.cached_max, opt.trace)
