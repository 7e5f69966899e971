"""Benchmark objectives: the test functions, the analysis functions and a KRR CV objective.

Every evaluator is vectorised over leading axes, so ``f(x)`` works on a single
point of shape (d,) and on a batch of shape (m, d).
"""
from __future__ import annotations

import csv
import logging
import math
import warnings
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy import linalg

from .geometry import BoxDomain, as_point

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ObjectiveSpec:
    """A function to maximise on a box, with whatever ground truth is known about it."""

    name: str
    domain: BoxDomain
    evaluator: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    known_max: float | None = None
    known_argmax: np.ndarray | None = None
    known_lipschitz: float | None = None
    condition_kappa: tuple[float, float] | None = None

    @property
    def dim(self) -> int:
        return self.domain.dim

    def __call__(self, x) -> float:
        # hot path for the optimizers: no domain check
        return float(self.evaluator(np.asarray(x, dtype=float)))

    def batch(self, xs) -> np.ndarray:
        return np.asarray(self.evaluator(np.atleast_2d(np.asarray(xs, dtype=float))), dtype=float)


def evaluate(spec: ObjectiveSpec, x) -> float:
    """Value at ``x``; points outside the domain are an error, never clamped."""
    p = as_point(x, spec.dim)
    if not spec.domain.contains(p):
        raise ValueError(f"{p.tolist()} lies outside the domain of {spec.name}")
    return spec(p)


# -- test functions ------------------------------------------------------------

def holder_table(x):
    x1, x2 = x[..., 0], x[..., 1]
    r = np.sqrt(x1 * x1 + x2 * x2)
    return np.abs(np.sin(x1)) * np.abs(np.cos(x2)) * np.exp(np.abs(1.0 - r / np.pi))


def rosenbrock(x):
    a, b = x[..., :-1], x[..., 1:]
    return -np.sum(100.0 * (b - a * a) ** 2 + (a - 1.0) ** 2, axis=-1)


SPHERE_CENTER = math.pi / 16


def sphere(x):
    return -np.sqrt(np.sum((x - SPHERE_CENTER) ** 2, axis=-1))


LINEAR_SLOPE_W = 10.0 ** (np.arange(4) / 4.0)


def linear_slope(x):
    return (x - 5.0) @ LINEAR_SLOPE_W


def deb_n1(x):
    return np.mean(np.sin(5.0 * np.pi * x) ** 6, axis=-1)


def sphere_norm(x):
    return 1.0 - np.sqrt(np.sum(x * x, axis=-1))


def largest_coordinate(x):
    return 1.0 - np.max(np.abs(x), axis=-1)


def linear_1d(x):
    return x[..., 0]


# Grid maximum on 4001 x 4001 nodes (-8.055, -9.665) -> 19.2085008705,
# refined by a Nelder-Mead polish from the best node. Four symmetric maximizers.
HOLDER_TABLE_MAX = 19.208502567886747
HOLDER_TABLE_ARGMAX = (-8.05502349, -9.66459002)


def _table_specs() -> dict[str, ObjectiveSpec]:
    w_norm = float(np.linalg.norm(LINEAR_SLOPE_W))
    return {
        "holder_table": ObjectiveSpec(
            "holder_table", BoxDomain.cube(-10, 10, 2), holder_table,
            known_max=HOLDER_TABLE_MAX, known_argmax=np.array(HOLDER_TABLE_ARGMAX),
        ),
        "rosenbrock": ObjectiveSpec(
            "rosenbrock", BoxDomain.cube(-2.048, 2.048, 3), rosenbrock,
            known_max=0.0, known_argmax=np.ones(3),
        ),
        "sphere": ObjectiveSpec(
            "sphere", BoxDomain.cube(0, 1, 4), sphere,
            known_max=0.0, known_argmax=np.full(4, SPHERE_CENTER),
            known_lipschitz=1.0, condition_kappa=(1.0, 1.0),
        ),
        # sum_i w_i (5 - x_i) >= min(w) * ||5 - x||_1 >= ||5 - x||_2 with min(w) = 1
        "linear_slope": ObjectiveSpec(
            "linear_slope", BoxDomain.cube(-5, 5, 4), linear_slope,
            known_max=0.0, known_argmax=np.full(4, 5.0),
            known_lipschitz=w_norm, condition_kappa=(1.0, 1.0),
        ),
        "deb_n1": ObjectiveSpec("deb_n1", BoxDomain.cube(-5, 5, 5), deb_n1, known_max=1.0),
    }


def make_sphere_norm(d: int = 2, radius: float = 1.0) -> ObjectiveSpec:
    return ObjectiveSpec(
        "sphere_norm", BoxDomain.cube(-radius, radius, d), sphere_norm,
        known_max=1.0, known_argmax=np.zeros(d), known_lipschitz=1.0,
        condition_kappa=(1.0, 1.0),
    )


def make_largest_coordinate(d: int = 2, radius: float = 1.0) -> ObjectiveSpec:
    # ||x||_inf >= ||x||_2 / sqrt(d); the function is 1-Lipschitz for the l2 norm
    return ObjectiveSpec(
        "largest_coordinate", BoxDomain.cube(-radius, radius, d), largest_coordinate,
        known_max=1.0, known_argmax=np.zeros(d), known_lipschitz=1.0,
        condition_kappa=(1.0, 1.0 / math.sqrt(d)),
    )


def make_linear_1d() -> ObjectiveSpec:
    return ObjectiveSpec(
        "linear_1d", BoxDomain.cube(0, 1, 1), linear_1d,
        known_max=1.0, known_argmax=np.ones(1), known_lipschitz=1.0,
        condition_kappa=(1.0, 1.0),
    )


_FACTORIES = {
    "sphere_norm": make_sphere_norm,
    "largest_coordinate": make_largest_coordinate,
    "linear_1d": make_linear_1d,
}

PROBLEMS = (
    "holder_table", "rosenbrock", "sphere", "linear_slope", "deb_n1",
    "sphere_norm", "largest_coordinate", "linear_1d",
)


def registry_lookup(name: str, **kwargs) -> ObjectiveSpec:
    """Spec for a registered problem.

    ``sphere_norm`` and ``largest_coordinate`` accept ``d`` and ``radius``
    (defaults 2 and 1); the other names take no options.
    """
    if name in _FACTORIES:
        return _FACTORIES[name](**kwargs)
    table = _table_specs()
    if name not in table:
        raise KeyError(f"unknown problem {name!r}; known: {', '.join(PROBLEMS)}")
    if kwargs:
        raise TypeError(f"{name} takes no options, got {sorted(kwargs)}")
    return table[name]


# -- kernel ridge regression ---------------------------------------------------

@dataclass(frozen=True, eq=False)
class Dataset:
    features: np.ndarray
    targets: np.ndarray
    name: str
    dropped_rows: int = 0

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.features, dtype=float))
        y = np.asarray(self.targets, dtype=float).ravel()
        if X.shape[0] != y.size:
            raise ValueError(f"{X.shape[0]} feature rows but {y.size} targets")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise ValueError("dataset contains non-finite entries")
        X.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "targets", y)

    def __len__(self) -> int:
        return self.targets.size


def _parse(cell: str) -> float:
    try:
        return float(cell)
    except ValueError:
        return math.nan


def load_dataset(path, name: str | None = None) -> Dataset:
    """Read a numeric CSV whose last column is the target.

    A first row that does not parse as numbers is taken as a header. Rows with
    missing or non-numeric cells are dropped. Features are standardised to zero
    mean and unit (population) variance, the target is centred, and constant
    feature columns are dropped with a warning.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if rows and any(math.isnan(_parse(c)) for c in rows[0]):
        rows = rows[1:]
    if not rows:
        raise ValueError(f"{path}: no data rows")
    width = max(len(r) for r in rows)
    if width < 2:
        raise ValueError(f"{path}: need at least one feature column and a target column")
    table = np.full((len(rows), width), math.nan)
    for i, r in enumerate(rows):
        table[i, : len(r)] = [_parse(c) for c in r]
    ok = np.all(np.isfinite(table), axis=1)
    dropped = int((~ok).sum())
    if dropped:
        log.info("%s: dropped %d row(s) with missing values", path, dropped)
    table = table[ok]
    if table.shape[0] == 0:
        raise ValueError(f"{path}: zero usable rows")
    X, y = table[:, :-1], table[:, -1]
    sd = X.std(axis=0)
    flat = sd == 0.0
    if flat.any():
        warnings.warn(f"{path}: dropping constant feature column(s) {np.flatnonzero(flat).tolist()}")
        X, sd = X[:, ~flat], sd[~flat]
    if X.shape[1] == 0:
        raise ValueError(f"{path}: no non-constant feature columns")
    X = (X - X.mean(axis=0)) / sd
    return Dataset(X, y - y.mean(), name or path.stem, dropped)


def fold_assignment(dataset: Dataset, n_folds: int = 10) -> np.ndarray:
    """Fold label per row, independent of the row order in which the data arrived."""
    rows = np.column_stack([dataset.features, dataset.targets])
    canon = np.lexsort(rows.T[::-1])
    seed = zlib.crc32(dataset.name.encode("utf-8"))
    order = canon[np.random.default_rng(seed).permutation(len(dataset))]
    folds = np.empty(len(dataset), dtype=np.intp)
    folds[order] = np.arange(len(dataset)) % n_folds
    return folds


def gaussian_kernel(U, V, sigma: float) -> np.ndarray:
    sq = np.sum(U * U, 1)[:, None] + np.sum(V * V, 1)[None, :] - 2.0 * U @ V.T
    return np.exp(-np.maximum(sq, 0.0) / (2.0 * sigma * sigma))


KRR_DOMAIN = BoxDomain(np.array([-2.0, -5.0]), np.array([4.0, 5.0]))


def krr_cv_objective(dataset: Dataset, x, n_folds: int = 10) -> float:
    """Negated mean over folds of the held-out sum of squared errors.

    ``x = (log10 sigma, log10 lambda)``. Each fold fits the minimiser of
    ``(1/m) sum (g(X_i) - Y_i)^2 + lambda ||g||^2`` over the m training rows,
    i.e. ``alpha = (K + m lambda I)^{-1} y``.
    """
    x = as_point(x, 2)
    if len(dataset) < n_folds:
        raise ValueError(f"need at least {n_folds} rows, got {len(dataset)}")
    sigma, lam = 10.0 ** x[0], 10.0 ** x[1]
    X, y = dataset.features, dataset.targets
    folds = fold_assignment(dataset, n_folds)
    total = 0.0
    for k in range(n_folds):
        test = folds == k
        Xtr, ytr = X[~test], y[~test]
        m = ytr.size
        K = gaussian_kernel(Xtr, Xtr, sigma)
        K[np.diag_indices(m)] += m * lam
        alpha = linalg.solve(K, ytr, assume_a="pos")
        resid = gaussian_kernel(X[test], Xtr, sigma) @ alpha - y[test]
        total += float(resid @ resid)
    return -total / n_folds


def make_krr_spec(dataset: Dataset) -> ObjectiveSpec:
    def f(x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            return krr_cv_objective(dataset, x)
        return np.array([krr_cv_objective(dataset, row) for row in x.reshape(-1, 2)]).reshape(x.shape[:-1])

    return ObjectiveSpec(f"krr:{dataset.name}", KRR_DOMAIN, f)


def resolve_problem(name: str) -> ObjectiveSpec:
    """Registry name, or ``csv:PATH`` for the KRR objective on a local dataset."""
    if name.startswith("csv:"):
        return make_krr_spec(load_dataset(name[4:]))
    return registry_lookup(name)
