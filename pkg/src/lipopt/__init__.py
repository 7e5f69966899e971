"""Lipschitz global optimisation: PRS, LIPO and AdaLIPO with their benchmark harness."""
from .geometry import BoxDomain, diameter, distance, inradius, make_rng, uniform_sample
from .lipschitz import (
    EvaluationHistory,
    LipschitzMesh,
    accepts,
    max_slope_insert,
    mesh_round_up,
    upper_bound,
)
from .objectives import ObjectiveSpec, evaluate, krr_cv_objective, load_dataset, registry_lookup
from .optimizers import Kind, Optimizer, OptimizerConfig, RunResult, ask, run, tell

__all__ = [
    "BoxDomain", "diameter", "distance", "inradius", "make_rng", "uniform_sample",
    "EvaluationHistory", "LipschitzMesh", "accepts", "max_slope_insert", "mesh_round_up",
    "upper_bound", "ObjectiveSpec", "evaluate", "krr_cv_objective", "load_dataset",
    "registry_lookup", "Kind", "Optimizer", "OptimizerConfig", "RunResult", "ask", "run", "tell",
]
