"""Benchmark harness: targets, stopping times and multi-seed aggregation, plus the ``bench`` CLI.

    bench --problem sphere --algo adalipo --algo prs --runs 100 --budget 1000
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from .geometry import make_rng
from .objectives import PROBLEMS, ObjectiveSpec, resolve_problem
from .optimizers import OptimizerConfig, run

log = logging.getLogger(__name__)

COLUMNS = ("problem", "algorithm", "target", "mean_tau", "std_tau",
           "fallback_rate", "f_target", "f_max", "f_avg")


class ConfigError(ValueError):
    """Bad user input: unknown problem, malformed algorithm, invalid numbers."""


@dataclass(frozen=True)
class ProtocolConfig:
    problem: str
    algorithms: tuple[OptimizerConfig, ...]
    runs: int = 100
    budget: int = 1000
    targets: tuple[float, ...] = (0.90, 0.95, 0.99)
    mc_samples: int = 1_000_000
    base_seed: int = 0
    jobs: int = 1
    output_path: str | None = None
    output_format: str = "csv"

    def __post_init__(self):
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        object.__setattr__(self, "targets", tuple(float(t) for t in self.targets))
        if not self.algorithms:
            raise ConfigError("at least one algorithm is needed")
        if self.runs < 1 or self.budget < 1 or self.mc_samples < 1 or self.jobs < 1:
            raise ConfigError("runs, budget, mc_samples and jobs must all be >= 1")
        if not all(0 < t < 1 for t in self.targets):
            raise ConfigError(f"targets must lie strictly in (0, 1), got {self.targets}")
        if self.output_format not in ("csv", "json"):
            raise ConfigError(f"unknown format {self.output_format!r}")


@dataclass(frozen=True)
class TargetReport:
    problem: str
    algorithm: str
    target: float
    mean_tau: float
    std_tau: float
    fallback_rate: float
    f_target_value: float
    f_max_used: float
    f_avg_used: float

    def row(self) -> dict:
        return {
            "problem": self.problem, "algorithm": self.algorithm, "target": self.target,
            "mean_tau": self.mean_tau, "std_tau": self.std_tau,
            "fallback_rate": self.fallback_rate, "f_target": self.f_target_value,
            "f_max": self.f_max_used, "f_avg": self.f_avg_used,
        }

    @classmethod
    def from_row(cls, r: dict) -> "TargetReport":
        return cls(r["problem"], r["algorithm"], float(r["target"]), float(r["mean_tau"]),
                   float(r["std_tau"]), float(r["fallback_rate"]), float(r["f_target"]),
                   float(r["f_max"]), float(r["f_avg"]))

    @property
    def key(self):
        return (self.problem, self.algorithm, self.target)


def estimate_average(spec: ObjectiveSpec, m: int, rng, chunk: int = 100_000) -> float:
    """Mean of ``m`` evaluations at uniform points."""
    if m < 1:
        raise ValueError("m must be >= 1")
    rng = make_rng(rng)
    total, done = 0.0, 0
    while done < m:
        size = min(chunk, m - done)
        vals = spec.batch(spec.domain.sample(rng, size))
        if not np.all(np.isfinite(vals)):
            raise ValueError(f"{spec.name} returned a non-finite value during averaging")
        total += float(vals.sum())
        done += size
    return total / m


def f_target(f_max: float, f_avg: float, t: float) -> float:
    """Value a run must reach to count as hitting target level ``t``."""
    if f_max < f_avg:
        raise ValueError(f"f_max {f_max} is below f_avg {f_avg}")
    return f_max - (f_max - f_avg) * (1.0 - t)


def stopping_time(values, target: float, n: int) -> int:
    """1-based index of the first value >= target, or ``n`` if none reaches it."""
    hit = np.flatnonzero(np.asarray(values, dtype=float)[:n] >= target)
    return int(hit[0]) + 1 if hit.size else n


@lru_cache(maxsize=8)
def _problem(name: str) -> ObjectiveSpec:
    return resolve_problem(name)


def _one_run(problem: str, config: OptimizerConfig, budget: int):
    spec = _problem(problem)
    res = run(config, spec, spec.domain, budget)
    return res.values, res.fallbacks


@dataclass
class _Runs:
    values: list = field(default_factory=list)
    fallbacks: int = 0


def run_protocol(config: ProtocolConfig) -> list[TargetReport]:
    """All runs of all algorithms, then per-target stopping-time statistics.

    Run ``r`` of every algorithm uses seed ``base_seed + r``, so algorithms are
    compared on paired streams and the result does not depend on ``jobs``.
    """
    spec = _problem(config.problem)
    tasks = [(config.problem, algo.with_seed(config.base_seed + r), config.budget)
             for algo in config.algorithms for r in range(config.runs)]
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            outs = list(pool.map(_one_run, *zip(*tasks), chunksize=max(1, len(tasks) // (4 * config.jobs))))
    else:
        outs = [_one_run(*t) for t in tasks]

    by_algo: dict[str, _Runs] = {}
    for (_, cfg, _), (values, fb) in zip(tasks, outs):
        acc = by_algo.setdefault(cfg.label, _Runs())
        acc.values.append(values)
        acc.fallbacks += fb

    pooled = max(float(np.max(v)) for acc in by_algo.values() for v in acc.values)
    if spec.known_max is not None:
        log.info("%s: using known max %.10g (best observed %.10g)", spec.name, spec.known_max, pooled)
        if pooled > spec.known_max:
            log.warning("%s: observed %.17g above the known max %.17g", spec.name, pooled, spec.known_max)
        f_max = spec.known_max
    else:
        f_max = pooled
    f_avg = estimate_average(spec, config.mc_samples, np.random.default_rng([config.base_seed, 1]))

    reports = []
    for label, acc in by_algo.items():
        fb_rate = acc.fallbacks / (config.runs * config.budget)
        for t in config.targets:
            y = f_target(f_max, f_avg, t)
            taus = np.array([stopping_time(v, y, config.budget) for v in acc.values], dtype=float)
            reports.append(TargetReport(config.problem, label, t, float(taus.mean()),
                                        float(taus.std()), fb_rate, y, f_max, f_avg))
    return sorted(reports, key=lambda r: r.key)


def format_report(reports, fmt: str = "csv") -> str:
    reports = sorted(reports, key=lambda r: r.key)
    if fmt == "json":
        return json.dumps([r.row() for r in reports], indent=2) + "\n"
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in reports:
        row = r.row()
        w.writerow([v if isinstance(v, str) else f"{v:.6g}" for v in (row[c] for c in COLUMNS)])
    return buf.getvalue()


def emit_report(reports, fmt: str = "csv", path=None) -> None:
    """Write the report to ``path``, or to stdout when ``path`` is None or ``-``."""
    text = format_report(reports, fmt)
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def load_report(path) -> list[TargetReport]:
    """Read back a report written in either format."""
    text = Path(path).read_text(encoding="utf-8")
    if text.lstrip().startswith("["):
        return [TargetReport.from_row(r) for r in json.loads(text)]
    return [TargetReport.from_row(r) for r in csv.DictReader(io.StringIO(text))]


def parse_algorithm(text: str, seed: int = 0) -> OptimizerConfig:
    """``prs``, ``lipo:K``, ``adalipo``, ``adalipo:P`` or ``adalipo:P,ALPHA``."""
    name, _, args = text.strip().partition(":")
    try:
        if name == "prs" and not args:
            return OptimizerConfig.prs(seed=seed)
        if name == "lipo" and args:
            return OptimizerConfig.lipo(float(args), seed=seed)
        if name == "adalipo":
            parts = [float(a) for a in args.split(",")] if args else []
            if len(parts) > 2:
                raise ValueError("too many parameters")
            return OptimizerConfig.adalipo(*parts, seed=seed)
    except ValueError as e:
        raise ConfigError(f"bad algorithm {text!r}: {e}") from None
    raise ConfigError(f"bad algorithm {text!r}; expected prs, lipo:K or adalipo[:p[,alpha]]")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="bench", description="Stopping-time benchmark for PRS, LIPO and AdaLIPO.")
    ap.add_argument("--problem", help="registry name or csv:PATH (KRR objective on a dataset)")
    ap.add_argument("--algo", action="append", default=[],
                    help="prs | lipo:K | adalipo[:p[,alpha]]; repeatable")
    ap.add_argument("--runs", type=int, default=100)
    ap.add_argument("--budget", type=int, default=1000)
    ap.add_argument("--targets", default="0.90,0.95,0.99")
    ap.add_argument("--mc-samples", type=int, default=1_000_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--format", choices=("csv", "json"), default="csv")
    ap.add_argument("--out", default=None, help="output file (default stdout)")
    ap.add_argument("--list-problems", action="store_true")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def config_from_args(args) -> ProtocolConfig:
    if not args.problem:
        raise ConfigError("--problem is required")
    if not args.problem.startswith("csv:") and args.problem not in PROBLEMS:
        raise ConfigError(f"unknown problem {args.problem!r}; see --list-problems")
    try:
        targets = tuple(float(t) for t in args.targets.split(","))
    except ValueError:
        raise ConfigError(f"bad --targets {args.targets!r}") from None
    algos = tuple(parse_algorithm(a) for a in (args.algo or ["adalipo"]))
    return ProtocolConfig(args.problem, algos, args.runs, args.budget, targets,
                          args.mc_samples, args.seed, args.jobs, args.out, args.format)


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        if args.list_problems:
            print("\n".join(PROBLEMS))
            return 0
        config = config_from_args(args)
        if config.problem.startswith("csv:"):
            _problem(config.problem)  # surface unreadable files as config errors
    except (ConfigError, OSError, ValueError) as e:
        print(f"bench: error: {e}", file=sys.stderr)
        return 1
    try:
        reports = run_protocol(config)
        emit_report(reports, config.output_format, config.output_path)
    except Exception as e:  # noqa: BLE001 - any failure mid-run is a runtime error
        print(f"bench: runtime error: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
