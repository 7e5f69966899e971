"""Stopping-time table for the synthetic problems (AdaLIPO against PRS).

    python scripts/run_figure3.py --runs 100 --jobs 4 --out figure3.csv
"""
import argparse
import logging

from lipopt.bench import ProtocolConfig, emit_report, run_protocol
from lipopt.optimizers import OptimizerConfig

PROBLEMS = ("holder_table", "rosenbrock", "linear_slope", "sphere", "deb_n1")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--problems", nargs="+", default=list(PROBLEMS))
    ap.add_argument("--runs", type=int, default=100)
    ap.add_argument("--budget", type=int, default=1000)
    ap.add_argument("--mc-samples", type=int, default=1_000_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--format", choices=("csv", "json"), default="csv")
    ap.add_argument("--out", default=None)
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")

    algos = (OptimizerConfig.adalipo(), OptimizerConfig.prs())
    reports = []
    for name in args.problems:
        logging.info("running %s", name)
        cfg = ProtocolConfig(name, algos, args.runs, args.budget, mc_samples=args.mc_samples,
                             base_seed=args.seed, jobs=args.jobs)
        reports += run_protocol(cfg)
    emit_report(reports, args.format, args.out)


if __name__ == "__main__":
    main()
