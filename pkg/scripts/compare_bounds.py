"""Empirical LIPO and PRS gaps on sphere_norm next to the closed-form bounds.

spike_lower is the worst-case gap over all 1-Lipschitz functions, not a bound for
sphere_norm, so LIPO may sit far below it here.

    python scripts/compare_bounds.py --seeds 100 --budgets 50 100 200 400
"""
import argparse

import numpy as np

from lipopt.analysis import BoundQuery, lipo_gap_bound, lipo_spike_lower, prs_covering_bound
from lipopt.objectives import registry_lookup
from lipopt.optimizers import OptimizerConfig, run


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=100)
    ap.add_argument("--budgets", type=int, nargs="+", default=[50, 100, 200, 400])
    ap.add_argument("--delta", type=float, default=0.1)
    args = ap.parse_args()

    f = registry_lookup("sphere_norm")
    n_max = max(args.budgets)
    lipo = [run(OptimizerConfig.lipo(1.0, seed=s), f, f.domain, n_max).values for s in range(args.seeds)]
    prs = [run(OptimizerConfig.prs(seed=s), f, f.domain, n_max).values for s in range(args.seeds)]
    q = 1 - args.delta
    print(f"{'n':>6} {'lipo_q':>10} {'prs_q':>10} {'lipo_upper':>11} {'spike_lower':>12} {'prs_cover':>10}")
    for n in args.budgets:
        bq = BoundQuery.for_domain(f.domain, n=n, delta=args.delta, k=1.0)
        lq = np.quantile([f.known_max - v[:n].max() for v in lipo], q)
        pq = np.quantile([f.known_max - v[:n].max() for v in prs], q)
        print(f"{n:>6} {lq:>10.3e} {pq:>10.3e} {lipo_gap_bound(bq):>11.4f} "
              f"{lipo_spike_lower(bq):>12.2e} {prs_covering_bound(bq):>10.4f}")


if __name__ == "__main__":
    main()
