"""PSL against outer iteration for a few seeds; writes one CSV per seed plus a summary.

Example:
    python3 scripts/psl_vs_iteration.py --L 2 --M 200 --seeds 0 1 2 --out results/psl
"""
import argparse
import csv
import time
from pathlib import Path

from pslset.io import save_sequences, write_trace_csv
from pslset.solver import SolverConfig, design


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--L", type=int, default=2)
    ap.add_argument("--M", type=int, default=200)
    ap.add_argument("--iters", type=int, default=500)
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    ap.add_argument("--curvature", choices=("direct", "lifted"), default="direct")
    ap.add_argument("--out", default="results/psl_vs_iteration")
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for seed in args.seeds:
        cfg = SolverConfig(args.L, args.M, max_outer_iters=args.iters, seed=seed,
                           curvature=args.curvature)
        start = time.perf_counter()
        trace = design(cfg)
        elapsed = time.perf_counter() - start
        write_trace_csv(trace, out / f"trace_seed{seed}.csv")
        save_sequences(trace.final, out / f"sequences_seed{seed}.json")
        rows.append([seed, trace.status, len(trace.records) - 1, trace.initial_psl,
                     trace.final_psl, round(elapsed, 2)])
        print(f"seed {seed}: {trace.initial_psl:.3f} -> {trace.final_psl:.3f} "
              f"({trace.status}, {elapsed:.0f} s)")

    with open(out / "summary.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["seed", "status", "iterations", "initial_psl", "final_psl", "seconds"])
        w.writerows(rows)


if __name__ == "__main__":
    main()
