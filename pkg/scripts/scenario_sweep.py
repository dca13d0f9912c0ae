"""Scenario-count convergence study on the frozen drift-free district.

Runs the stochastic controller for every (seed, scenario count) pair and
reports the mean and spread of the average score per count.
"""

import argparse

import numpy as np

from vppdispatch.benchmark import run_benchmark
from vppdispatch.evaluate import normalize
from vppdispatch.presets import sweep_config


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out/sweep")
    parser.add_argument("--counts", default="1,25,50,75,150,300")
    parser.add_argument("--seeds", default=",".join(str(s) for s in range(10)))
    args = parser.parse_args()
    counts = tuple(int(c) for c in args.counts.split(","))
    seeds = tuple(int(s) for s in args.seeds.split(","))

    result = run_benchmark(sweep_config(args.out, seeds=seeds, counts=counts))
    base = result.baseline.costs
    print(f"{'N':>5s} {'mean':>8s} {'std':>8s}")
    for N in counts:
        vals = [normalize(result.episodes[("sofo", s, N)].costs, base).average for s in seeds]
        print(f"{N:5d} {np.mean(vals):8.5f} {np.std(vals):8.5f}")
    print(f"\nreports under {result.out_dir}")


if __name__ == "__main__":
    main()
