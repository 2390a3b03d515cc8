"""Median MaxSum error of the two-level mechanism and the baseline tree as T grows.

Writes one CSV/JSON/dat triple per (mechanism, T) under --out and prints a
table.  Streams have every column sum equal to --c-max.
"""

import argparse

import numpy as np

from histstream.harness import ExperimentConfig, run_experiment


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--d", type=int, default=2)
    ap.add_argument("--c-max", type=int, default=32)
    ap.add_argument("--logT", type=int, nargs="+", default=[8, 10, 12, 14])
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="results/scaling")
    args = ap.parse_args()
    print(f"{'mechanism':<18}{'T':>8}{'median':>10}{'alpha(1/3)':>12}")
    for mech in ("two-level-maxsum", "baseline-tree"):
        for lg in args.logT:
            T = 2**lg
            cfg = ExperimentConfig(mechanism=mech, stream=f"bounded:c={args.c_max}", d=args.d, T=T,
                                   trials=args.trials, seed=args.seed, out=args.out, name=f"{mech}-T{T}")
            s = run_experiment(cfg).summary()["max_error"]
            print(f"{mech:<18}{T:>8}{s['median']:>10.1f}{s['alpha_at_beta']:>12.1f}")


if __name__ == "__main__":
    main()
