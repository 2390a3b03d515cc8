"""Compare the k-query mechanisms on a fixed query set, pure and (eps, delta)."""

import argparse

from histstream.harness import ExperimentConfig, run_experiment


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--queries", default="max,min,quantile:0.5")
    ap.add_argument("--stream", default="bursty:on=32,off=32,p=0.8")
    ap.add_argument("--d", type=int, default=4)
    ap.add_argument("--T", type=int, default=4096)
    ap.add_argument("--delta", type=float, default=1e-6)
    ap.add_argument("--trials", type=int, default=10)
    ap.add_argument("--out", default="results/kquery")
    args = ap.parse_args()
    runs = [("kquery", 0.0), ("ktwolevel", 0.0), ("baseline-tree", 0.0),
            ("ed-kquery", args.delta), ("ed-twolevel", args.delta), ("baseline-tree", args.delta)]
    print(f"{'mechanism':<16}{'delta':>8}{'median':>10}{'segments':>10}{'intervals':>11}")
    for mech, delta in runs:
        cfg = ExperimentConfig(mechanism=mech, queries=args.queries, stream=args.stream, d=args.d,
                               T=args.T, delta=delta, trials=args.trials, out=args.out,
                               name=f"{mech}-{'ed' if delta else 'pure'}")
        s = run_experiment(cfg).summary()
        print(f"{mech:<16}{delta:>8.0e}{s['max_error']['median']:>10.1f}"
              f"{s['segments']['mean']:>10.1f}{s['intervals']['mean']:>11.1f}")


if __name__ == "__main__":
    main()
