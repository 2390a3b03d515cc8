"""Run the fixed-pair privacy audit for the Laplace count and the bounded MaxSum mechanism."""

import argparse

from histstream.harness import AuditConfig, run_audit
from histstream.harness.audit import LaplaceCount, bounded_maxsum_target, broken_bounded_maxsum_target


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=200_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    for eps in (0.5, 1.0, 2.0):
        cfg = AuditConfig(T=4, d=1, epsilon=eps, bin_width=0.5, trials=args.trials, seed=args.seed,
                          x=((1,), (1,), (1,), (0,)), t_star=4, new_row=(1,))
        res = run_audit(cfg, LaplaceCount(eps))
        print(f"laplace          eps={eps:<4} max_ratio={res.max_ratio:7.3f} bound={res.bound:6.3f} "
              f"{'PASS' if res.passed else 'FAIL'}")
    for name, target in (("bounded-maxsum", bounded_maxsum_target(4, 1, 2.0)),
                         ("broken-variant", broken_bounded_maxsum_target(4, 1, 2.0))):
        for mode in ("event", "independent"):
            cfg = AuditConfig(T=4, d=1, epsilon=2.0, trials=args.trials, seed=args.seed, mode=mode)
            res = run_audit(cfg, target)
            print(f"{name:<16} mode={mode:<11} max_ratio={res.max_ratio:7.3f} "
                  f"{'PASS' if res.passed else 'FAIL'}")


if __name__ == "__main__":
    main()
