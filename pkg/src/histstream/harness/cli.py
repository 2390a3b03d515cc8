"""``python -m histstream run|audit|check``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from histstream.harness.audit import TARGETS, AuditConfig, run_audit
from histstream.harness.experiment import ExperimentConfig, run_experiment
from histstream.harness.registry import REGISTRY
from histstream.harness.structure import check_structure, write_report_csv
from histstream.noise import ParameterError


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--eps", type=float, default=1.0)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--beta", type=float, default=1 / 3)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="results")
    p.add_argument("--name")


def _experiment_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mechanism", choices=sorted(REGISTRY), default="two-level-maxsum")
    p.add_argument("--queries", default="max")
    p.add_argument("--stream", default="bernoulli:p=0.1", help="generator spec or stream file")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--T", type=int, default=1024)
    p.add_argument("--c-max", type=int)
    p.add_argument("--noise-mode", choices=["live", "disabled"], default="live")
    p.add_argument("--per-step", action="store_true")
    _common(p)


def parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="histstream")
    sub = ap.add_subparsers(dest="command", required=True)
    _experiment_args(sub.add_parser("run", help="multi-trial accuracy experiment"))
    _experiment_args(sub.add_parser("check", help="structural checks on recorded traces"))
    a = sub.add_parser("audit", help="empirical privacy audit on a fixed neighbouring pair")
    a.add_argument("--mechanism", choices=sorted(TARGETS), default="laplace")
    a.add_argument("--mode", choices=["event", "independent"], default="event")
    a.add_argument("--T", type=int, default=4)
    a.add_argument("--d", type=int, default=1)
    a.add_argument("--bin-width", type=float, default=1.0)
    _common(a)
    return ap


def _experiment_config(ns, default_trials: int) -> ExperimentConfig:
    return ExperimentConfig(
        mechanism=ns.mechanism, queries=ns.queries, stream=ns.stream, d=ns.d, T=ns.T,
        epsilon=ns.eps, delta=ns.delta, beta=ns.beta, c_max=ns.c_max,
        trials=ns.trials or default_trials, seed=ns.seed, noise_mode=ns.noise_mode,
        per_step=ns.per_step, out=ns.out, name=ns.name or ns.command,
    )


def main(argv: list[str] | None = None) -> int:
    ns = parser().parse_args(argv)
    try:
        if ns.command == "run":
            res = run_experiment(_experiment_config(ns, 10))
            print(json.dumps(res.summary()["max_error"], sort_keys=True))
            return 0
        if ns.command == "check":
            cfg = _experiment_config(ns, 100)
            report = check_structure(cfg)
            out = Path(cfg.out)
            out.mkdir(parents=True, exist_ok=True)
            body = {"config": cfg.to_dict(), "config_hash": cfg.config_hash(), "seed": cfg.seed,
                    **report.to_dict()}
            write_report_csv(report, cfg, out / f"{cfg.name}.csv")
            (out / f"{cfg.name}.json").write_text(json.dumps(body, indent=2, sort_keys=True) + "\n")
            print(json.dumps(report.to_dict(), sort_keys=True))
            return 0 if report.passed else 1
        cfg = AuditConfig(T=ns.T, d=ns.d, epsilon=ns.eps, delta=ns.delta, bin_width=ns.bin_width,
                          trials=ns.trials or 100_000, mode=ns.mode, seed=ns.seed)
        res = run_audit(cfg, TARGETS[ns.mechanism](cfg))
        out = Path(ns.out)
        out.mkdir(parents=True, exist_ok=True)
        name = ns.name or "audit"
        lines = [f"# mechanism={ns.mechanism} mode={cfg.mode} seed={cfg.seed}\n", "bin,count_x,count_y,ratio_xy,ratio_yx,flagged\n"]
        for b in res.bins:
            key = ":".join(map(str, b.key))
            lines.append(f"{key},{b.count_x},{b.count_y},{b.ratio_xy!r},{b.ratio_yx!r},{int(b.flagged)}\n")
        (out / f"{name}.csv").write_text("".join(lines))
        verdict = "PASS" if res.passed else "FAIL"
        print(f"{verdict} max_ratio={res.max_ratio:.4g} bound={res.bound:.4g}")
        return 0 if res.passed else 1
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
