"""Structural checks on recorded runs.

Absolute properties (partition caps, monotone true query values at closes)
must hold in every trial.  High-probability properties (segment count at most
``L``, stored-histogram gap at most ``alpha_gamma``, interval count at most
``c_max``) are reported as violation frequencies to compare with ``beta``.
"""

from __future__ import annotations

import math
from pathlib import Path
from dataclasses import dataclass, field

import numpy as np

from histstream import calibration as cal
from histstream.harness.experiment import ExperimentConfig, TrialResult, run_trials


@dataclass
class TrialCheck:
    cap_ok: bool
    monotone_ok: bool
    segments_ok: bool | None
    gap_ok: bool | None
    intervals_ok: bool | None


@dataclass
class StructureReport:
    beta: float
    trials: list[TrialCheck] = field(repr=False)

    def _rate(self, attr: str) -> float | None:
        vals = [getattr(t, attr) for t in self.trials if getattr(t, attr) is not None]
        return None if not vals else 1.0 - sum(vals) / len(vals)

    @property
    def cap_violations(self) -> int:
        return sum(not t.cap_ok for t in self.trials)

    @property
    def monotone_violations(self) -> int:
        return sum(not t.monotone_ok for t in self.trials)

    @property
    def segment_violation_rate(self) -> float | None:
        return self._rate("segments_ok")

    @property
    def gap_violation_rate(self) -> float | None:
        return self._rate("gap_ok")

    @property
    def interval_violation_rate(self) -> float | None:
        return self._rate("intervals_ok")

    def slack(self) -> float:
        return 3.0 * math.sqrt(self.beta / max(1, len(self.trials)))

    @property
    def passed(self) -> bool:
        lim = self.beta + self.slack()
        rates = [self.segment_violation_rate, self.gap_violation_rate, self.interval_violation_rate]
        return (
            self.cap_violations == 0
            and self.monotone_violations == 0
            and all(r is None or r <= lim for r in rates)
        )

    def to_dict(self) -> dict:
        return {
            "trials": len(self.trials),
            "beta": self.beta,
            "slack": self.slack(),
            "cap_violations": self.cap_violations,
            "monotone_violations": self.monotone_violations,
            "segment_violation_rate": self.segment_violation_rate,
            "gap_violation_rate": self.gap_violation_rate,
            "interval_violation_rate": self.interval_violation_rate,
            "passed": self.passed,
        }


SEGMENTED = {"doubling", "kdoubling", "ed-doubling", "two-level-maxsum", "ktwolevel", "ed-twolevel"}


def check_trial(cfg: ExperimentConfig, tr: TrialResult) -> TrialCheck:
    p = cfg.params
    cap_ok = tr.cap is None or tr.intervals <= tr.cap
    # true query values at successive closes never decrease
    monotone_ok = True
    for times in (tr.closes, tr.segment_closes):
        vals = [tr.truth[t - 1].max() for t in times]
        monotone_ok &= all(b >= a for a, b in zip(vals, vals[1:]))
    segments_ok = gap_ok = intervals_ok = None
    if cfg.mechanism in SEGMENTED:
        L = cal.segment_bound(p.epsilon, cfg.d, tr.c_max, len(tr.stream), p.beta, p.delta)
        segments_ok = tr.segments <= L
        gamma = cal.alpha_gamma(p.epsilon, cfg.d, cal.log2(len(tr.stream)), len(tr.stream), p.beta, p.delta)
        prefix = tr.stream.prefix_sums()
        gap_ok = all(float(np.max(np.abs(np.asarray(s) - prefix[t]))) <= gamma for t, s in tr.stored)
    if cfg.mechanism == "bounded-maxsum":
        intervals_ok = tr.intervals <= tr.c_max
    return TrialCheck(cap_ok, monotone_ok, segments_ok, gap_ok, intervals_ok)


def write_report_csv(report: StructureReport, cfg: ExperimentConfig, path) -> None:
    """Per-trial check outcomes in the ``trial,t,metric,value`` schema (1/0, empty if not applicable)."""
    lines = [f"# config_hash={cfg.config_hash()} seed={cfg.seed}\n", "trial,t,metric,value\n"]
    for i, tc in enumerate(report.trials):
        for name in ("cap_ok", "monotone_ok", "segments_ok", "gap_ok", "intervals_ok"):
            v = getattr(tc, name)
            lines.append(f"{i},,{name},{'' if v is None else int(v)}\n")
    Path(path).write_text("".join(lines))


def check_structure(cfg: ExperimentConfig, trials: list[TrialResult] | None = None) -> StructureReport:
    trials = run_trials(cfg) if trials is None else trials
    return StructureReport(cfg.beta, [check_trial(cfg, t) for t in trials])
