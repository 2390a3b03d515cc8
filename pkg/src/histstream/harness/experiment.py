"""Seeded multi-trial experiments scored against the exact oracle.

Outputs, all prefixed with ``config.name``:

``<name>.csv``
    ``trial,t,metric,value`` rows.  Per-trial metrics leave ``t`` empty;
    per-step ``error`` rows are written only with ``per_step=True``.
``<name>.json``
    Summary: config, config hash, seed and aggregate statistics.
``<name>.dat``
    Whitespace-separated columns ``trial max_error segments intervals`` for
    gnuplot.
``<name>.timing.json``
    Wall-clock runtime.  Kept apart so the files above are reproducible
    byte for byte.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from histstream.harness import registry
from histstream.noise import NoiseMode, NoiseSource, ParameterError, PrivacyParams
from histstream.queries import QuerySet, empirical_alpha
from histstream.streams import Stream, generate, read_stream


@dataclass(frozen=True)
class ExperimentConfig:
    mechanism: str = "two-level-maxsum"
    queries: str = "max"
    stream: str = "bernoulli:p=0.1"  # generator spec, or a path to a stream file
    d: int = 2
    T: int = 1024
    epsilon: float = 1.0
    delta: float = 0.0
    beta: float = 1 / 3
    c_max: int | None = None  # None: realized maximum query value (oracle)
    trials: int = 10
    seed: int = 0
    noise_mode: str = "live"
    per_step: bool = False
    out: str = "results"
    name: str = "run"

    @property
    def params(self) -> PrivacyParams:
        return PrivacyParams(self.epsilon, self.delta, self.beta)

    @property
    def query_set(self) -> QuerySet:
        return QuerySet.parse(self.queries)

    def to_dict(self) -> dict:
        return asdict(self)

    def config_hash(self) -> str:
        """Hash of everything that determines results (output location excluded)."""
        body = {k: v for k, v in self.to_dict().items() if k not in ("out", "name")}
        blob = json.dumps(body, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def validate(self) -> None:
        registry.validate(self.mechanism, self.query_set, self.d, self.params)
        if self.trials < 1:
            raise ParameterError("trials must be at least 1")
        NoiseMode(self.noise_mode)
        if NoiseMode(self.noise_mode) is NoiseMode.RECORDED:
            raise ParameterError("recorded noise is for tests; use live or disabled")


@dataclass
class TrialResult:
    trial: int
    stream: Stream
    outputs: np.ndarray  # (n, k)
    truth: np.ndarray  # (n, k)
    closes: list[int]
    segment_closes: list[int]
    stored: list[tuple[int, list[float]]]
    c_max: float
    cap: float | None

    @property
    def errors(self) -> np.ndarray:
        return np.abs(self.outputs - self.truth)

    @property
    def max_error(self) -> float:
        e = self.errors
        return float(e.max()) if e.size else 0.0

    @property
    def segments(self) -> int:
        """Segments of the outer partition: closes plus a trailing open one."""
        sc = self.segment_closes
        return len(sc) + (1 if not sc or sc[-1] < len(self.stream) else 0)

    @property
    def intervals(self) -> int:
        return len(self.closes)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    trials: list[TrialResult] = field(repr=False)
    runtime: float = 0.0
    files: dict[str, Path] = field(default_factory=dict)

    @property
    def max_errors(self) -> np.ndarray:
        return np.array([t.max_error for t in self.trials])

    def summary(self) -> dict:
        errs = self.max_errors
        segs = np.array([t.segments for t in self.trials])
        ints = np.array([t.intervals for t in self.trials])
        cfg = self.config
        return {
            "config": cfg.to_dict(),
            "config_hash": cfg.config_hash(),
            "seed": cfg.seed,
            "trials": len(self.trials),
            "max_error": {
                "mean": float(errs.mean()),
                "median": float(np.median(errs)),
                "max": float(errs.max()),
                "alpha_at_beta": empirical_alpha(errs, cfg.beta),
            },
            "segments": {"mean": float(segs.mean()), "max": int(segs.max())},
            "intervals": {"mean": float(ints.mean()), "max": int(ints.max())},
        }


def load_stream(cfg: ExperimentConfig, seed) -> Stream:
    p = Path(cfg.stream)
    if p.suffix and p.exists():
        s = read_stream(p)
        if s.d != cfg.d:
            raise ParameterError(f"stream file has d={s.d}, config says d={cfg.d}")
        return s
    return generate(cfg.stream, cfg.d, cfg.T, seed)


def run_trial(cfg: ExperimentConfig, trial: int, seq: np.random.SeedSequence) -> TrialResult:
    stream_seq, noise_seq = seq.spawn(2)
    stream = load_stream(cfg, stream_seq)
    qs = cfg.query_set
    truth = qs.truth(stream)
    c_max = cfg.c_max if cfg.c_max is not None else max(1.0, float(truth.max()) if truth.size else 1.0)
    noise = NoiseSource(noise_seq, mode=cfg.noise_mode)
    mech = registry.build(cfg.mechanism, cfg.d, stream.T, qs, cfg.params, noise, c_max)
    outputs = np.array([mech.step(row) for row in stream.rows.tolist()], dtype=float)
    outputs = outputs.reshape(len(stream), len(qs))
    return TrialResult(
        trial, stream, outputs, truth, list(mech.closes), list(mech.segment_closes),
        mech.stored(), c_max, mech.cap,
    )


def run_trials(cfg: ExperimentConfig) -> list[TrialResult]:
    cfg.validate()
    seqs = np.random.SeedSequence(cfg.seed).spawn(cfg.trials)
    return [run_trial(cfg, i, s) for i, s in enumerate(seqs)]


def _fmt(v) -> str:
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def write_outputs(result: ExperimentResult) -> dict[str, Path]:
    cfg = result.config
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    header = f"# config_hash={cfg.config_hash()} seed={cfg.seed}\n"
    csv_lines = [header, "trial,t,metric,value\n"]
    dat_lines = [header, "# trial max_error segments intervals\n"]
    for tr in sorted(result.trials, key=lambda r: r.trial):
        for metric, v in (("max_error", tr.max_error), ("segments", tr.segments),
                          ("intervals", tr.intervals), ("c_max", tr.c_max)):
            csv_lines.append(f"{tr.trial},,{metric},{_fmt(v)}\n")
        if cfg.per_step:
            for t, e in enumerate(tr.errors.max(axis=1).tolist(), start=1):
                csv_lines.append(f"{tr.trial},{t},error,{_fmt(e)}\n")
        dat_lines.append(f"{tr.trial} {_fmt(tr.max_error)} {tr.segments} {tr.intervals}\n")
    files = {
        "csv": out / f"{cfg.name}.csv",
        "json": out / f"{cfg.name}.json",
        "dat": out / f"{cfg.name}.dat",
        "timing": out / f"{cfg.name}.timing.json",
    }
    files["csv"].write_text("".join(csv_lines))
    files["dat"].write_text("".join(dat_lines))
    files["json"].write_text(json.dumps(result.summary(), indent=2, sort_keys=True) + "\n")
    files["timing"].write_text(json.dumps({"runtime_seconds": result.runtime}) + "\n")
    return files


def run_experiment(cfg: ExperimentConfig, write: bool = True) -> ExperimentResult:
    start = time.perf_counter()
    trials = run_trials(cfg)
    result = ExperimentResult(cfg, trials, time.perf_counter() - start)
    if write:
        result.files = write_outputs(result)
    return result
