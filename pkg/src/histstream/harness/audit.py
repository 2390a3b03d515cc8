"""Empirical privacy audit on a fixed pair of neighbouring streams.

Each target is run many times on ``x`` and on ``y``.  The output vectors are
binned, and every bin ``S`` with enough mass is checked against
``Pr[A(x) in S] <= e^eps Pr[A(y) in S] + delta`` in both directions.  A bin
is flagged only when the violation survives a ``z``-standard-error
confidence band on both estimates.  A fixed pair is a necessary condition for
privacy, weaker than the adaptive game.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Protocol, Sequence

import numpy as np

from histstream.maxsum import BoundedMaxSum
from histstream.noise import NoiseSource, ParameterError, PrivacyParams
from histstream.streams import Stream, make_independent_neighbors, make_neighbors


@dataclass(frozen=True)
class AuditConfig:
    T: int = 4
    d: int = 1
    epsilon: float = 1.0
    delta: float = 0.0
    bin_width: float = 1.0
    trials: int = 100_000
    mode: str = "event"  # or "independent"
    seed: int = 0
    x: tuple[tuple[int, ...], ...] | None = None  # default: all-zero stream
    t_star: int = 1
    new_row: tuple[int, ...] | None = None  # default: all-ones row
    flip_times: tuple[int | None, ...] | None = None  # default: every column at t=1
    z: float = 3.0
    min_count: int = 100

    def __post_init__(self) -> None:
        if self.T > 6 or self.d > 2:
            raise ParameterError("audits are meant for tiny instances (T <= 6, d <= 2)")
        if self.mode not in ("event", "independent"):
            raise ParameterError(f"unknown neighbouring mode {self.mode!r}")
        if self.bin_width <= 0:
            raise ParameterError("bin width must be positive")

    def pair(self) -> tuple[Stream, Stream]:
        rows = np.zeros((self.T, self.d), dtype=np.int8) if self.x is None else np.array(self.x)
        x = Stream(self.d, self.T, rows)
        if self.mode == "event":
            new = self.new_row if self.new_row is not None else (1,) * self.d
            return x, make_neighbors(x, self.t_star, new)
        flips = self.flip_times if self.flip_times is not None else (1,) * self.d
        return x, make_independent_neighbors(x, flips)


class AuditTarget(Protocol):
    def sample(self, stream: Stream, trials: int, rng: np.random.Generator) -> np.ndarray:
        """(trials, m) array of output vectors."""


@dataclass
class LaplaceCount:
    """Releases the final total count plus ``Lap(1/eps)``; vectorised."""

    epsilon: float

    def sample(self, stream, trials, rng):
        count = float(stream.rows.sum())
        return (count + rng.laplace(0.0, 1.0 / self.epsilon, size=trials))[:, None]


@dataclass
class StreamingTarget:
    """Runs ``build(noise)`` over the stream once per trial.

    All trials of one call share a single noise source, drawn sequentially.
    """

    build: Callable[[NoiseSource], object]
    leak: Callable[[object], Sequence[float]] | None = None

    def sample(self, stream, trials, rng):
        noise = NoiseSource(int(rng.integers(2**63)))
        rows = stream.rows.tolist()
        out = []
        for _ in range(trials):
            mech = self.build(noise)
            vals = [mech.step(r) for r in rows]
            if self.leak is not None:
                vals.extend(self.leak(mech))
            out.append(vals)
        return np.asarray(out, dtype=float)


def bounded_maxsum_target(T: int, d: int, epsilon: float, c_max: int | None = None) -> StreamingTarget:
    params = PrivacyParams(epsilon)
    return StreamingTarget(lambda noise: BoundedMaxSum(d, T, c_max or T, params, noise))


def broken_bounded_maxsum_target(T: int, d: int, epsilon: float, K: float = 0.5) -> StreamingTarget:
    """Mutant without threshold or query noise that also leaks its close times."""
    params = PrivacyParams(epsilon)

    def build(noise):
        m = BoundedMaxSum(d, T, T, params, noise, K=K, threshold_noise=False)
        m.core.mu_scale = 1e-300  # Lap(~0): the query noise is gone too
        return m

    def leak(m):
        closes = set(m.trace.closes)
        return [1.0 if t in closes else 0.0 for t in range(1, T + 1)]

    return StreamingTarget(build, leak)


@dataclass
class BinCheck:
    key: tuple
    count_x: int
    count_y: int
    ratio_xy: float
    ratio_yx: float
    flagged: bool


@dataclass
class AuditResult:
    max_ratio: float
    bound: float
    passed: bool
    bins: list[BinCheck] = field(repr=False)

    @property
    def flagged(self) -> list[BinCheck]:
        return [b for b in self.bins if b.flagged]


def _bins(samples: np.ndarray, width: float) -> Counter:
    keys = np.floor(samples / width).astype(np.int64)
    return Counter(map(tuple, keys.tolist()))


def _ratio(px: float, py: float, delta: float) -> float:
    num = px - delta
    if num <= 0:
        return 0.0
    return math.inf if py == 0 else num / py


def compare(cx: Counter, cy: Counter, n: int, epsilon: float, delta: float, z: float, min_count: int) -> AuditResult:
    bound = math.exp(epsilon)
    checks = []
    for key in sorted(set(cx) | set(cy)):
        a, b = cx.get(key, 0), cy.get(key, 0)
        if max(a, b) < min_count:
            continue
        px, py = a / n, b / n
        # standard errors floored at one observation so empty bins get a band
        sx = math.sqrt(max(px, 1 / n) * (1 - px) / n)
        sy = math.sqrt(max(py, 1 / n) * (1 - py) / n)
        flag = (px - z * sx - delta > bound * (py + z * sy)) or (py - z * sy - delta > bound * (px + z * sx))
        checks.append(BinCheck(key, a, b, _ratio(px, py, delta), _ratio(py, px, delta), flag))
    if not checks:
        raise ParameterError(f"no bin reached {min_count} samples; raise trials or widen bins")
    mx = max(max(c.ratio_xy, c.ratio_yx) for c in checks)
    return AuditResult(mx, bound, not any(c.flagged for c in checks), checks)


def run_audit(cfg: AuditConfig, target: AuditTarget, pair: tuple[Stream, Stream] | None = None) -> AuditResult:
    if cfg.trials < 100_000:
        raise ParameterError("ratio estimation needs at least 1e5 trials")
    x, y = pair if pair is not None else cfg.pair()
    rx, ry = (np.random.Generator(np.random.PCG64(s)) for s in np.random.SeedSequence(cfg.seed).spawn(2))
    sx = target.sample(x, cfg.trials, rx)
    sy = target.sample(y, cfg.trials, ry)
    return compare(_bins(sx, cfg.bin_width), _bins(sy, cfg.bin_width), cfg.trials,
                   cfg.epsilon, cfg.delta, cfg.z, cfg.min_count)


TARGETS = {
    "laplace": lambda cfg: LaplaceCount(cfg.epsilon),
    "bounded-maxsum": lambda cfg: bounded_maxsum_target(cfg.T, cfg.d, cfg.epsilon),
    "broken-bounded-maxsum": lambda cfg: broken_bounded_maxsum_target(cfg.T, cfg.d, cfg.epsilon),
}
