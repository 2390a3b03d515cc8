"""Noise sources, privacy parameters and tail-bound calculators.

Every mechanism owns one :class:`NoiseSource`.  The source can run live
(seeded numpy generator), be disabled (every sample is exactly 0), or replay a
recorded list of samples.  Disabled and recorded modes exist so that the
mechanisms can be checked against exact oracles.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

_BLOCK = 4096


class ParameterError(ValueError):
    """Raised for invalid mechanism or distribution parameters."""


class NoiseExhausted(RuntimeError):
    """Raised when a recorded noise sequence runs out."""


class NoiseMode(enum.Enum):
    LIVE = "live"
    DISABLED = "disabled"
    RECORDED = "recorded"


@dataclass(frozen=True)
class PrivacyParams:
    """Privacy budget and failure probability.

    ``delta == 0`` selects the pure-DP code paths.
    """

    epsilon: float
    delta: float = 0.0
    beta: float = 1.0 / 3.0

    def __post_init__(self) -> None:
        if not self.epsilon > 0:
            raise ParameterError(f"epsilon must be positive, got {self.epsilon}")
        if not 0 <= self.delta < 1:
            raise ParameterError(f"delta must lie in [0, 1), got {self.delta}")
        if not 0 < self.beta < 1:
            raise ParameterError(f"beta must lie in (0, 1), got {self.beta}")

    @property
    def pure(self) -> bool:
        return self.delta == 0


def laplace_inverse_cdf(u: float, scale: float) -> float:
    """Map a uniform ``u`` in (0, 1) to a Laplace(0, scale) variate."""
    if scale <= 0:
        raise ParameterError(f"Laplace scale must be positive, got {scale}")
    if not 0 < u < 1:
        raise ParameterError(f"u must lie in (0, 1), got {u}")
    v = u - 0.5
    if v == 0:
        return 0.0
    return -scale * math.copysign(1.0, v) * math.log1p(-2.0 * abs(v))


class NoiseSource:
    """Single-owner randomness for one mechanism instance.

    Parameters
    ----------
    seed:
        Seed for the live generator.  Either an int or a
        ``numpy.random.SeedSequence``.
    mode:
        See :class:`NoiseMode`.
    recorded:
        The replay sequence for ``NoiseMode.RECORDED``.  Values are returned
        verbatim, whatever distribution is requested.
    keep_log:
        When true every returned sample is appended to :attr:`log`.
    """

    def __init__(
        self,
        seed: int | np.random.SeedSequence | None = 0,
        mode: NoiseMode | str = NoiseMode.LIVE,
        recorded: Sequence[float] | None = None,
        keep_log: bool = False,
    ) -> None:
        self.mode = NoiseMode(mode)
        if isinstance(seed, np.random.SeedSequence):
            self._seq = seed
        else:
            self._seq = np.random.SeedSequence(seed)
        self.seed = int(self._seq.entropy) if self._seq.entropy is not None else None
        uni, gau = self._seq.spawn(2)
        self._uni_gen = np.random.Generator(np.random.PCG64(uni))
        self._gau_gen = np.random.Generator(np.random.PCG64(gau))
        self._uni_buf: list[float] = []
        self._gau_buf: list[float] = []
        if self.mode is NoiseMode.RECORDED:
            if recorded is None:
                raise ParameterError("recorded mode needs a sample sequence")
            self._recorded = [float(v) for v in recorded]
        else:
            self._recorded = []
        self._pos = 0
        self.log: list[float] | None = [] if keep_log else None
        self.draws = 0

    # -- construction helpers -------------------------------------------------

    @classmethod
    def disabled(cls) -> "NoiseSource":
        return cls(mode=NoiseMode.DISABLED)

    @classmethod
    def replay(cls, samples: Iterable[float], keep_log: bool = False) -> "NoiseSource":
        return cls(mode=NoiseMode.RECORDED, recorded=list(samples), keep_log=keep_log)

    @classmethod
    def from_log_file(cls, path: str | Path) -> "NoiseSource":
        return cls.replay(read_sample_log(path))

    def spawn(self, n: int) -> list["NoiseSource"]:
        """Independent children in the same mode.

        Recorded sources cannot be split; children of a recorded source share
        nothing with it and run disabled.
        """
        kids = self._seq.spawn(n)
        mode = NoiseMode.DISABLED if self.mode is NoiseMode.RECORDED else self.mode
        return [NoiseSource(k, mode=mode, keep_log=self.log is not None) for k in kids]

    @property
    def remaining(self) -> int:
        return len(self._recorded) - self._pos

    # -- sampling -------------------------------------------------------------

    def uniform(self) -> float:
        """Uniform draw on the open interval (0, 1)."""
        while True:
            if not self._uni_buf:
                self._uni_buf = self._uni_gen.random(_BLOCK).tolist()
                self._uni_buf.reverse()
            u = self._uni_buf.pop()
            if u > 0.0:
                return u

    def _standard_normal(self) -> float:
        if not self._gau_buf:
            self._gau_buf = self._gau_gen.standard_normal(_BLOCK).tolist()
            self._gau_buf.reverse()
        return self._gau_buf.pop()

    def _special(self) -> float | None:
        if self.mode is NoiseMode.DISABLED:
            return 0.0
        if self.mode is NoiseMode.RECORDED:
            if self._pos >= len(self._recorded):
                raise NoiseExhausted(f"recorded noise exhausted after {self._pos} samples")
            v = self._recorded[self._pos]
            self._pos += 1
            return v
        return None

    def _emit(self, v: float) -> float:
        self.draws += 1
        if self.log is not None:
            self.log.append(v)
        return v

    def laplace(self, scale: float) -> float:
        if scale <= 0:
            raise ParameterError(f"Laplace scale must be positive, got {scale}")
        v = self._special()
        if v is None:
            v = laplace_inverse_cdf(self.uniform(), scale)
        return self._emit(v)

    def gaussian(self, sigma: float) -> float:
        if sigma <= 0:
            raise ParameterError(f"Gaussian sigma must be positive, got {sigma}")
        v = self._special()
        if v is None:
            v = sigma * self._standard_normal()
        return self._emit(v)

    def laplace_vector(self, scale: float, n: int) -> list[float]:
        return [self.laplace(scale) for _ in range(n)]

    def gaussian_vector(self, sigma: float, n: int) -> list[float]:
        return [self.gaussian(sigma) for _ in range(n)]


def laplace_sample(scale: float, rng: NoiseSource) -> float:
    return rng.laplace(scale)


def gaussian_sample(sigma: float, rng: NoiseSource) -> float:
    return rng.gaussian(sigma)


def read_sample_log(path: str | Path) -> list[float]:
    """One real per line; blank lines and ``#`` comments are skipped."""
    out = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            out.append(float(line))
    return out


def write_sample_log(path: str | Path, samples: Iterable[float]) -> None:
    Path(path).write_text("".join(f"{float(v)!r}\n" for v in samples))


# -- tail bounds --------------------------------------------------------------


def laplace_tail(t: float) -> float:
    """P(|Y| >= t*b) for Y ~ Lap(b)."""
    if t < 0:
        raise ParameterError("t must be nonnegative")
    return math.exp(-t)


def gaussian_tail(t: float, sigma: float) -> float:
    """One-sided bound P(X >= t) <= exp(-t^2 / (2 sigma^2)) for X ~ N(0, sigma^2)."""
    if sigma <= 0:
        raise ParameterError("sigma must be positive")
    return math.exp(-(t * t) / (2.0 * sigma * sigma))


def sum_laplace_bound(k: int, scale: float, beta_s: float) -> float:
    """Value a sum of ``k`` iid Lap(scale) variables exceeds w.p. at most ``beta_s``."""
    if k < 1:
        raise ParameterError("k must be at least 1")
    if not 0 < beta_s < 1:
        raise ParameterError("beta_s must lie in (0, 1)")
    lg = math.log(2.0 / beta_s)
    return 2.0 * scale * math.sqrt(2.0 * lg) * max(math.sqrt(k), math.sqrt(lg))


def laplace_union_bound(scale: float, count: float, beta: float) -> float:
    """|Y_i| <= scale*ln(count/beta) for all of ``count`` Lap(scale) draws w.p. 1-beta."""
    return scale * math.log(count / beta)
