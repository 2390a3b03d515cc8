"""Sparse-vector partitioning shared by the MaxSum and doubling mechanisms.

:class:`MetaMechanism` compares a noisy query of the running noisy histogram
against a noisy threshold.  On a crossing it closes the interval, feeds the
exact within-interval counts to a continual histogram ``H`` and restarts from
``H``'s output.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

from histstream.noise import NoiseSource, ParameterError


@dataclass(frozen=True)
class ThresholdSchedule:
    """``additive``: K_j = base + j*step.  ``doubling``: K_j = 2^(j-1)."""

    kind: str
    step: float = 1.0
    base: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in ("additive", "doubling"):
            raise ParameterError(f"unknown schedule {self.kind!r}")

    @classmethod
    def additive(cls, step: float, base: float = 0.0) -> "ThresholdSchedule":
        return cls("additive", step, base)

    @classmethod
    def doubling(cls) -> "ThresholdSchedule":
        return cls("doubling")

    def threshold(self, j: int) -> float:
        if self.kind == "additive":
            return self.base + j * self.step
        return float(2 ** (j - 1))


@dataclass
class Closed:
    t: int
    j: int  # index of the interval that just closed
    s: list[float]


@dataclass
class PartitionTrace:
    closes: list[int] = field(default_factory=list)
    thresholds: list[float] = field(default_factory=list)  # K_j crossed at each close
    stored: list[list[float]] = field(default_factory=list)  # s right after each close


class MetaMechanism:
    """Interval partitioning with a continual histogram.

    Parameters
    ----------
    d, T:
        Row dimension and horizon.
    epsilon:
        Budget of the partitioning; query noise is Lap(8/eps) and threshold
        noise Lap(4/eps).
    g:
        Monotone sensitivity-1 function of the histogram.
    histogram:
        Object with ``insert``/``current``; receives one insert per close.
    cap:
        Intervals may close while ``j <= cap`` (``Delta``).
    schedule:
        Threshold sequence.
    initial:
        Starting noisy histogram ``s^{t_0}``; added back to every ``H`` output.
    """

    def __init__(
        self,
        d: int,
        T: int,
        epsilon: float,
        g: Callable[[Sequence[float]], float],
        histogram,
        cap: float,
        schedule: ThresholdSchedule,
        noise: NoiseSource,
        initial: Sequence[float] | None = None,
        threshold_noise: bool = True,
    ) -> None:
        if epsilon <= 0:
            raise ParameterError("epsilon must be positive")
        self.d, self.T, self.epsilon = d, T, epsilon
        self.g = g
        self.H = histogram
        self.cap = cap
        self.schedule = schedule
        self.noise = noise
        self.offset = [float(v) for v in initial] if initial is not None else [0.0] * d
        if len(self.offset) != d:
            raise ParameterError(f"initial histogram must have length {d}")
        self.mu_scale = 8.0 / epsilon
        self.tau_scale = 4.0 / epsilon
        self._threshold_noise = threshold_noise
        self.t = 0
        self.j = 1
        self.c = [0] * d
        self.s = list(self.offset)
        self.trace = PartitionTrace()
        self.K = schedule.threshold(1)
        self.K_noisy = self.K + self._tau()

    def _tau(self) -> float:
        return self.noise.laplace(self.tau_scale) if self._threshold_noise else 0.0

    @property
    def n_closes(self) -> int:
        return len(self.trace.closes)

    def step(self, row: Sequence[int]) -> Closed | None:
        if self.t >= self.T:
            raise ParameterError(f"stream horizon T={self.T} exceeded")
        self.t += 1
        c, s = self.c, self.s
        for i, x in enumerate(row):
            if x:
                c[i] += x
                s[i] += x
        mu = self.noise.laplace(self.mu_scale)
        if not (self.g(s) + mu > self.K_noisy and self.j <= self.cap):
            return None
        closed_j = self.j
        self.trace.closes.append(self.t)
        self.trace.thresholds.append(self.K)
        self.j += 1
        self.H.insert(c)
        self.c = [0] * self.d
        self.s = [h + o for h, o in zip(self.H.current(), self.offset)]
        self.trace.stored.append(list(self.s))
        self.K = self.schedule.threshold(self.j)
        self.K_noisy = self.K + self._tau()
        return Closed(self.t, closed_j, list(self.s))
