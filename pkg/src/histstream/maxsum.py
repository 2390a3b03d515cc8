"""MaxSum under continual observation.

* :class:`BoundedMaxSum` needs an upper bound ``c_max`` on the final maximum.
* :class:`DoublingMechanism` splits the stream into segments in which the
  maximum roughly doubles and emits a noisy histogram at each segment end.
* :class:`ModifiedBoundedMaxSum` is the bounded mechanism started from a
  noisy histogram with a known error and a bound on the increase.
* :class:`TwoLevelMaxSum` runs the doubling mechanism and restarts a
  modified bounded mechanism in every segment; it needs no ``c_max``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

from histstream import calibration as cal
from histstream.histogram import (
    CumulativeGaussianHistogram,
    CumulativeLaplaceHistogram,
    TreeHistogram,
    tree_error_bound,
)
from histstream.noise import NoiseSource, ParameterError, PrivacyParams
from histstream.partition import MetaMechanism, ThresholdSchedule


@dataclass(frozen=True)
class BoundedConfig:
    """Derived constants of the bounded mechanism; recomputed on access."""

    c_max: int
    T: int
    d: int
    epsilon: float
    beta: float
    delta: float = 0.0

    @property
    def alpha_mu(self) -> float:
        return cal.alpha_mu(self.epsilon, self.T, self.beta)

    @property
    def alpha_tau(self) -> float:
        return cal.alpha_tau(self.epsilon, self.c_max, self.beta)

    @property
    def err(self) -> float:
        """Error bound of the histogram, which runs at epsilon/2."""
        return tree_error_bound(self.c_max, self.d, self.epsilon / 2, self.delta, self.beta)

    @property
    def alpha_bms(self) -> float:
        return self.err + self.alpha_mu + self.alpha_tau

    @property
    def K(self) -> float:
        return 3.0 * self.alpha_bms


@dataclass
class SegmentReport:
    j: int
    t: int
    s: list[float]


class BoundedMaxSum:
    """MaxSum given ``c_max``; outputs ``max_i s_i`` of the last closed interval."""

    def __init__(
        self,
        d: int,
        T: int,
        c_max: int,
        params: PrivacyParams,
        noise: NoiseSource,
        K: float | None = None,
        threshold_noise: bool = True,
    ) -> None:
        if c_max < 1:
            raise ParameterError("c_max must be at least 1")
        self.config = BoundedConfig(c_max, T, d, params.epsilon, params.beta, params.delta)
        self.K = self.config.K if K is None else K
        H = TreeHistogram(c_max, d, params.epsilon / 2, params.delta, noise)
        self.core = MetaMechanism(
            d, T, params.epsilon, max, H, c_max,
            ThresholdSchedule.additive(self.K), noise, threshold_noise=threshold_noise,
        )
        self.out = 0.0

    @property
    def trace(self):
        return self.core.trace

    def step(self, row: Sequence[int]) -> float:
        ev = self.core.step(row)
        if ev is not None:
            self.out = max(ev.s)
        return self.out


class DoublingMechanism:
    """Segment the stream where ``g`` of the histogram roughly doubles.

    ``g`` defaults to the maximum column sum.  With ``params.delta > 0`` the
    segment histograms get Gaussian instead of Laplace noise.
    """

    def __init__(
        self,
        d: int,
        T: int,
        params: PrivacyParams,
        noise: NoiseSource,
        g: Callable[[Sequence[float]], float] = max,
    ) -> None:
        self.d, self.T, self.params = d, T, params
        if params.delta > 0:
            self.H = CumulativeGaussianHistogram(d, params.epsilon, params.delta, noise)
        else:
            self.H = CumulativeLaplaceHistogram(d, params.epsilon, noise)
        self.cap = cal.doubling_cap(T)
        self.core = MetaMechanism(
            d, T, params.epsilon, g, self.H, self.cap, ThresholdSchedule.doubling(), noise
        )

    @property
    def trace(self):
        return self.core.trace

    @property
    def j(self) -> int:
        return self.core.j

    @property
    def s(self) -> list[float]:
        return self.core.s

    def alpha_gamma(self, L: float | None = None) -> float:
        L = cal.log2(self.T) if L is None else L
        p = self.params
        return cal.alpha_gamma(p.epsilon, self.d, L, self.T, p.beta, p.delta)

    def step(self, row: Sequence[int]) -> SegmentReport | None:
        ev = self.core.step(row)
        if ev is None:
            return None
        return SegmentReport(ev.j, ev.t, ev.s)


class ModifiedBoundedMaxSum:
    """Bounded MaxSum started at time ``t0`` from a noisy histogram ``s0``.

    ``alpha_gamma`` bounds the error of ``s0`` and ``Delta`` bounds how much
    the true maximum may grow while this instance runs.
    """

    def __init__(
        self,
        d: int,
        T: int,
        t0: int,
        s0: Sequence[float],
        alpha_gamma: float,
        Delta: float,
        params: PrivacyParams,
        noise: NoiseSource,
        K: float | None = None,
    ) -> None:
        if Delta < 1:
            raise ParameterError("Delta must be at least 1")
        eps, beta = params.epsilon, params.beta
        self.t0, self.Delta, self.alpha_gamma = t0, Delta, alpha_gamma
        n = int(math.floor(Delta))
        self.err = tree_error_bound(Delta, d, eps / 2, params.delta, beta)
        if K is None:
            K = 3.0 * (alpha_gamma + self.err + cal.alpha_mu(eps, T, beta) + cal.alpha_tau(eps, Delta, beta))
        self.K = K
        H = TreeHistogram(n, d, eps / 2, params.delta, noise)
        base = max(s0)
        self.core = MetaMechanism(
            d, T, eps, max, H, Delta, ThresholdSchedule.additive(K, base), noise, initial=s0
        )
        self.out = float(base)

    @property
    def trace(self):
        return self.core.trace

    def step(self, row: Sequence[int]) -> float:
        ev = self.core.step(row)
        if ev is not None:
            self.out = max(ev.s)
        return self.out


class TwoLevelMaxSum:
    """MaxSum without a known bound: doubling segments, bounded inner runs.

    Total privacy cost is ``2 * epsilon`` (or ``(2 eps, 2 delta)``).  The
    segment bound ``L`` is taken as ``log2 T`` since ``c_max`` is unknown.
    """

    def __init__(self, d: int, T: int, params: PrivacyParams, noise: NoiseSource) -> None:
        self.d, self.T, self.params, self.noise = d, T, params, noise
        self.L = cal.log2(T)
        self.outer = DoublingMechanism(d, T, params, noise)
        self.alpha_gamma = cal.alpha_gamma(params.epsilon, d, self.L, T, params.beta, params.delta)
        self.alpha_dm = cal.alpha_dm(params.epsilon, self.L, self.alpha_gamma, T, params.beta)
        self.inner_runs: list[ModifiedBoundedMaxSum] = []
        self._start_inner(0, [0.0] * d)
        self.out = 0.0
        self.t = 0

    def segment_bound(self, j: int) -> float:
        return 2 ** (j - 1) + 2 * self.alpha_dm

    def _start_inner(self, t: int, s: Sequence[float]) -> None:
        self.inner = ModifiedBoundedMaxSum(
            self.d, self.T, t, s, self.alpha_gamma, self.segment_bound(self.outer.j),
            self.params, self.noise,
        )
        self.inner_runs.append(self.inner)

    @property
    def trace(self):
        return self.outer.trace

    def interval_closes(self) -> list[int]:
        return sorted(t for run in self.inner_runs for t in run.trace.closes)

    def step(self, row: Sequence[int]) -> float:
        self.t += 1
        rep = self.outer.step(row)
        if rep is not None:
            self._start_inner(rep.t, rep.s)
            self.out = max(rep.s)
        else:
            self.out = self.inner.step(row)
        return self.out
