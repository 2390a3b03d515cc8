"""Answering k monotone sensitivity-1 queries at every time step.

The bounded mechanism keeps one threshold per query but a single shared
threshold noise and a single query noise per step, so deciding *whether* to
close costs constant noise; deciding *which* thresholds to raise costs noise
scaled with k, paid only at closes.  Each class takes ``params.delta > 0`` to
select its (eps, delta) counterpart: Gaussian histogram and update noise,
Laplace sparse-vector noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from histstream import calibration as cal
from histstream.histogram import TreeHistogram, tree_error_bound
from histstream.maxsum import DoublingMechanism, SegmentReport
from histstream.noise import NoiseSource, ParameterError, PrivacyParams
from histstream.queries import QuerySet


@dataclass
class KQueryTrace:
    closes: list[int] = field(default_factory=list)
    raised: list[tuple[int, ...]] = field(default_factory=list)  # queries raised at each close
    stored: list[list[float]] = field(default_factory=list)
    noisy_offsets: list[tuple[float, ...]] = field(default_factory=list)  # K~_(i) - K_(i) per refresh


class KQueryMechanism:
    """Bounded k-query mechanism.

    Without ``s0`` this is the known-bound mechanism with ``cap = c_max``.
    With ``s0``/``alpha_gamma`` it is the modified mechanism started from a
    noisy histogram, with ``cap = Delta``.  Intervals close while
    ``j <= k * cap``.
    """

    def __init__(
        self,
        d: int,
        T: int,
        queries: QuerySet,
        cap: float,
        params: PrivacyParams,
        noise: NoiseSource,
        s0: Sequence[float] | None = None,
        alpha_gamma: float = 0.0,
        C: float | None = None,
        K: float | None = None,
    ) -> None:
        if cap < 1:
            raise ParameterError("the query bound must be at least 1")
        queries.check_dimension(d)
        self.d, self.T, self.queries, self.params, self.noise = d, T, queries, params, noise
        eps, delta, beta = params.epsilon, params.delta, params.beta
        k = len(queries)
        self.k = k
        self.modified = s0 is not None
        self.cap = cap
        self.max_closes = k * cap
        n = max(1, int(math.floor(k * cap)))
        self.gaussian = delta > 0
        if self.gaussian:
            h_delta = cal.ed_histogram_delta(eps, delta)
            self.H = TreeHistogram(n, d, eps / 3, h_delta, noise)
            self.err = tree_error_bound(k * cap, d, eps / 3, h_delta, beta)
            if C is None:
                if self.modified:
                    C = cal.ed_modified_C(eps, k, cap, T, beta, delta)
                else:
                    C = cal.alpha_sv(eps, k, cap, T, beta) + cal.alpha_u(eps, k, cap, beta, delta)
            self.update_sigma = cal.ed_update_sigma(eps, k, delta)
        else:
            self.H = TreeHistogram(n, d, eps / 3, 0.0, noise)
            self.err = tree_error_bound(k * cap, d, eps / 3, 0.0, beta)
            if C is None:
                C = cal.kquery_C(eps, k, cap, T, beta)
            self.update_scale = 3.0 * k / eps
        self.C = C
        if K is None:
            K = 3.0 * (C + self.err + (alpha_gamma if self.modified else 0.0))
        self.Kstep = K
        self.alpha_gamma = alpha_gamma
        self.offset = [float(v) for v in s0] if s0 is not None else [0.0] * d
        if len(self.offset) != d:
            raise ParameterError(f"initial histogram must have length {d}")
        self.mu_scale = 12.0 / eps
        self.tau_scale = 6.0 / eps
        self.t = 0
        self.j = 1
        self.c = [0] * d
        self.s = list(self.offset)
        self.trace = KQueryTrace()
        start = queries.evaluate(self.offset)
        self.thresholds = [g + K for g in start]
        self._refresh()
        self.out = start

    def _refresh(self) -> None:
        tau = self.noise.laplace(self.tau_scale)
        self.noisy_thresholds = [K + tau for K in self.thresholds]
        self.trace.noisy_offsets.append(tuple(nk - K for nk, K in zip(self.noisy_thresholds, self.thresholds)))

    def _update_noise(self) -> float:
        if self.gaussian:
            return self.noise.gaussian(self.update_sigma)
        return self.noise.laplace(self.update_scale)

    @property
    def n_closes(self) -> int:
        return len(self.trace.closes)

    def step(self, row: Sequence[int]) -> list[float]:
        if self.t >= self.T:
            raise ParameterError(f"stream horizon T={self.T} exceeded")
        self.t += 1
        c, s = self.c, self.s
        for i, x in enumerate(row):
            if x:
                c[i] += x
                s[i] += x
        mu = self.noise.laplace(self.mu_scale)
        values = self.queries.evaluate(s)
        crossed = any(v + mu > nk for v, nk in zip(values, self.noisy_thresholds))
        if not (crossed and self.j <= self.max_closes):
            return self.out
        self.trace.closes.append(self.t)
        self.j += 1
        self.H.insert(c)
        self.c = [0] * self.d
        raised = []
        for i, v in enumerate(values):
            if v + self._update_noise() > self.thresholds[i] - self.C:
                self.thresholds[i] += self.Kstep
                raised.append(i)
        self.trace.raised.append(tuple(raised))
        self._refresh()
        self.s = [h + o for h, o in zip(self.H.current(), self.offset)]
        self.trace.stored.append(list(self.s))
        self.out = self.queries.evaluate(self.s)
        return self.out


def max_of(queries: QuerySet):
    def g(s: Sequence[float]) -> float:
        return max(queries.evaluate(s))

    return g


class KDoublingMechanism(DoublingMechanism):
    """Doubling segmentation on ``max_i g_i``; reports query values at closes."""

    def __init__(self, d: int, T: int, queries: QuerySet, params: PrivacyParams, noise: NoiseSource) -> None:
        queries.check_dimension(d)
        self.queries = queries
        super().__init__(d, T, params, noise, g=max_of(queries))


class KTwoLevelMechanism:
    """k queries without a known bound; total cost ``2 eps`` (or ``(2 eps, 2 delta)``)."""

    def __init__(self, d: int, T: int, queries: QuerySet, params: PrivacyParams, noise: NoiseSource) -> None:
        self.d, self.T, self.queries, self.params, self.noise = d, T, queries, params, noise
        self.L = cal.log2(T)
        self.outer = KDoublingMechanism(d, T, queries, params, noise)
        self.alpha_gamma = cal.alpha_gamma(params.epsilon, d, self.L, T, params.beta, params.delta)
        self.alpha_dm = cal.alpha_dm(params.epsilon, self.L, self.alpha_gamma, T, params.beta)
        self.inner_runs: list[KQueryMechanism] = []
        self._start_inner([0.0] * d)
        self.out = self.inner.out

    def segment_bound(self, j: int) -> float:
        return 2 ** (j - 1) + 2 * self.alpha_dm

    def _start_inner(self, s: Sequence[float]) -> None:
        self.inner = KQueryMechanism(
            self.d, self.T, self.queries, self.segment_bound(self.outer.j), self.params, self.noise,
            s0=s, alpha_gamma=self.alpha_gamma,
        )
        self.inner_runs.append(self.inner)

    @property
    def trace(self):
        return self.outer.trace

    def step(self, row: Sequence[int]) -> list[float]:
        rep: SegmentReport | None = self.outer.step(row)
        if rep is not None:
            self._start_inner(rep.s)
            self.out = self.queries.evaluate(rep.s)
        else:
            self.out = self.inner.step(row)
        return self.out
