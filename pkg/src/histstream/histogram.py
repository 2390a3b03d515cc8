"""Continual histogram mechanisms usable against an adaptive input process.

All classes share one contract::

    h.insert(vector)      # one d-vector of nonnegative counts
    h.current()           # noisy running sum, list of d floats
    h.err_bound(beta)     # additive error bound holding w.p. >= 1 - beta/3

With a disabled noise source ``current()`` is the exact running sum.
"""

from __future__ import annotations

import math
from typing import Sequence

from histstream.noise import NoiseSource, ParameterError


def log2(x: float) -> float:
    return math.log2(x)


def tree_levels(n: int) -> int:
    """floor(log2 n): the highest level of the dyadic tree over [1, n]."""
    return n.bit_length() - 1


def dyadic_decomposition(t: int, n: int) -> list[tuple[int, int]]:
    """Disjoint dyadic intervals covering [1, t], left to right.

    Each interval has the form [(k-1)2^i + 1, k 2^i] with k 2^i <= n.
    """
    if not 1 <= t <= n:
        raise ParameterError(f"t={t} outside [1, {n}]")
    out = []
    start = 0
    for i in range(t.bit_length() - 1, -1, -1):
        if t >> i & 1:
            out.append((start + 1, start + (1 << i)))
            start += 1 << i
    return out


class BinaryTreeCounter:
    """Binary tree mechanism for one counter over at most ``n`` inserts.

    Every dyadic node gets one noise draw when its interval starts, so the
    draw order is canonical: at time t, nodes starting at t in increasing
    level order.  Only O(log n) partial sums are kept.
    """

    def __init__(self, n: int, node_noise, noise: NoiseSource) -> None:
        if n < 1:
            raise ParameterError(f"horizon must be positive, got {n}")
        self.n = n
        self.levels = tree_levels(n)
        self._draw = node_noise
        self.noise = noise
        self._active = [0.0] * (self.levels + 1)
        self._done = [0.0] * (self.levels + 1)
        self.count = 0
        self._current = 0.0

    @classmethod
    def laplace(cls, n: int, epsilon: float, noise: NoiseSource) -> "BinaryTreeCounter":
        scale = (tree_levels(n) + 1) / epsilon
        c = cls(n, lambda: noise.laplace(scale), noise)
        c.node_scale = scale
        return c

    @classmethod
    def gaussian(cls, n: int, epsilon: float, delta: float, noise: NoiseSource) -> "BinaryTreeCounter":
        var = 2.0 * math.log(1.25 / delta) * (tree_levels(n) + 1) / epsilon**2
        sigma = math.sqrt(var)
        c = cls(n, lambda: noise.gaussian(sigma), noise)
        c.node_scale = sigma
        return c

    def insert(self, x: float) -> None:
        if self.count >= self.n:
            raise ParameterError(f"counter horizon {self.n} exhausted")
        t = self.count + 1
        n = self.n
        for i in range(self.levels + 1):
            size = 1 << i
            # node [(k-1)2^i+1, k 2^i] exists only if k 2^i <= n
            if ((t - 1) >> i << i) + size > n:
                break
            if (t - 1) & (size - 1) == 0:
                self._active[i] = self._draw()
            self._active[i] += x
            if t & (size - 1) == 0:
                self._done[i] = self._active[i]
        self.count = t
        total = 0.0
        for i in range(t.bit_length()):
            if t >> i & 1:
                total += self._done[i]
        self._current = total

    def current(self) -> float:
        return self._current


def pure_tree_error(n: int, d: int, epsilon: float, beta: float) -> float:
    """``4 d log(n) log(6dn/beta) / epsilon`` with base-2 logs; log n floored at 1."""
    return 4.0 * d * log2(max(n, 2)) * log2(6.0 * d * n / beta) / epsilon


def gaussian_tree_error(n: int, d: int, epsilon: float, delta: float, beta: float) -> float:
    """Gaussian tail bound for ``d`` composed trees, failure ``beta/3``.

    Prefix noise is a sum of at most ceil(log n) node variables, each with the
    per-counter variance used by :class:`TreeHistogram`.
    """
    m = max(1, math.ceil(log2(n))) if n > 1 else 1
    var = d * 2.0 * math.log(1.25 / delta) * (tree_levels(int(n)) + 1) / epsilon**2
    return math.sqrt(2.0 * m * var * math.log(2.0 * d * n * 3.0 / beta))


class TreeHistogram:
    """``d`` binary-tree counters composed into a continual histogram.

    Neighbouring inputs may differ in every coordinate of one insert, so each
    counter gets ``epsilon/d`` (pure) or ``epsilon/sqrt(d)`` (Gaussian) of the
    budget.
    """

    def __init__(self, n: int, d: int, epsilon: float, delta: float, noise: NoiseSource) -> None:
        if d < 1:
            raise ParameterError("d must be positive")
        if epsilon <= 0:
            raise ParameterError("epsilon must be positive")
        self.n, self.d, self.epsilon, self.delta = n, d, epsilon, delta
        if delta > 0:
            eps_c = epsilon / math.sqrt(d)
            self.counters = [BinaryTreeCounter.gaussian(n, eps_c, delta, noise) for _ in range(d)]
        else:
            self.counters = [BinaryTreeCounter.laplace(n, epsilon / d, noise) for _ in range(d)]

    @property
    def count(self) -> int:
        return self.counters[0].count

    def insert(self, vector: Sequence[float]) -> None:
        if len(vector) != self.d:
            raise ParameterError(f"expected a {self.d}-vector, got length {len(vector)}")
        if self.count >= self.n:
            raise ParameterError(f"histogram horizon {self.n} exhausted")
        for c, x in zip(self.counters, vector):
            c.insert(x)

    def current(self) -> list[float]:
        return [c.current() for c in self.counters]

    def err_bound(self, beta: float) -> float:
        return tree_error_bound(self.n, self.d, self.epsilon, self.delta, beta)


def tree_error_bound(n: int, d: int, epsilon: float, delta: float, beta: float) -> float:
    if delta > 0:
        return gaussian_tree_error(n, d, epsilon, delta, beta)
    return pure_tree_error(n, d, epsilon, beta)


class CumulativeLaplaceHistogram:
    """Running sums plus fresh ``Lap(2d/epsilon)`` per coordinate per insert.

    ``epsilon`` is the budget of the enclosing doubling mechanism; the
    histogram itself spends half of it.
    """

    def __init__(self, d: int, epsilon: float, noise: NoiseSource) -> None:
        if d < 1 or epsilon <= 0:
            raise ParameterError("need d >= 1 and epsilon > 0")
        self.d, self.epsilon, self.noise = d, epsilon, noise
        self.scale = 2.0 * d / epsilon
        self._s = [0.0] * d
        self.count = 0

    def _perturb(self) -> float:
        return self.noise.laplace(self.scale)

    def insert(self, vector: Sequence[float]) -> None:
        if len(vector) != self.d:
            raise ParameterError(f"expected a {self.d}-vector, got length {len(vector)}")
        s = self._s
        for i, x in enumerate(vector):
            s[i] += x + self._perturb()
        self.count += 1

    def current(self) -> list[float]:
        return list(self._s)

    def err_bound_after(self, j: int, T: int, beta: float) -> float:
        """Bound on every accumulated noise after ``j`` inserts, failure beta/3."""
        return 4.0 * self.d / self.epsilon * math.sqrt(2 * j) * log2(3 * self.d * log2(T) / beta)


class CumulativeGaussianHistogram(CumulativeLaplaceHistogram):
    """Running sums plus fresh ``N(0, 2d ln(2e^{eps/2}/delta)/eps^2)`` per insert."""

    def __init__(self, d: int, epsilon: float, delta: float, noise: NoiseSource) -> None:
        if not 0 < delta < 1:
            raise ParameterError("the Gaussian histogram needs 0 < delta < 1")
        super().__init__(d, epsilon, noise)
        self.delta = delta
        self.variance = 2.0 * d * math.log(2.0 * math.exp(epsilon / 2) / delta) / epsilon**2
        self.sigma = math.sqrt(self.variance)

    def _perturb(self) -> float:
        return self.noise.gaussian(self.sigma)

    def err_bound_after(self, j: int, T: int, beta: float) -> float:
        lg = math.log(2.0 * math.exp(self.epsilon / 2) / self.delta)
        return 2.0 / self.epsilon * math.sqrt(j * self.d * lg * log2(3 * self.d * log2(T) / beta))
