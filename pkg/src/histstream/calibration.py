"""Calibration constants for the partitioning mechanisms.

Where a bound is written with ``log`` it is evaluated base 2; ``ln`` is the
natural log.  Base 2 is the larger of the two, so the ``log`` bounds are never
looser than their natural-log counterparts.
"""

from __future__ import annotations

import math

from histstream.histogram import log2


def alpha_mu(epsilon: float, T: int, beta: float) -> float:
    """Bound on all ``T`` query noises Lap(8/eps), failure beta/3."""
    return 8.0 / epsilon * log2(3.0 * T / beta)


def alpha_tau(epsilon: float, count: float, beta: float) -> float:
    """Bound on ``count`` threshold noises Lap(4/eps), failure beta/3."""
    return 4.0 / epsilon * log2(3.0 * max(count, 1.0) / beta)


def doubling_cap(T: int) -> int:
    """Largest segment index j allowed to close (``j < log T``)."""
    return max(0, math.ceil(log2(T)) - 1) if T > 1 else 0


def segment_bound(epsilon: float, d: int, c_max: float, T: int, beta: float, delta: float = 0.0) -> float:
    """Upper bound ``L`` on the number of segments of the doubling mechanism."""
    c = max(c_max, 1.0)
    if delta > 0:
        val = (
            log2(24.0 * d * c / epsilon**2)
            + 8.0 * log2(log2(T / beta))
            + log2(math.log(2.0 * math.exp(epsilon / 2) / delta))
        )
    else:
        val = (
            log2(20.0 * d * c / epsilon**2)
            + 4.0 * log2(log2(T / beta))
            + log2(log2(3.0 * d * log2(T) / beta))
        )
    return min(val, log2(T))


def alpha_gamma(epsilon: float, d: int, L: float, T: int, beta: float, delta: float = 0.0) -> float:
    """Bound on the doubling mechanism's stored-histogram error."""
    lg = log2(3.0 * d * log2(T) / beta)
    if delta > 0:
        return 2.0 / epsilon * math.sqrt(L * d * math.log(2.0 * math.exp(epsilon / 2) / delta) * lg)
    return 4.0 * d / epsilon * math.sqrt(2.0 * L) * lg


def alpha_dm(epsilon: float, L: float, a_gamma: float, T: int, beta: float) -> float:
    return 12.0 / epsilon * log2(3.0 * T / beta) + a_gamma + L


def kquery_C(epsilon: float, k: int, cap: float, T: int, beta: float) -> float:
    """Threshold-update margin for the pure k-query mechanism."""
    return 18.0 / epsilon * (k * math.log(6.0 * k * cap / beta) + math.log(6.0 * T / beta))


def alpha_sv(epsilon: float, k: int, cap: float, T: int, beta: float) -> float:
    return 12.0 / epsilon * (math.log(6.0 * k * cap / beta) + math.log(6.0 * T / beta))


def alpha_u(epsilon: float, k: int, cap: float, beta: float, delta: float) -> float:
    inner = 12.0 * math.exp(2 * epsilon / 3) * k * cap / (beta * delta)
    return 6.0 / epsilon * math.sqrt(k * math.log(inner))


def ed_modified_C(epsilon: float, k: int, cap: float, T: int, beta: float, delta: float) -> float:
    inner = 12.0 * math.exp(2 * epsilon / 3) * k * cap / (beta * delta)
    return 12.0 / epsilon * (
        math.sqrt(k * math.log(inner)) + math.log(6.0 * k * cap / beta) + math.log(6.0 * T / beta)
    )


def ed_histogram_delta(epsilon: float, delta: float) -> float:
    """delta given to the inner histogram of the (eps, delta) k-query mechanisms."""
    return delta / (2.0 * math.exp(2 * epsilon / 3))


def ed_update_sigma(epsilon: float, k: int, delta: float) -> float:
    return math.sqrt(18.0 * k * math.log(4.0 * math.exp(2 * epsilon / 3) / delta)) / epsilon
