"""Monotone sensitivity-1 histogram queries and the two error metrics.

Column indices are 0-based throughout.  Time steps are 1-based.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from histstream.noise import ParameterError
from histstream.streams import Stream

_KINDS = ("max", "min", "quantile", "count", "topkval")


def quantile(q: float, sums: Sequence[float]) -> float:
    """Smallest ``c_j`` with ``|{i : c_i <= c_j}| >= q*d``.

    Works on real-valued (noisy) vectors too.
    """
    if not 0 < q <= 1:
        raise ParameterError(f"q must lie in (0, 1], got {q}")
    d = len(sums)
    if d == 0:
        raise ParameterError("quantile of an empty vector")
    rank = max(1, math.ceil(q * d - 1e-9))
    return sorted(sums)[rank - 1]


@dataclass(frozen=True)
class Query:
    """A query on the histogram.

    ``kind`` is one of ``max``, ``min``, ``quantile`` (``arg`` = q),
    ``count`` (``arg`` = column) or ``topkval`` (``arg`` = rank r, the r-th
    largest column sum).
    """

    kind: str
    arg: float | int | None = None

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ParameterError(f"unknown query kind {self.kind!r}")
        if self.kind == "quantile" and not (self.arg is not None and 0 < self.arg <= 1):
            raise ParameterError(f"quantile needs q in (0, 1], got {self.arg}")
        if self.kind in ("count", "topkval") and (self.arg is None or int(self.arg) != self.arg):
            raise ParameterError(f"{self.kind} needs an integer argument")
        if self.kind == "topkval" and self.arg < 1:
            raise ParameterError("topkval rank starts at 1")
        if self.kind == "count" and self.arg < 0:
            raise ParameterError("column index must be nonnegative")

    def __call__(self, sums: Sequence[float]) -> float:
        return eval_query(self, sums)

    def __str__(self) -> str:
        return self.kind if self.arg is None else f"{self.kind}:{self.arg}"

    @classmethod
    def parse(cls, text: str) -> "Query":
        kind, _, arg = text.strip().lower().partition(":")
        kind = {"maxsum": "max", "minsum": "min", "median": "quantile", "col": "count"}.get(
            kind, kind
        )
        if kind == "quantile":
            return cls(kind, float(arg) if arg else 0.5)
        if kind in ("count", "topkval"):
            if not arg:
                raise ParameterError(f"{kind} needs an argument, e.g. {kind}:1")
            return cls(kind, int(arg))
        if arg:
            raise ParameterError(f"{kind} takes no argument")
        return cls(kind)


MAXSUM = Query("max")
MINSUM = Query("min")


def eval_query(query: Query, sums: Sequence[float]) -> float:
    d = len(sums)
    if query.kind == "max":
        return max(sums)
    if query.kind == "min":
        return min(sums)
    if query.kind == "quantile":
        return quantile(query.arg, sums)
    if query.kind == "count":
        if query.arg >= d:
            raise ParameterError(f"column {query.arg} out of range for d={d}")
        return sums[int(query.arg)]
    r = int(query.arg)
    if r > d:
        raise ParameterError(f"rank {r} exceeds d={d}")
    return sorted(sums)[d - r]


@dataclass(frozen=True)
class QuerySet:
    queries: tuple[Query, ...]

    def __post_init__(self) -> None:
        if not self.queries:
            raise ParameterError("a query set needs at least one query")
        object.__setattr__(self, "queries", tuple(self.queries))

    def __len__(self) -> int:
        return len(self.queries)

    def __iter__(self):
        return iter(self.queries)

    def __str__(self) -> str:
        return ",".join(str(q) for q in self.queries)

    @classmethod
    def parse(cls, text: str) -> "QuerySet":
        """``"max,quantile:0.5,topkval:3"``."""
        return cls(tuple(Query.parse(p) for p in text.split(",") if p.strip()))

    def check_dimension(self, d: int) -> None:
        for q in self.queries:
            if q.kind == "count" and q.arg >= d:
                raise ParameterError(f"query {q} needs d > {q.arg}")
            if q.kind == "topkval" and q.arg > d:
                raise ParameterError(f"query {q} needs d >= {q.arg}")

    def evaluate(self, sums: Sequence[float]) -> list[float]:
        return [eval_query(q, sums) for q in self.queries]

    def truth(self, stream: Stream) -> np.ndarray:
        """(n, k) matrix of exact answers at t = 1..n."""
        prefix = stream.prefix_sums()[1:]
        return np.array([[eval_query(q, row) for q in self.queries] for row in prefix.tolist()],
                        dtype=float).reshape(len(stream), len(self))


def select_indices(noisy_sums: Sequence[float], k: int) -> list[int]:
    """Indices of the ``k`` largest entries, largest first; ties go to the lower index."""
    d = len(noisy_sums)
    if not 1 <= k <= d:
        raise ParameterError(f"need 1 <= k <= d={d}, got {k}")
    order = sorted(range(d), key=lambda i: (-noisy_sums[i], i))
    return order[:k]


# -- error metrics ------------------------------------------------------------------


@dataclass
class ErrorReport:
    max_abs_error: float
    errors: np.ndarray = field(repr=False)  # (n, k)
    alpha_at_beta: float | None = None


def general_error(outputs, truth_stream: Stream, query_set: QuerySet) -> ErrorReport:
    """``max_t max_i |g_i(h^t) - a_i^t|`` with the full error matrix."""
    out = np.asarray(outputs, dtype=float)
    if out.ndim == 1:
        out = out[:, None]
    truth = query_set.truth(truth_stream)
    if out.shape != truth.shape:
        raise ParameterError(f"outputs have shape {out.shape}, expected {truth.shape}")
    errs = np.abs(truth - out)
    return ErrorReport(float(errs.max()) if errs.size else 0.0, errs)


def topk_select_error(index_outputs, truth_stream: Stream, k: int) -> float:
    """Compare the l-th largest true sum with the true sum of the l-th reported index."""
    idx = np.asarray(index_outputs, dtype=int)
    if idx.ndim == 1:
        idx = idx[:, None]
    n = len(truth_stream)
    if idx.shape != (n, k):
        raise ParameterError(f"index outputs have shape {idx.shape}, expected {(n, k)}")
    if idx.size and (idx.min() < 0 or idx.max() >= truth_stream.d):
        raise ParameterError("reported index out of range")
    sums = truth_stream.prefix_sums()[1:]
    ranked = -np.sort(-sums, axis=1)[:, :k]
    reported = np.take_along_axis(sums, idx, axis=1)
    return float(np.abs(ranked - reported).max()) if n else 0.0


def empirical_alpha(max_errors: Sequence[float], beta: float) -> float:
    """Smallest observed alpha with empirical P(err > alpha) <= beta."""
    errs = np.sort(np.asarray(max_errors, dtype=float))
    if errs.size == 0:
        raise ParameterError("no errors to summarise")
    idx = max(0, math.ceil((1 - beta) * errs.size) - 1)
    return float(errs[idx])
