"""Streams of d-bit rows, synthetic generators, file I/O and the exact oracle."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from histstream.noise import ParameterError


@dataclass(frozen=True)
class Stream:
    """Rows ``x^1..x^n`` (n <= horizon) over {0,1}^d, stored as an (n, d) array."""

    d: int
    T: int
    rows: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if self.d < 1 or self.T < 1:
            raise ParameterError(f"need d >= 1 and T >= 1, got d={self.d}, T={self.T}")
        rows = np.asarray(self.rows, dtype=np.int8)
        if rows.size == 0:
            rows = rows.reshape(0, self.d)
        if rows.ndim != 2 or rows.shape[1] != self.d:
            raise ParameterError(f"rows must have shape (n, {self.d}), got {rows.shape}")
        if rows.shape[0] > self.T:
            raise ParameterError(f"{rows.shape[0]} rows exceed horizon T={self.T}")
        if rows.size and (rows.min() < 0 or rows.max() > 1):
            raise ParameterError("rows must be 0/1 valued")
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)

    def __len__(self) -> int:
        return self.rows.shape[0]

    def __iter__(self):
        return iter(self.rows)

    def prefix_sums(self) -> np.ndarray:
        """(n+1, d) array whose row t is the exact histogram at time t."""
        out = np.zeros((len(self) + 1, self.d), dtype=np.int64)
        np.cumsum(self.rows, axis=0, out=out[1:])
        return out

    def max_column_sum(self) -> int:
        return int(self.rows.sum(axis=0).max()) if len(self) else 0


def exact_prefix(stream: Stream, t: int) -> np.ndarray:
    """True column sums after ``t`` rows; ``t = 0`` gives the zero vector."""
    if not 0 <= t <= len(stream):
        raise ParameterError(f"t={t} outside [0, {len(stream)}]")
    return stream.rows[:t].sum(axis=0, dtype=np.int64)


# -- generators -----------------------------------------------------------------


@dataclass(frozen=True)
class GeneratorSpec:
    """A synthetic stream family.

    kinds: ``bernoulli`` (``p``, or per-column ``p`` as a list), ``bursty``
    (``on``/``off`` block lengths and in-burst probability ``p``), ``zero``,
    ``hot`` (single column ``col`` always 1) and ``bounded`` (each column gets
    ``c`` ones at uniformly random times, so every column sum ends at ``c``).
    """

    kind: str
    params: tuple = ()

    def get(self, key, default=None):
        return dict(self.params).get(key, default)

    @classmethod
    def parse(cls, text: str) -> "GeneratorSpec":
        """Parse CLI strings such as ``bernoulli:p=0.3`` or ``hot:col=1``."""
        kind, _, rest = text.partition(":")
        kind = kind.strip().lower()
        aliases = {"allzero": "zero", "singlehot": "hot", "single-hot": "hot"}
        kind = aliases.get(kind, kind)
        if kind not in {"bernoulli", "bursty", "zero", "hot", "bounded"}:
            raise ParameterError(f"unknown generator kind {kind!r}")
        params = []
        for item in filter(None, (s.strip() for s in rest.split(","))):
            key, eq, val = item.partition("=")
            if not eq:
                raise ParameterError(f"bad generator parameter {item!r}")
            if "/" in val:
                params.append((key, tuple(float(v) for v in val.split("/"))))
            else:
                params.append((key, float(val) if "." in val or "e" in val else int(val)))
        return cls(kind, tuple(params))

    def __str__(self) -> str:
        if not self.params:
            return self.kind
        parts = []
        for k, v in self.params:
            if isinstance(v, tuple):
                v = "/".join(repr(x) for x in v)
            parts.append(f"{k}={v}")
        return f"{self.kind}:" + ",".join(parts)


def generate(spec: GeneratorSpec | str, d: int, T: int, seed=0) -> Stream:
    """Draw a reproducible stream of exactly ``T`` rows."""
    if isinstance(spec, str):
        spec = GeneratorSpec.parse(spec)
    if d < 1 or T < 1:
        raise ParameterError(f"need d >= 1 and T >= 1, got d={d}, T={T}")
    rng = np.random.default_rng(seed)
    if spec.kind == "zero":
        rows = np.zeros((T, d), dtype=np.int8)
    elif spec.kind == "hot":
        col = int(spec.get("col", 0))
        if not 0 <= col < d:
            raise ParameterError(f"column {col} out of range for d={d}")
        rows = np.zeros((T, d), dtype=np.int8)
        rows[:, col] = 1
    elif spec.kind == "bernoulli":
        p = np.broadcast_to(np.asarray(spec.get("p", 0.5), dtype=float), (d,))
        if np.any((p < 0) | (p > 1)):
            raise ParameterError("p must lie in [0, 1]")
        rows = (rng.random((T, d)) < p).astype(np.int8)
    elif spec.kind == "bursty":
        on, off = int(spec.get("on", 16)), int(spec.get("off", 48))
        p = float(spec.get("p", 0.8))
        if on < 1 or off < 0:
            raise ParameterError("bursty needs on >= 1 and off >= 0")
        phase = (np.arange(T) % (on + off)) < on
        rows = ((rng.random((T, d)) < p) & phase[:, None]).astype(np.int8)
    else:  # bounded
        c = int(spec.get("c", 32))
        if not 0 <= c <= T:
            raise ParameterError(f"bounded needs 0 <= c <= T, got c={c}")
        rows = np.zeros((T, d), dtype=np.int8)
        for i in range(d):
            rows[rng.choice(T, size=c, replace=False), i] = 1
    return Stream(d, T, rows)


# -- neighbours -------------------------------------------------------------------


def make_neighbors(stream: Stream, t_star: int, new_row: Sequence[int]) -> Stream:
    """Replace row ``t_star`` (1-based) with ``new_row``."""
    if not 1 <= t_star <= len(stream):
        raise ParameterError(f"t*={t_star} outside [1, {len(stream)}]")
    new_row = np.asarray(new_row, dtype=np.int8)
    if new_row.shape != (stream.d,):
        raise ParameterError(f"new row must have length {stream.d}")
    rows = stream.rows.copy()
    rows[t_star - 1] = new_row
    return Stream(stream.d, stream.T, rows)


def make_independent_neighbors(stream: Stream, flip_times: Sequence[int | None]) -> Stream:
    """Flip column ``i`` at time ``flip_times[i]`` (1-based; ``None`` leaves it)."""
    if len(flip_times) != stream.d:
        raise ParameterError(f"need one flip time per column ({stream.d})")
    rows = stream.rows.copy()
    for i, t in enumerate(flip_times):
        if t is None:
            continue
        if not 1 <= t <= len(stream):
            raise ParameterError(f"flip time {t} outside [1, {len(stream)}]")
        rows[t - 1, i] ^= 1
    return Stream(stream.d, stream.T, rows)


# -- file format --------------------------------------------------------------------


def write_stream(stream: Stream, path: str | Path) -> None:
    lines = [f"d={stream.d} T={stream.T}"]
    lines += [",".join(str(int(b)) for b in row) for row in stream.rows]
    Path(path).write_text("\n".join(lines) + "\n")


def read_stream(path: str | Path) -> Stream:
    """Read the ``d=<d> T=<T>`` header format; extra rows beyond T are an error."""
    text = Path(path).read_text().splitlines()
    if not text:
        raise ParameterError(f"{path}: empty stream file")
    header = dict(tok.split("=", 1) for tok in text[0].split())
    try:
        d, T = int(header["d"]), int(header["T"])
    except (KeyError, ValueError) as exc:
        raise ParameterError(f"{path}: bad header {text[0]!r}") from exc
    rows = []
    for lineno, line in enumerate(text[1:], start=2):
        line = line.strip()
        if not line:
            continue
        vals = [int(v) for v in line.split(",")]
        if len(vals) != d:
            raise ParameterError(f"{path}:{lineno}: expected {d} entries, got {len(vals)}")
        rows.append(vals)
    return Stream(d, T, np.array(rows, dtype=np.int8).reshape(len(rows), d))
