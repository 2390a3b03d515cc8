"""Uniform adapters over every mechanism, keyed by a CLI id.

Each adapter exposes ``step(row) -> list[float]`` (one answer per query),
``closes`` (interval close times of the innermost partition) and
``segment_closes`` (segment close times of an outer doubling mechanism, empty
when there is none).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from histstream import calibration as cal
from histstream.histogram import TreeHistogram
from histstream.kquery import KDoublingMechanism, KQueryMechanism, KTwoLevelMechanism
from histstream.maxsum import BoundedMaxSum, DoublingMechanism, TwoLevelMaxSum
from histstream.noise import NoiseSource, ParameterError, PrivacyParams
from histstream.queries import QuerySet


@dataclass(frozen=True)
class MechanismSpec:
    name: str
    build: Callable[..., "Adapter"]
    maxsum_only: bool = False
    needs_bound: bool = False
    needs_delta: bool = False
    allows_delta: bool = True


class Adapter:
    def __init__(self, queries: QuerySet) -> None:
        self.queries = queries

    def step(self, row: Sequence[int]) -> list[float]:
        raise NotImplementedError

    @property
    def closes(self) -> list[int]:
        return []

    @property
    def segment_closes(self) -> list[int]:
        return []

    @property
    def cap(self) -> float | None:
        """Absolute bound on the number of interval closes of one partition."""
        return None

    def stored(self) -> list[tuple[int, list[float]]]:
        """(close time, stored noisy histogram) of the outer segmentation."""
        return []


class _Bounded(Adapter):
    def __init__(self, d, T, queries, params, noise, c_max):
        super().__init__(queries)
        self.mech = BoundedMaxSum(d, T, max(1, int(c_max)), params, noise)

    def step(self, row):
        return [self.mech.step(row)]

    @property
    def closes(self):
        return self.mech.trace.closes

    @property
    def cap(self):
        return self.mech.core.cap


class _Doubling(Adapter):
    def __init__(self, d, T, queries, params, noise, c_max=None):
        super().__init__(queries)
        self.mech = DoublingMechanism(d, T, params, noise, g=lambda s: max(queries.evaluate(s)))
        self.out = queries.evaluate([0.0] * d)

    def step(self, row):
        rep = self.mech.step(row)
        if rep is not None:
            self.out = self.queries.evaluate(rep.s)
        return self.out

    @property
    def closes(self):
        return self.mech.trace.closes

    @property
    def segment_closes(self):
        return self.mech.trace.closes

    @property
    def cap(self):
        return self.mech.cap

    def stored(self):
        tr = self.mech.trace
        return list(zip(tr.closes, tr.stored))


class _TwoLevel(Adapter):
    def __init__(self, d, T, queries, params, noise, c_max=None):
        super().__init__(queries)
        self.mech = TwoLevelMaxSum(d, T, params, noise)

    def step(self, row):
        return [self.mech.step(row)]

    @property
    def closes(self):
        return self.mech.interval_closes()

    @property
    def segment_closes(self):
        return self.mech.trace.closes

    def stored(self):
        tr = self.mech.trace
        return list(zip(tr.closes, tr.stored))


class _KQuery(Adapter):
    def __init__(self, d, T, queries, params, noise, c_max):
        super().__init__(queries)
        self.mech = KQueryMechanism(d, T, queries, max(1, int(c_max)), params, noise)

    def step(self, row):
        return list(self.mech.step(row))

    @property
    def closes(self):
        return self.mech.trace.closes

    @property
    def cap(self):
        return self.mech.max_closes


class _KTwoLevel(Adapter):
    def __init__(self, d, T, queries, params, noise, c_max=None):
        super().__init__(queries)
        self.mech = KTwoLevelMechanism(d, T, queries, params, noise)

    def step(self, row):
        return list(self.mech.step(row))

    @property
    def closes(self):
        return sorted(t for run in self.mech.inner_runs for t in run.trace.closes)

    @property
    def segment_closes(self):
        return self.mech.trace.closes

    def stored(self):
        tr = self.mech.trace
        return list(zip(tr.closes, tr.stored))


class _KDoubling(_Doubling):
    def __init__(self, d, T, queries, params, noise, c_max=None):
        Adapter.__init__(self, queries)
        self.mech = KDoublingMechanism(d, T, queries, params, noise)
        self.out = queries.evaluate([0.0] * d)


class _BaselineTree(Adapter):
    """Queries evaluated on a binary-tree histogram updated every step."""

    def __init__(self, d, T, queries, params, noise, c_max=None):
        super().__init__(queries)
        self.H = TreeHistogram(T, d, params.epsilon, params.delta, noise)

    def step(self, row):
        self.H.insert(list(row))
        return self.queries.evaluate(self.H.current())


REGISTRY: dict[str, MechanismSpec] = {
    s.name: s
    for s in (
        MechanismSpec("bounded-maxsum", _Bounded, maxsum_only=True, needs_bound=True),
        MechanismSpec("doubling", _Doubling, allows_delta=False),
        MechanismSpec("two-level-maxsum", _TwoLevel, maxsum_only=True, allows_delta=False),
        MechanismSpec("kquery", _KQuery, needs_bound=True, allows_delta=False),
        MechanismSpec("kdoubling", _KDoubling, allows_delta=False),
        MechanismSpec("ktwolevel", _KTwoLevel, allows_delta=False),
        MechanismSpec("ed-kquery", _KQuery, needs_bound=True, needs_delta=True),
        MechanismSpec("ed-doubling", _KDoubling, needs_delta=True),
        MechanismSpec("ed-twolevel", _KTwoLevel, needs_delta=True),
        MechanismSpec("baseline-tree", _BaselineTree),
    )
}


def get_spec(name: str) -> MechanismSpec:
    try:
        return REGISTRY[name]
    except KeyError:
        raise ParameterError(f"unknown mechanism {name!r}; choose from {sorted(REGISTRY)}") from None


def validate(name: str, queries: QuerySet, d: int, params: PrivacyParams) -> MechanismSpec:
    spec = get_spec(name)
    queries.check_dimension(d)
    if spec.maxsum_only and [str(q) for q in queries] != ["max"]:
        raise ParameterError(f"{name} answers MaxSum only; got queries {queries}")
    if spec.needs_delta and params.delta <= 0:
        raise ParameterError(f"{name} is an (eps, delta) mechanism and needs delta > 0")
    if not spec.allows_delta and params.delta > 0:
        raise ParameterError(f"{name} is pure; use its ed- counterpart for delta > 0")
    return spec


def build(
    name: str,
    d: int,
    T: int,
    queries: QuerySet,
    params: PrivacyParams,
    noise: NoiseSource,
    c_max: float | None = None,
) -> Adapter:
    spec = validate(name, queries, d, params)
    if spec.needs_bound and c_max is None:
        raise ParameterError(f"{name} needs a bound c_max")
    return spec.build(d, T, queries, params, noise, c_max)


def segment_limit(params: PrivacyParams, d: int, c_max: float, T: int) -> float:
    return cal.segment_bound(params.epsilon, d, c_max, T, params.beta, params.delta)
