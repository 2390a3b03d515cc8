import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from histstream import calibration as cal
from histstream.histogram import TreeHistogram
from histstream.kquery import KDoublingMechanism, KQueryMechanism, KTwoLevelMechanism
from histstream.maxsum import BoundedMaxSum, DoublingMechanism
from histstream.noise import NoiseSource, ParameterError, PrivacyParams
from histstream.queries import QuerySet
from histstream.streams import generate

P = PrivacyParams(1.0)
PD = PrivacyParams(1.0, 1e-6)


def reference_kquery(rows, d, qs, cap, eps, noise, C, K):
    """Straight-line transcription of the bounded k-query loop."""
    k = len(qs)
    H = TreeHistogram(int(k * cap), d, eps / 3, 0.0, noise)
    Kq = [g + K for g in qs.evaluate([0.0] * d)]
    tau = noise.laplace(6 / eps)
    s, c, j, out, outs, closes = [0.0] * d, [0] * d, 1, qs.evaluate([0.0] * d), [], []
    for t, x in enumerate(rows, start=1):
        c = [a + b for a, b in zip(c, x)]
        s = [a + b for a, b in zip(s, x)]
        mu = noise.laplace(12 / eps)
        g = qs.evaluate(s)
        if any(g[i] + mu > Kq[i] + tau for i in range(k)) and j <= k * cap:
            closes.append(t)
            j += 1
            H.insert(c)
            c = [0] * d
            for i in range(k):
                if g[i] + noise.laplace(3 * k / eps) > Kq[i] - C:
                    Kq[i] += K
            tau = noise.laplace(6 / eps)
            s = H.current()
            out = qs.evaluate(s)
        outs.append(out)
    return outs, closes


@pytest.mark.parametrize("seed", range(5))
def test_matches_reference(seed):
    qs = QuerySet.parse("max,min,quantile:0.5")
    s = generate("bernoulli:p=0.7", 3, 120, seed=seed)
    rows = s.rows.tolist()
    C, K = 2.0, 6.0
    m = KQueryMechanism(3, 120, qs, 40, P, NoiseSource(seed), C=C, K=K)
    outs = [m.step(r) for r in rows]
    ref_outs, ref_closes = reference_kquery(rows, 3, qs, 40, 1.0, NoiseSource(seed), C, K)
    assert m.trace.closes == ref_closes
    assert outs == ref_outs
    assert ref_closes  # the configuration actually closes


def test_default_constants():
    qs = QuerySet.parse("max,min,count:0")
    m = KQueryMechanism(2, 1024, qs, 50, P, NoiseSource(0))
    assert m.C == pytest.approx(603.4475649505118, rel=1e-12)  # frozen independent value
    assert m.Kstep == pytest.approx(3 * (m.C + m.err))
    assert m.max_closes == 150
    ed = KQueryMechanism(2, 1024, qs, 50, PD, NoiseSource(0))
    assert ed.C == pytest.approx(cal.alpha_sv(1, 3, 50, 1024, 1 / 3) + cal.alpha_u(1, 3, 50, 1 / 3, 1e-6))
    assert ed.update_sigma == pytest.approx(29.272811030554358, rel=1e-12)
    assert ed.H.delta == pytest.approx(1e-6 / (2 * math.exp(2 / 3)))


def test_noise_off_reduces_to_bounded_maxsum():
    s = generate("bernoulli:p=0.5", 2, 300, seed=2)
    a = KQueryMechanism(2, 300, QuerySet.parse("max"), 300, P, NoiseSource.disabled(), C=1.0, K=7.0)
    b = BoundedMaxSum(2, 300, 300, P, NoiseSource.disabled(), K=7.0)
    out_a = [a.step(r)[0] for r in s.rows.tolist()]
    out_b = [b.step(r) for r in s.rows.tolist()]
    assert out_a == out_b
    assert a.trace.closes == b.trace.closes


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(["max", "max,min", "quantile:0.5,topkval:2,count:1"]),
       st.floats(1.0, 5.0))
def test_close_cap_absolute(seed, queries, K):
    qs = QuerySet.parse(queries)
    s = generate("bernoulli:p=0.8", 3, 80, seed=seed)
    m = KQueryMechanism(3, 80, qs, 3, P, NoiseSource(seed), C=0.0, K=K)
    for r in s.rows.tolist():
        m.step(r)
    assert m.n_closes <= len(qs) * 3


def test_modified_variant_offsets():
    qs = QuerySet.parse("max,min")
    m = KQueryMechanism(2, 20, qs, 10, P, NoiseSource.disabled(), s0=[4.0, 2.0], alpha_gamma=1.0, C=0.0, K=3.0)
    assert m.out == [4.0, 2.0]
    assert m.thresholds == [7.0, 5.0]
    for _ in range(4):
        m.step([1, 1])
    assert m.trace.closes == [4]  # max 8 > 7 and min 6 > 5
    assert m.trace.raised == [(0, 1)]
    assert m.out == [8.0, 6.0]
    K_default = KQueryMechanism(2, 1024, qs, 10.5, P, NoiseSource(0), s0=[0.0, 0.0], alpha_gamma=9.0)
    assert K_default.Kstep == pytest.approx(3 * (K_default.C + K_default.err + 9.0))


def test_ed_modified_constant():
    qs = QuerySet.parse("max")
    m = KQueryMechanism(2, 1024, qs, 20, PD, NoiseSource(0), s0=[0.0, 0.0])
    assert m.C == pytest.approx(cal.ed_modified_C(1.0, 1, 20, 1024, 1 / 3, 1e-6))


def test_rejects_bad_inputs():
    with pytest.raises(ParameterError):
        KQueryMechanism(2, 10, QuerySet.parse("max"), 0, P, NoiseSource(0))
    with pytest.raises(ParameterError):
        KQueryMechanism(2, 10, QuerySet.parse("topkval:3"), 5, P, NoiseSource(0))
    m = KQueryMechanism(1, 1, QuerySet.parse("max"), 1, P, NoiseSource(0))
    m.step([1])
    with pytest.raises(ParameterError):
        m.step([1])


def _recorded(n, seed):
    return np.random.default_rng(seed).laplace(0, 3, n).tolist()


@pytest.mark.parametrize("seed", range(5))
def test_k1_doubling_matches_doubling(seed):
    s = generate("bernoulli:p=0.5", 2, 128, seed=seed)
    tape = _recorded(2000, seed)
    a = KDoublingMechanism(2, 128, QuerySet.parse("max"), P, NoiseSource.replay(tape))
    b = DoublingMechanism(2, 128, P, NoiseSource.replay(tape))
    for r in s.rows.tolist():
        a.step(r)
        b.step(r)
    assert a.trace.closes == b.trace.closes


def test_two_level_k_queries():
    qs = QuerySet.parse("max,min")
    s = generate("hot:col=0", 2, 256)
    m = KTwoLevelMechanism(2, 256, qs, P, NoiseSource.disabled())
    outs = [m.step(r) for r in s.rows.tolist()]
    for t in m.trace.closes:
        assert outs[t - 1] == [float(t), 0.0]
    live = KTwoLevelMechanism(2, 256, qs, PD, NoiseSource(1))
    for r in s.rows.tolist():
        assert len(live.step(r)) == 2


def test_only_near_threshold_queries_raised():
    qs = QuerySet.parse("max,min")
    m = KQueryMechanism(2, 20, qs, 10, P, NoiseSource.disabled(), s0=[4.0, 0.0], C=1.0, K=3.0)
    for _ in range(4):
        m.step([1, 0])
    assert m.trace.closes == [4]
    assert m.trace.raised == [(0,)]
    assert m.thresholds == [10.0, 3.0]
