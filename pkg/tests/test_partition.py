import pytest

from histstream.histogram import CumulativeLaplaceHistogram, TreeHistogram
from histstream.noise import NoiseSource, ParameterError
from histstream.partition import MetaMechanism, ThresholdSchedule


def _hot(T):
    return [[1, 0]] * T


def test_schedules():
    add = ThresholdSchedule.additive(3.0, base=10.0)
    assert [add.threshold(j) for j in (1, 2, 3)] == [13.0, 16.0, 19.0]
    dbl = ThresholdSchedule.doubling()
    assert [dbl.threshold(j) for j in (1, 2, 3, 4)] == [1.0, 2.0, 4.0, 8.0]
    with pytest.raises(ParameterError):
        ThresholdSchedule("linear")


def test_additive_closes_without_noise():
    noise = NoiseSource.disabled()
    H = TreeHistogram(10, 2, 1.0, 0.0, noise)
    m = MetaMechanism(2, 12, 1.0, max, H, 10, ThresholdSchedule.additive(2.0), noise)
    for row in _hot(12):
        m.step(row)
    # closes once max exceeds 2, 4, 6, ...
    assert m.trace.closes == [3, 5, 7, 9, 11]
    assert m.trace.thresholds == [2.0, 4.0, 6.0, 8.0, 10.0]
    assert m.trace.stored[-1] == [11.0, 0.0]


def test_cap_is_absolute():
    noise = NoiseSource.disabled()
    H = TreeHistogram(2, 1, 1.0, 0.0, noise)
    m = MetaMechanism(1, 20, 1.0, max, H, 2, ThresholdSchedule.additive(1.0), noise)
    for _ in range(20):
        m.step([1])
    assert m.n_closes == 2
    with pytest.raises(ParameterError):
        m.step([1])


def test_doubling_closes_without_noise():
    noise = NoiseSource.disabled()
    H = CumulativeLaplaceHistogram(1, 1.0, noise)
    m = MetaMechanism(1, 40, 1.0, max, H, 5, ThresholdSchedule.doubling(), noise)
    for _ in range(40):
        m.step([1])
    assert m.trace.closes == [2, 3, 5, 9, 17]


def test_initial_offset_added():
    noise = NoiseSource.disabled()
    H = TreeHistogram(4, 2, 1.0, 0.0, noise)
    m = MetaMechanism(2, 8, 1.0, max, H, 4, ThresholdSchedule.additive(2.0, base=5.0), noise,
                      initial=[5.0, 1.0])
    outs = [m.step([0, 1]) for _ in range(8)]
    closes = [o.t for o in outs if o is not None]
    assert closes == [7]  # column 1 reaches 8 > 7
    assert m.trace.stored == [[5.0, 8.0]]
    assert m.s == [5.0, 9.0]


def test_draw_order_threshold_then_steps():
    # tau at start; mu every step; on a close: histogram nodes, then tau
    log = NoiseSource(0, keep_log=True)
    H = CumulativeLaplaceHistogram(1, 1.0, log)
    m = MetaMechanism(1, 5, 1.0, max, H, 3, ThresholdSchedule.doubling(), log)
    assert len(log.log) == 1
    for _ in range(5):
        before = len(log.log)
        ev = m.step([1])
        assert len(log.log) - before == (3 if ev else 1)


def test_recorded_noise_drives_decisions():
    # tau=0, then mu = +5 forces a close at t=1 despite s = 0
    src = NoiseSource.replay([0.0, 5.0, 0.0, 0.0, -100.0])
    H = CumulativeLaplaceHistogram(1, 1.0, src)
    m = MetaMechanism(1, 3, 1.0, max, H, 3, ThresholdSchedule.doubling(), src)
    assert m.step([0]) is not None
    assert m.step([0]) is None
    assert m.K == 2.0
