import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from histstream.noise import ParameterError
from histstream.streams import (
    GeneratorSpec,
    Stream,
    exact_prefix,
    generate,
    make_independent_neighbors,
    make_neighbors,
    read_stream,
    write_stream,
)

rows_st = st.integers(1, 4).flatmap(
    lambda d: st.lists(st.lists(st.integers(0, 1), min_size=d, max_size=d), min_size=0, max_size=20).map(
        lambda r: (d, r)
    )
)


def test_stream_validation():
    with pytest.raises(ParameterError):
        Stream(2, 3, np.zeros((4, 2)))
    with pytest.raises(ParameterError):
        Stream(2, 3, np.full((1, 2), 2))
    with pytest.raises(ParameterError):
        Stream(2, 3, np.zeros((1, 3)))
    s = Stream(2, 3, np.zeros((0, 2)))
    assert len(s) == 0 and s.max_column_sum() == 0


def test_rows_are_read_only():
    s = Stream(1, 2, [[1], [0]])
    with pytest.raises(ValueError):
        s.rows[0, 0] = 0


@given(rows_st)
def test_prefix_sums_match_exact_prefix(data):
    d, rows = data
    s = Stream(d, max(1, len(rows)), np.array(rows, dtype=np.int8).reshape(len(rows), d))
    ps = s.prefix_sums()
    for t in range(len(rows) + 1):
        assert ps[t].tolist() == exact_prefix(s, t).tolist()
    assert s.max_column_sum() == (int(ps[-1].max()) if rows else 0)


def test_exact_prefix_range():
    s = generate("bernoulli:p=0.5", 2, 5, seed=0)
    with pytest.raises(ParameterError):
        exact_prefix(s, 6)


@pytest.mark.parametrize("spec", ["bernoulli:p=0.3", "bursty:on=4,off=4,p=0.9", "zero", "hot:col=1",
                                  "bounded:c=5", "bernoulli:p=0.1/0.9"])
def test_generators_shape_and_seed(spec):
    a = generate(spec, 2, 64, seed=3)
    b = generate(spec, 2, 64, seed=3)
    assert a.rows.shape == (64, 2)
    assert np.array_equal(a.rows, b.rows)


def test_generator_specifics():
    assert generate("zero", 3, 10).max_column_sum() == 0
    hot = generate("hot:col=2", 3, 10)
    assert hot.rows[:, 2].sum() == 10 and hot.rows[:, :2].sum() == 0
    bounded = generate("bounded:c=7", 3, 50, seed=1)
    assert bounded.rows.sum(axis=0).tolist() == [7, 7, 7]
    bursty = generate("bursty:on=2,off=3,p=1.0", 1, 10)
    assert bursty.rows[:, 0].tolist() == [1, 1, 0, 0, 0, 1, 1, 0, 0, 0]


def test_generator_spec_parse_roundtrip():
    spec = GeneratorSpec.parse("bernoulli:p=0.25")
    assert spec.get("p") == 0.25
    assert GeneratorSpec.parse(str(spec)) == spec
    with pytest.raises(ParameterError):
        GeneratorSpec.parse("nonsense")
    with pytest.raises(ParameterError):
        generate("hot:col=5", 2, 4)


def test_neighbors():
    s = generate("zero", 2, 4)
    n = make_neighbors(s, 2, [1, 1])
    assert np.abs(n.rows.astype(int) - s.rows).sum(axis=1).tolist() == [0, 2, 0, 0]
    ind = make_independent_neighbors(s, [1, 3])
    assert ind.rows[0].tolist() == [1, 0] and ind.rows[2].tolist() == [0, 1]
    with pytest.raises(ParameterError):
        make_neighbors(s, 5, [0, 0])
    with pytest.raises(ParameterError):
        make_independent_neighbors(s, [1])


def test_file_roundtrip(tmp_path):
    s = generate("bernoulli:p=0.5", 3, 20, seed=2)
    p = tmp_path / "s.txt"
    write_stream(s, p)
    r = read_stream(p)
    assert (r.d, r.T) == (3, 20) and np.array_equal(r.rows, s.rows)
    p.write_text("d=1 T=1\n1\n0\n")
    with pytest.raises(ParameterError):
        read_stream(p)
