import numpy as np
import pytest

from gmfilter.rng import RngStream


def test_same_seed_same_sequence():
    a = RngStream(123456789)
    b = RngStream(123456789)
    assert np.array_equal(a.standard_normal(10), b.standard_normal(10))
    assert a.uniform() == b.uniform()


def test_different_seeds_differ():
    a = RngStream(1).standard_normal(8)
    b = RngStream(2).standard_normal(8)
    assert not np.array_equal(a, b)


def test_substream_does_not_disturb_parent():
    plain = RngStream(77)
    expected = plain.standard_normal(6)

    forked = RngStream(77)
    child = forked.substream(0)
    child.standard_normal(1000)  # consuming the child must not move the parent
    assert np.array_equal(forked.standard_normal(6), expected)


def test_substreams_are_distinct():
    root = RngStream(5150)
    a = root.substream(0).standard_normal(8)
    b = root.substream(1).standard_normal(8)
    c = root.substream(0).standard_normal(8)
    assert not np.array_equal(a, b)
    assert np.array_equal(a, c)


def test_substream_path_depth():
    shallow = RngStream(9).substream(1).standard_normal(4)
    deep = RngStream(9).substream(1, 2).standard_normal(4)
    direct = RngStream(9, path=(1, 2)).standard_normal(4)
    assert not np.array_equal(shallow, deep)
    assert np.array_equal(deep, direct)


def test_string_ids_deterministic():
    a = RngStream(42).substream("scenario").standard_normal(5)
    b = RngStream(42).substream("scenario").standard_normal(5)
    c = RngStream(42).substream("filter").standard_normal(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_string_id_equals_constructor_path():
    via_sub = RngStream(42).substream("filter", "gmf").standard_normal(5)
    via_ctor = RngStream(42, path=("filter", "gmf")).standard_normal(5)
    assert np.array_equal(via_sub, via_ctor)


def test_mixed_int_and_string_ids():
    s = RngStream(3).substream("run", 17)
    assert s.standard_normal(3).shape == (3,)


def test_negative_id_rejected():
    with pytest.raises(ValueError):
        RngStream(1).substream(-3)


@pytest.mark.parametrize("seed", [-1, 2**64])
def test_out_of_range_seed_rejected(seed):
    with pytest.raises(ValueError):
        RngStream(seed)


def test_generator_property():
    assert isinstance(RngStream(0).generator, np.random.Generator)
