import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from envycake.generate import random_measure
from envycake.measure import (ValueMeasure, difference, normalize_cells, split_at, split_at_mark,
                              union)


def test_uniform_values():
    m = ValueMeasure.uniform()
    assert m.value(((F(1, 4), F(3, 4)),)) == F(1, 2)
    assert m.mark(((F(0), F(1)),), F(1, 3)) == F(1, 3)


def test_piecewise_eval_and_mark():
    m = ValueMeasure.from_values([0, F(1, 2), 1], [F(1, 4), F(3, 4)])
    assert m.densities == (F(1, 2), F(3, 2))
    assert m.cdf(F(1, 2)) == F(1, 4)
    assert m.mark(((F(0), F(1)),), F(1, 2)) == F(1, 2) + F(1, 6)


def test_mark_skips_gaps_between_cells():
    m = ValueMeasure.uniform()
    piece = ((F(0), F(1, 4)), (F(1, 2), F(3, 4)))
    assert m.mark(piece, F(3, 8)) == F(5, 8)


def test_mark_zero_density_prefix_is_leftmost():
    m = ValueMeasure((F(0), F(1, 2), F(1)), (F(0), F(2)))
    assert m.mark(((F(0), F(1)),), F(0)) == 0
    assert m.mark(((F(0), F(1)),), F(1, 2)) == F(3, 4)


@pytest.mark.parametrize("bps,dens", [
    ((0, F(1, 2)), (1,)),             # does not reach 1
    ((0, F(1, 2), F(1, 2), 1), (1, 1, 1)),
    ((0, 1), (-1,)),
    ((0, F(1, 2), 1), (1,)),
])
def test_rejects_bad_measures(bps, dens):
    with pytest.raises(ValueError):
        ValueMeasure(tuple(F(b) for b in bps), tuple(F(d) for d in dens))


def test_floats_rejected():
    with pytest.raises(TypeError):
        ValueMeasure((0, 0.5, 1), (1, 1))


def test_normalize_cells_merges_and_drops():
    assert normalize_cells([(F(1, 2), F(1)), (F(0), F(1, 2)), (F(1, 3), F(1, 3))]) == ((F(0), F(1)),)


def test_difference_and_union_partition():
    a = ((F(0), F(1)),)
    b = ((F(1, 5), F(2, 5)), (F(3, 5), F(4, 5)))
    rest = difference(a, b)
    assert union(rest, b) == a
    assert difference(rest, b) == rest


fractions = st.fractions(min_value=0, max_value=1, max_denominator=50)


@settings(max_examples=150, deadline=None)
@given(seed=st.integers(0, 10 ** 6), cut=fractions)
def test_value_is_additive_under_splits(seed, cut):
    m = random_measure(random.Random(seed))
    piece = ((F(0), F(1, 3)), (F(1, 2), F(1)))
    left, right = split_at(piece, cut)
    assert m.value(left) + m.value(right) == m.value(piece)


@settings(max_examples=150, deadline=None)
@given(seed=st.integers(0, 10 ** 6), frac=fractions)
def test_mark_prefix_is_exact(seed, frac):
    m = random_measure(random.Random(seed))
    piece = ((F(1, 10), F(2, 5)), (F(3, 5), F(9, 10)))
    target = m.value(piece) * frac
    prefix, suffix = split_at_mark(m, piece, target)
    assert m.value(prefix) == target
    assert m.value(suffix) == m.value(piece) - target


def test_generated_measures_are_normalized():
    rng = random.Random(7)
    for _ in range(50):
        assert random_measure(rng).total == 1
