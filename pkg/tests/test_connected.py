import random
from fractions import Fraction as F

import pytest

from envycake import (ValueMeasure, divide_3_connected, divide_4_connected, divide_n_connected,
                      divide_n_connected_improved)
from envycake.generate import random_profile


def generic(rng, n):
    return random_profile(rng, n, max_segments=2 ** n + 8, denom=10 ** 6)


def test_three_identical_uniform_agents():
    a = divide_3_connected([ValueMeasure.uniform()] * 3)
    assert a.values() == [F(1, 3)] * 3
    assert all(v == F(1, 3) for row in a.envy for v in row)


def test_three_agents_random():
    rng = random.Random(1)
    for _ in range(80):
        a = divide_3_connected(random_profile(rng, 3))
        assert a.is_envy_free() and a.is_connected()
        assert a.min_value() >= F(1, 3)


@pytest.mark.parametrize("vip", [0, 2])
def test_four_agents_random(vip):
    rng = random.Random(2 + vip)
    for _ in range(40):
        a = divide_4_connected(random_profile(rng, 4), vip=vip)
        assert a.is_envy_free() and a.is_connected()
        assert a.piece_count <= 7
        assert a.min_value() >= F(1, 7)
        assert a.value(vip) >= F(1, 4)


def test_four_agents_designated_last():
    rng = random.Random(8)
    ms = random_profile(rng, 4)
    for last in (1, 2, 3):
        a = divide_4_connected(ms, vip=0, designated_last=last)
        assert a.info["roles"][3] == last
        assert a.is_envy_free()


def test_wrong_agent_counts():
    with pytest.raises(ValueError):
        divide_3_connected([ValueMeasure.uniform()] * 4)
    with pytest.raises(ValueError):
        divide_4_connected([ValueMeasure.uniform()] * 3)
    with pytest.raises(ValueError):
        divide_n_connected_improved([ValueMeasure.uniform()] * 3)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_exponential_algorithm(n):
    rng = random.Random(n)
    for _ in range(10):
        a = divide_n_connected(generic(rng, n), vip=n - 1)
        assert a.is_envy_free() and a.is_connected()
        assert a.piece_count == 2 ** (n - 1)
        assert a.min_value() >= F(1, 2 ** (n - 1))
        if n >= 2:
            assert a.value(n - 1) >= F(1, 2 ** (n - 2) + 1)


@pytest.mark.parametrize("n", [4, 5])
def test_improved_algorithm(n):
    rng = random.Random(10 + n)
    for _ in range(10):
        a = divide_n_connected_improved(generic(rng, n))
        assert a.is_envy_free() and a.is_connected()
        assert a.value(0) >= 1 / (F(3, 4) * 2 ** (n - 1) + 1)


def test_sub_cake_guarantees_are_relative():
    rng = random.Random(4)
    ms = random_profile(rng, 4)
    cake = ((F(1, 4), F(1, 2)), (F(3, 4), F(1)))
    a = divide_4_connected(ms, cake=cake)
    assert a.is_envy_free()
    assert a.value(0) >= ms[0].value(cake) / 4


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_identical_measures_cut_no_more_than_generic(n):
    # ties leave l*-pieces on the table, so later Equalize queries may not cut
    a = divide_n_connected([ValueMeasure.uniform()] * n)
    assert a.is_envy_free()
    assert a.piece_count <= 2 ** (n - 1)
    assert a.min_value() >= F(1, 2 ** (n - 1))
