import random
from fractions import Fraction as F

import mpmath
import pytest

from envycake import divide_4_disconnected, divide_n_disconnected, strong_reduction
from envycake.bounds import strong_rounds
from envycake.generate import random_profile


def test_disconnected_four_proportional_and_envy_free():
    rng = random.Random(6)
    for _ in range(15):
        a = divide_4_disconnected(random_profile(rng, 4))
        assert a.is_envy_free()
        assert a.min_value() >= F(1, 4)


@pytest.mark.parametrize("eps", [F(1, 10), F(1, 100)])
def test_strong_reduction_geometric_bound(eps):
    rng = random.Random(int(1 / eps))
    ms = random_profile(rng, 4)
    a = strong_reduction(ms, vip=1, epsilon=eps)
    m = a.info["M"]
    assert a.info["t_star"] == strong_rounds(4, eps, m)
    for tr in a.info["rounds"]:
        assert tr.V_t[1] >= (1 - (1 - F(4, m)) ** tr.t) / 4
    assert a.value(1) >= (1 - eps) / 4
    assert a.is_envy_free()


def test_disconnected_n_logs_inner_runs():
    a = divide_n_disconnected(random_profile(random.Random(1), 4), F(1, 10))
    assert a.info["inner_runs"] == 3 * 4
    assert a.min_value() >= F(9, 40)
    assert a.is_envy_free()


def test_epsilon_range():
    ms = random_profile(random.Random(1), 3)
    for bad in (F(0), F(1), F(3, 2)):
        with pytest.raises(ValueError):
            divide_n_disconnected(ms, bad)


def test_strong_rounds_is_the_ceiling_and_suffices():
    mpmath.mp.prec = 200
    for n in (3, 4, 5):
        for eps in (F(1, 10), F(1, 100), F(1, 3)):
            m = 2 ** (n - 2) + 1 if n > 3 else n
            t = strong_rounds(n, eps, m)
            x = mpmath.mpf(m) * mpmath.log(mpmath.mpf(eps.denominator) / eps.numerator) / n
            assert t - 1 < x <= t
            assert (1 - F(n, m)) ** t <= eps
