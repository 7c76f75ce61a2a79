import random
from fractions import Fraction as F

import pytest

from envycake.generate import random_measure
from envycake.measure import FULL_CAKE, Piece, ValueMeasure
from envycake.queries import QueryLog, equalize, equalize_star, stick_division
from envycake.table import Table


def brute_stick_division(lengths, k):
    """Largest l over every candidate lengths[j]/i that still yields k pieces."""
    best = F(0)
    for x in lengths:
        for i in range(1, k + 1):
            l = F(x) / i
            if l > 0 and sum(y // l for y in lengths) >= k:
                best = max(best, l)
    return best


def test_stick_division_matches_brute_force():
    rng = random.Random(11)
    for _ in range(300):
        lengths = [F(rng.randint(0, 40), rng.randint(1, 12)) for _ in range(rng.randint(1, 7))]
        if not any(lengths):
            lengths[0] = F(1)
        k = rng.randint(1, 9)
        assert stick_division(lengths, k) == brute_stick_division(lengths, k)


def test_stick_division_simple():
    assert stick_division([F(1), F(1, 2)], 3) == F(1, 2)
    assert stick_division([F(3)], 2) == F(3, 2)


@pytest.mark.parametrize("lengths,k", [([], 1), ([F(1)], 0), ([F(-1)], 1), ([F(0)], 1)])
def test_stick_division_rejects(lengths, k):
    with pytest.raises(ValueError):
        stick_division(lengths, k)


def _table(measures):
    return Table(measures, tuple(range(len(measures))), FULL_CAKE, QueryLog())


def test_equalize_makes_k_equal_best_pieces():
    rng = random.Random(3)
    for _ in range(100):
        ms = [random_measure(rng) for _ in range(2)]
        t = _table(ms)
        t.query(0, 3)
        t.query(1, 2)
        vals = sorted((ms[1].value(p) for p in t.pieces), reverse=True)
        assert vals[0] == vals[1]


def test_equalize_counts_queries():
    log = QueryLog()
    m = ValueMeasure.uniform()
    plan = equalize(0, m, [Piece(((F(0), F(1)),), id=0)], 4, log)
    assert plan.l_star == F(1, 4)
    assert plan.cut_count == 3
    assert log.of(0, "equalize") == 1 and log.of(0, "mark") == 3


def test_equalize_star_trims_to_kth():
    m = ValueMeasure.uniform()
    pieces = [Piece(((F(0), F(1, 2)),), id=1), Piece(((F(1, 2), F(3, 4)),), id=2),
              Piece(((F(3, 4), F(1)),), id=3)]
    plan = equalize_star(0, m, pieces, 2)
    assert plan.l_star == F(1, 4)
    assert dict(plan.marks) == {1: (F(1, 4),)}
    with pytest.raises(ValueError):
        equalize_star(0, m, pieces, 4)


def test_equalize_on_worthless_table_is_noop():
    m = ValueMeasure((F(0), F(1, 2), F(1)), (F(0), F(2)))
    plan = equalize(0, m, [Piece(((F(0), F(1, 2)),), id=0)], 3)
    assert plan.marks == ()
