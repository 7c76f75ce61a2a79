import random
from fractions import Fraction as F

import pytest

from envycake import ValueMeasure, divide_entire
from envycake.entirecake import (DominationGraph, EntireState, find_separation, find_sequence,
                                 k_dominates, solvable, MAX_ROUNDS)
from envycake.errors import InputError
from envycake.generate import random_profile


def _uniform_state(own0, rem):
    # bundles [0, own0), [3/8, 5/8), [5/8, 3/4) under identical uniform tastes
    st = EntireState([ValueMeasure.uniform()] * 3)
    st.extra[0] = [((F(0), own0),)]
    st.extra[1] = [((F(3, 8), F(5, 8)),)]
    st.extra[2] = [((F(5, 8), F(3, 4)),)]
    st.remainder = rem
    return st


def test_k_domination_boundary_is_inclusive():
    st = _uniform_state(F(3, 8), ((F(3, 4), F(1)),))       # gap 1/8, remainder 1/4
    assert k_dominates(st, 0, 1, 2)
    assert not k_dominates(st, 0, 1, 1)
    g = st.graph()
    assert g.kdom[(0, 1)] == 2
    assert (0, 1) not in g.full


def test_k_domination_just_below_boundary():
    st = _uniform_state(F(3, 8) - F(1, 10 ** 9), ((F(3, 4), F(1)),))
    assert not k_dominates(st, 0, 1, 2)


def test_full_domination_when_gap_covers_remainder():
    st = _uniform_state(F(3, 8), ((F(7, 8), F(1)),))       # gap 1/8, remainder 1/8
    assert st.graph().dominates(0, 1)
    assert st.graph().kdom[(0, 1)] == 1


def _graph(n, full):
    return DominationGraph(n, frozenset(full), {e: 1 for e in full})


def test_separation_and_sequence_finders():
    g = _graph(3, {(1, 0), (2, 0)})
    assert find_separation(g) == (0,)
    assert solvable(g).kind == "separation"
    chain = _graph(3, {(0, 2)})
    assert find_separation(chain) is None
    assert find_sequence(chain) == (0, 2)
    assert solvable(chain).kind == "sequence"
    assert solvable(_graph(3, set())) is None


def test_sequence_preferred_when_asked():
    g = _graph(3, {(0, 2), (1, 2), (0, 1)})
    assert solvable(g).kind == "separation"
    assert solvable(g, prefer="sequence").kind == "sequence"


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_entire_division_random(n):
    rng = random.Random(40 + n)
    for _ in range(12 if n == 4 else 20):
        ms = random_profile(rng, n)
        a = divide_entire(ms)
        assert a.is_envy_free()
        assert all(m.value(a.remainder) == 0 for m in ms)
        assert sum(m.value(b) for m in ms[:1] for b in a.bundles) == 1
        assert a.info["rounds"] <= MAX_ROUNDS.get(n, 0)


def test_three_agents_end_like_trim_choose_divide():
    ms = random_profile(random.Random(12), 3)
    a = divide_entire(ms)
    text = "\n".join(a.trace)
    assert "Equalize*(2)" in a.trace[0]
    assert "sequence: chain" in text and "pick order" in text


def test_domination_edges_persist():
    rng = random.Random(77)
    for _ in range(10):
        ms = random_profile(rng, 4)
        st = EntireState(ms)
        from envycake.entirecake import run_efvip_star
        for r in range(4):
            if not st.remainder or st.rem_value(r % 3) == 0:
                break
            run_efvip_star(st, r % 3)
        for before, after in zip(st.history, st.history[1:]):
            assert before <= after


def test_more_than_four_agents_rejected():
    with pytest.raises(InputError):
        divide_entire([ValueMeasure.uniform()] * 5)
