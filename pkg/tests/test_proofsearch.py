import random
from itertools import permutations
from pathlib import Path

import pytest

from envycake import proofsearch as ps
from envycake import _poset_py
from envycake.connected import structural_success, three_unknown_branches
from envycake.generate import random_profile
from envycake.poset import KERNEL
from envycake.proofsearch import (FOUR_AGENT_TEMPLATE, SymbolicState, five_agent_template, prove_4agent,
                                  search_template, simulate_branch, verify_profile)
from envycake.table import Table

GOLDEN = Path(__file__).parent / "data" / "prove4_golden.txt"


# ---------------------------------------------------------------- poset kernels

def closure_oracle(n, le, lt):
    """Path search: i<j iff some path from i to j uses a strict edge."""
    edges = [[(j, False) for j in range(n) if le[i] >> j & 1] + [(j, True) for j in range(n) if lt[i] >> j & 1]
             for i in range(n)]
    reach, strict = [0] * n, [0] * n
    for s in range(n):
        seen = {(s, False)}
        stack = [(s, False)]
        while stack:
            u, st = stack.pop()
            for v, e in edges[u]:
                nxt = (v, st or e)
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        for v, st in seen:
            reach[s] |= 1 << v
            if st:
                strict[s] |= 1 << v
        if strict[s] >> s & 1:
            return None
    return reach, strict


def random_relation(rng, n, density):
    le, lt = [0] * n, [0] * n
    for i in range(n):
        for j in range(n):
            if i != j and rng.random() < density:
                if rng.random() < 0.5:
                    lt[i] |= 1 << j
                else:
                    le[i] |= 1 << j
    return le, lt


def kernels():
    out = [_poset_py]
    if KERNEL == "compiled":
        from envycake import _poset
        out.append(_poset)
    return out


@pytest.mark.parametrize("kernel", kernels(), ids=lambda k: k.__name__.rsplit(".", 1)[-1])
def test_closure_matches_path_oracle(kernel):
    rng = random.Random(5)
    for _ in range(400):
        n = rng.randint(1, 9)
        le, lt = random_relation(rng, n, rng.choice([0.05, 0.15, 0.3]))
        assert kernel.closure(n, le, lt) == closure_oracle(n, le, lt)


@pytest.mark.parametrize("kernel", kernels(), ids=lambda k: k.__name__.rsplit(".", 1)[-1])
def test_add_edges_matches_rebuild(kernel):
    rng = random.Random(6)
    for _ in range(400):
        n = rng.randint(2, 70)
        le, lt = random_relation(rng, n, 1.5 / n)
        res = kernel.closure(n, le, lt)
        if res is None:
            continue
        reach, strict = list(res[0]), list(res[1])
        edges = []
        for _ in range(rng.randint(1, 4)):
            u, v = rng.sample(range(n), 2)
            edges.append((u, v, rng.random() < 0.5))
            (lt if edges[-1][2] else le)[u] |= 1 << v
        ok = kernel.add_edges(reach, strict, edges)
        want = closure_oracle(n, le, lt) if n <= 12 else _poset_py.closure(n, le, lt)
        if want is None:
            assert not ok
        else:
            assert ok and [reach, strict] == list(map(list, want))


def test_kernels_agree():
    if KERNEL != "compiled":
        pytest.skip("compiled kernel not built")
    from envycake import _poset
    rng = random.Random(7)
    for _ in range(300):
        n = rng.randint(1, 130)
        le, lt = random_relation(rng, n, 2.0 / n)
        assert _poset.closure(n, le, lt) == _poset_py.closure(n, le, lt)


# ---------------------------------------------------------------- symbolic model

def test_golden_four_agent_proof():
    assert prove_4agent().render() == GOLDEN.read_text()


def test_case_17_subtree():
    text = prove_4agent(only=17).render(only=17)
    assert text.startswith("CASE 17 OF 24")
    assert "4bb<4cc 3bb<3cc" in text
    assert text in GOLDEN.read_text()


def test_every_case_is_closed_by_some_branch():
    doc = prove_4agent()
    assert len(doc.cases) == 24
    for c in doc.cases:
        assert 1 <= len(c.branch_path()) <= 4


def linear_extension_options(state, agent, table, k, need_kth):
    """Top sets seen in some total order extending the agent's base order."""
    out = set()
    for perm in permutations(table):
        pos = {p: i for i, p in enumerate(perm)}   # higher index = preferred
        if any(state.less(agent, p, q, base=True) and pos[p] > pos[q] for p in table for q in table if p != q):
            continue
        ranked = perm[::-1]
        top = frozenset(ranked[:k - 1])
        out.add((top, ranked[k - 1] if need_kth else None))
    return out


def test_case_splits_are_exhaustive(monkeypatch):
    calls = []
    real = ps._options

    def spy(state, agent, table, k, need_kth):
        res = real(state, agent, table, k, need_kth)
        calls.append((state, agent, list(table), k, need_kth, res))
        return res

    monkeypatch.setattr(ps, "_options", spy)
    for order in list(permutations((1, 2, 3, 4)))[::5]:
        st = SymbolicState.initial(4, {"b": (1, 2, 3, 4), "c": order})
        for script in FOUR_AGENT_TEMPLATE:
            simulate_branch(st, script, "abcd")
    assert any(c[4] for c in calls) and any(not c[4] for c in calls)
    assert any(len(c[2]) > 4 or any(p.tag for p in c[2]) for c in calls)
    for state, agent, table, k, need_kth, res in calls:
        got = {(frozenset(top), p) for top, p in res}
        assert len(got) == len(res)
        assert got == linear_extension_options(state, agent, table, k, need_kth)


def generic_four(rng):
    """Alice's equal cut of a profile where Bob and Carl have no ties, or None."""
    ms = random_profile(rng, 4, max_segments=24, denom=10 ** 6)
    t = Table(ms, (0, 1, 2, 3))
    t.query(0, 4)
    if any(len({m.value(p) for p in t.pieces}) < 4 for m in ms[1:3]):
        return None
    return ms, t


def run_modeled(table, script):
    """Run a branch; report whether each answer stayed inside the symbolic model.

    The model trims the cutter's top pieces once each, so a run leaves it
    when a cutter prefers a leftover fragment or when Equalize carves two
    pieces out of one stick.
    """
    modeled = True
    for agent, kind, k in script.steps:
        by_id = table.by_id()
        if any(by_id[p].is_new for p in table.real_graph().edges[agent]):
            modeled = False
        before = {p.id for p in table.pieces}
        table.query(agent, k, kind)
        if any(p not in before for p in table.real_graph().edges[agent]):
            modeled = False
    return table, modeled


def test_symbolic_verdicts_agree_with_concrete_runs():
    rng = random.Random(3)
    seen_cases, modeled_checks = set(), 0
    while len(seen_cases) < 12 or modeled_checks < 40:
        got = generic_four(rng)
        if got is None:
            continue
        ms, t = got
        label = {p.id: i + 1 for i, p in enumerate(sorted(t.pieces, key=lambda p: ms[1].value(p)))}
        corder = tuple(label[p.id] for p in sorted(t.pieces, key=lambda p: ms[2].value(p)))
        seen_cases.add(corder)
        st = SymbolicState.initial(4, {"b": (1, 2, 3, 4), "c": corder})
        for i, script in enumerate(three_unknown_branches(1, 2)):
            trial, modeled = run_modeled(t.copy(), script)
            ok = structural_success(trial, 3)
            out = simulate_branch(st, FOUR_AGENT_TEMPLATE[i], "abcd")
            if not out.failing:
                # sound in every run: extra concrete outcomes only help
                assert ok
            elif modeled and len(out.failing) == len(out.leaves):
                assert not ok
                modeled_checks += 1


# ---------------------------------------------------------------- template search

def test_four_agent_template_has_no_counterexample():
    rep = search_template(4, FOUR_AGENT_TEMPLATE)
    assert rep.counterexample is None
    assert rep.checked == 24 and not rep.skipped and rep.conclusive


def test_empty_template_fails_vacuously():
    rep = search_template(5, [])
    assert rep.counterexample is not None and rep.checked == 1
    assert rep.counterexample.failures == []


def test_five_agent_template_shape():
    tpl = five_agent_template()
    assert len(tpl) == 36
    assert len({s.steps for s in tpl}) == 36
    assert all(s.steps[-1][2] == 2 for s in tpl)


def test_known_five_agent_profile_defeats_template():
    orders = {"b": (1, 2, 3, 4, 5), "c": (1, 2, 3, 4, 5), "d": (1, 3, 2, 4, 5)}
    ce = verify_profile(orders, five_agent_template())
    assert ce is not None
    assert len(ce.failures) == 36
    assert all(leaf.culprit for _, leaf in ce.failures)
    # the chosen failing leaves must be jointly consistent
    root = SymbolicState.initial(5, orders)
    merged = ps._merge(root, [ps._delta(root, leaf) for _, leaf in ce.failures])
    assert merged is not None and merged.consistent()


def test_budget_exhaustion_raises():
    orders = {"b": (1, 2, 3, 4, 5), "c": (1, 2, 3, 4, 5), "d": (1, 2, 3, 4, 5)}
    with pytest.raises(TimeoutError):
        verify_profile(orders, five_agent_template(), budget=5)
