"""Envy-free division with one connected piece per agent.

All routines accept an optional ``cake`` (a union of intervals) so they can be
reused on remainders by the reduction algorithms; guarantees are then relative
to each agent's value of that cake.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .allocation import Allocation, make_allocation
from .errors import ContradictionError
from .measure import Cells, FULL_CAKE, ValueMeasure
from .prefgraph import MatchingError, build_graph, has_surplus, max_matching
from .queries import EQUALIZE, EQUALIZE_STAR, QueryLog
from .table import Table


@dataclass(frozen=True)
class BranchScript:
    steps: tuple[tuple[int, str, int], ...]   # (agent, query kind, k)

    def describe(self, names: Sequence[str] | None = None) -> str:
        def nm(a):
            return names[a] if names else f"agent{a}"
        parts = []
        for a, kind, k in self.steps:
            q = "Equalize*" if kind == EQUALIZE_STAR else "Equalize"
            parts.append(f"{nm(a)}:{q}({k})")
        return "; ".join(parts)


def run_script(table: Table, script: BranchScript) -> Table:
    for agent, kind, k in script.steps:
        table.query(agent, k, kind)
    return table


def _agents(measures) -> tuple[int, ...]:
    return tuple(range(len(measures)))


def _finish(table: Table, matching: dict[int, int], trace: list[str], **info) -> Allocation:
    by_id = table.by_id()
    bundles = [by_id[matching[a]].intervals for a in table.agents]
    return make_allocation(table.measures, bundles, table.cake, table.log, table.piece_count, trace, **info)


def _match(table: Table, what: str) -> dict[int, int]:
    # the reduced graph is a subgraph of the real one, so matching on the real
    # graph succeeds whenever the lemmas guarantee a reduced matching
    try:
        return table.matching(real=True)
    except MatchingError as e:
        raise ContradictionError(f"contradiction with {what}: {e}") from e


def divide_n_connected(measures: Sequence[ValueMeasure], vip: int = 0, cake: Cells = FULL_CAKE,
                       log: QueryLog | None = None) -> Allocation:
    """Exponential-piece algorithm: agent i (in turn) runs Equalize(2^(u-1)+1)."""
    n = len(measures)
    if n < 1:
        raise ValueError("need at least one agent")
    table = Table(measures, _agents(measures), cake, log or QueryLog())
    if n == 1:
        table.query(0, 1)
        return _finish(table, {0: table.pieces[0].id}, ["single agent takes the cake"])
    order = [vip] + [a for a in range(n) if a != vip]
    trace = []
    for step, u in enumerate(range(n - 1, 0, -1)):
        agent = order[step]
        k = 2 ** (u - 1) + 1
        table.query(agent, k)
        trace.append(f"agent {agent}: Equalize({k}) -> {len(table.pieces)} pieces")
    return _finish(table, _match(table, "the unknown-agent lemma"), trace, order=order)


# four-agent branch roles as (cutter, k) pairs; trial order matches the prove4 output
FOUR_AGENT_BRANCHES = (
    (("b", 2), ("c", 2)),
    (("c", 2), ("b", 2)),
    (("b", 3), ("c", 2)),
    (("c", 3), ("b", 2)),
)


def structural_success(table: Table, last: int) -> bool:
    """Each non-last agent keeps two edges in the reduced graph.

    Ties can make two agents share both of their pieces, which the reduced
    graph does not see, so the surplus condition is also checked on the real
    graph (it follows from the degree condition when there are no ties).
    """
    known = [a for a in table.agents if a != last]
    g = table.graph
    if not all(g.degree(a) >= 2 for a in known):
        return False
    return has_surplus(table.real_graph(), known)


def three_unknown_branches(b: int, c: int, kind: str = EQUALIZE) -> list[BranchScript]:
    role = {"b": b, "c": c}
    return [BranchScript(tuple((role[r], kind, k) for r, k in steps)) for steps in FOUR_AGENT_BRANCHES]


def _run_branches(table: Table, scripts: Sequence[BranchScript], last: int) -> tuple[Table, int]:
    for i, script in enumerate(scripts):
        trial = run_script(table.copy(), script)
        if structural_success(trial, last):
            return trial, i
    raise ContradictionError("contradiction with the four-agent lemma: no branch succeeds")


def efvip_round(measures: Sequence[ValueMeasure], vip: int, last: int, cake: Cells = FULL_CAKE,
                log: QueryLog | None = None, kind: str = EQUALIZE) -> tuple[Table, BranchScript]:
    """One run of the 3- or 4-agent EFVIP branch engine; returns the winning trial table.

    The VIP cuts n equal pieces; then the remaining non-last agents run the
    branch scripts until each non-last agent prefers two pieces.
    """
    n = len(measures)
    if n not in (3, 4):
        raise ValueError("the EFVIP branch engine handles 3 or 4 agents")
    if last == vip:
        raise ValueError("the VIP cannot be the last agent")
    others = [a for a in range(n) if a not in (vip, last)]
    table = Table(measures, _agents(measures), cake, log or QueryLog())
    table.query(vip, n)
    if n == 3:
        scripts = [BranchScript(((others[0], kind, 2),))]
    else:
        scripts = three_unknown_branches(others[0], others[1], kind)
    table, idx = _run_branches(table, scripts, last)
    return table, scripts[idx]


def divide_4_connected(measures: Sequence[ValueMeasure], vip: int = 0, designated_last: int | None = None,
                       cake: Cells = FULL_CAKE, log: QueryLog | None = None,
                       kind: str = EQUALIZE) -> Allocation:
    """Four agents: the VIP cuts 4 equal pieces, then one of four two-step branches."""
    if len(measures) != 4:
        raise ValueError("divide_4_connected needs exactly 4 agents")
    if designated_last is None:
        designated_last = max(a for a in range(4) if a != vip)
    b, c = [a for a in range(4) if a not in (vip, designated_last)]
    table, script = efvip_round(measures, vip, designated_last, cake, log, kind)
    idx = three_unknown_branches(b, c, kind).index(script)
    names = {vip: "Alice", b: "Bob", c: "Carl", designated_last: "Dana"}
    desc = script.describe(names)
    trace = ["Alice: Equalize(4)", f"branch {idx + 1}: {desc}"]
    return _finish(table, _match(table, "the four-agent lemma"), trace, branch=idx, branch_desc=desc,
                   roles=(vip, b, c, designated_last))


def divide_n_connected_improved(measures: Sequence[ValueMeasure], vip: int = 0, cake: Cells = FULL_CAKE,
                                log: QueryLog | None = None) -> Allocation:
    """Known agents need only 1+3*2^(u-3) pieces; the last three use the 4-agent branches."""
    n = len(measures)
    if n < 4:
        raise ValueError("the improved variant needs n >= 4")
    order = [vip] + [a for a in range(n) if a != vip]
    table = Table(measures, _agents(measures), cake, log or QueryLog())
    trace = []
    for j in range(n - 3):
        k = 1 + 3 * 2 ** (n - j - 4)
        table.query(order[j], k)
        trace.append(f"agent {order[j]}: Equalize({k}) -> {len(table.pieces)} pieces")
    b, c, last = order[-3:]
    scripts = three_unknown_branches(b, c)
    table, idx = _run_branches(table, scripts, last)
    trace.append(f"branch {idx + 1}: {scripts[idx].describe()}")
    return _finish(table, _match(table, "the improved unknown-agent lemma"), trace, branch=idx, order=order)


def three_agent_branches() -> list[BranchScript]:
    out = []
    for x in range(3):
        out.append(BranchScript(((x, EQUALIZE, 3),)))
        for y in range(3):
            if y != x:
                out.append(BranchScript(((x, EQUALIZE, 3), (y, EQUALIZE, 2))))
    return out


def divide_3_connected(measures: Sequence[ValueMeasure], cake: Cells = FULL_CAKE,
                       log: QueryLog | None = None) -> Allocation:
    """Try the nine branches in listed order; keep the first EF and proportional one."""
    if len(measures) != 3:
        raise ValueError("divide_3_connected needs exactly 3 agents")
    log = log or QueryLog()
    base = Table(measures, _agents(measures), cake, log)
    shares = [m.value(cake) / 3 for m in measures]
    for idx, script in enumerate(three_agent_branches()):
        trial = run_script(base.copy(), script)
        # every agent takes one of its best pieces, so envy-freeness is automatic
        g = build_graph(trial.pieces, measures)
        try:
            matching = max_matching(g)
        except MatchingError:
            continue
        by_id = trial.by_id()
        if all(measures[a].value(by_id[p]) >= shares[a] for a, p in matching.items()):
            bundles = [by_id[matching[a]].intervals for a in range(3)]
            desc = script.describe(["Alice", "Bob", "Carl"])
            return make_allocation(measures, bundles, cake, log, trial.piece_count,
                                   [f"branch {idx + 1}: {desc}"], branch=idx, branch_desc=desc)
    raise ContradictionError("contradiction with the three-agent lemma: no branch succeeds")
