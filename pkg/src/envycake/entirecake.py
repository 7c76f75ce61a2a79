"""Envy-free division of the entire cake for up to four agents.

The division runs EFVIP rounds with Equalize* (trimmings stay in the
remainder) until the domination graph becomes solvable, then hands the
remainder out according to the plan: a smaller sub-division when one group
dominates the other, or a cut-and-pick-in-order step when the agents form a
domination chain.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, permutations
from typing import Sequence

from .allocation import Allocation, make_allocation
from .bounds import promotion_rounds
from .connected import efvip_round
from .errors import ContradictionError, InputError
from .measure import Cells, FULL_CAKE, Piece, ValueMeasure, difference, union
from .prefgraph import MatchingError, build_graph, max_matching
from .queries import EQUALIZE_STAR, QueryLog
from .table import Table

ZERO = Fraction(0)


@dataclass(frozen=True)
class CompetitionRecord:
    blocker: int
    competitor: int
    delta_v: Fraction
    round_id: int
    best_piece: int      # the significant piece, the blocker's unique favourite
    second_piece: int

    def __post_init__(self):
        if self.delta_v < 0:
            raise ValueError("delta_v must be nonnegative")


@dataclass
class RoundRecord:
    """One EFVIP* run. ``matching`` may later be switched to ``alternative``."""

    index: int
    vip: int
    last: int
    script: str
    pieces: dict[int, Piece]
    matching: dict[int, int]
    trims: tuple[int, ...]                  # ids of trimmed pieces
    remainder: Cells                        # trimmings left after this round
    alternative: dict[int, int] | None = None
    switched: bool = False

    def piece_of(self, agent: int) -> Cells:
        return self.pieces[self.matching[agent]].intervals


@dataclass(frozen=True)
class DominationGraph:
    n: int
    full: frozenset[tuple[int, int]]
    kdom: dict[tuple[int, int], int]        # (a, b) -> smallest k < n with a k-dominating b

    def edges(self) -> frozenset[tuple[int, int]]:
        return self.full | frozenset(self.kdom)

    def out(self, a: int, full_only: bool = True) -> list[int]:
        src = self.full if full_only else self.edges()
        return sorted(b for x, b in src if x == a)

    def dominates(self, a: int, b: int) -> bool:
        return (a, b) in self.full

    def dump(self) -> str:
        parts = [f"{a}=>{b}" for a, b in sorted(self.full)]
        parts += [f"{a}-{k}->{b}" for (a, b), k in sorted(self.kdom.items()) if (a, b) not in self.full]
        return " ".join(parts) or "(none)"


@dataclass(frozen=True)
class SolutionPlan:
    kind: str                               # "separation" or "sequence"
    group: tuple[int, ...]                  # dominated group, or the chain A_2..A_n
    via: str = "direct"

    def describe(self) -> str:
        if self.kind == "separation":
            return f"separation: group {list(self.group)} shares the remainder"
        return f"sequence: chain {list(self.group)}"


@dataclass
class EntireState:
    measures: Sequence[ValueMeasure]
    cake: Cells = FULL_CAKE
    log: QueryLog = field(default_factory=QueryLog)
    rounds: list[RoundRecord] = field(default_factory=list)
    extra: dict[int, list[Cells]] = field(default_factory=dict)
    remainder: Cells | None = None
    events: list[str] = field(default_factory=list)
    records: list[CompetitionRecord] = field(default_factory=list)
    history: list[frozenset] = field(default_factory=list)

    def __post_init__(self):
        if self.remainder is None:
            self.remainder = self.cake

    @property
    def n(self) -> int:
        return len(self.measures)

    def bundles(self) -> list[Cells]:
        out = []
        for a in range(self.n):
            parts = [r.piece_of(a) for r in self.rounds] + self.extra.get(a, [])
            out.append(union(*parts))
        return out

    def gap(self, a: int, b: int) -> Fraction:
        m = self.measures[a]
        bs = self.bundles()
        return m.value(bs[a]) - m.value(bs[b])

    def rem_value(self, a: int) -> Fraction:
        return self.measures[a].value(self.remainder)

    def graph(self) -> DominationGraph:
        n, bs = self.n, self.bundles()
        full, kdom = set(), {}
        for a in range(n):
            m = self.measures[a]
            own, rem = m.value(bs[a]), m.value(self.remainder)
            for b in range(n):
                if a == b:
                    continue
                g = own - m.value(bs[b])
                if g >= rem:
                    full.add((a, b))
                for k in range(1, n):
                    if k * g >= rem:
                        kdom[(a, b)] = k
                        break
        return DominationGraph(n, frozenset(full), kdom)

    def note(self, line: str) -> None:
        self.events.append(line)


def k_dominates(state: EntireState, a: int, b: int, k: int) -> bool:
    """V_a(X_a) - V_a(X_b) >= V_a(remainder) / k, exactly."""
    return k * state.gap(a, b) >= state.rem_value(a)


# ---------------------------------------------------------------- solvability

def _dominates(g: DominationGraph, a: int, b: int) -> bool:
    return g.dominates(a, b)


def find_separation(g: DominationGraph) -> tuple[int, ...] | None:
    agents = range(g.n)
    for size in range(1, g.n):
        for group1 in combinations(agents, size):
            group2 = [a for a in agents if a not in group1]
            if all(_dominates(g, a, b) for a in group2 for b in group1):
                return group1
    return None


def find_sequence(g: DominationGraph) -> tuple[int, ...] | None:
    for seq in permutations(range(g.n), g.n - 1):
        if all(_dominates(g, seq[i], seq[j]) for i in range(len(seq)) for j in range(i + 1, len(seq))):
            return seq
    return None


def resolve_many_dominators(g: DominationGraph) -> SolutionPlan | None:
    """Constructive case analysis when n-1 agents each dominate n-2 others."""
    n = g.n
    strong = [a for a in range(n) if len(g.out(a)) >= n - 2]
    if len(strong) < n - 1:
        return None
    for outsider in range(n):
        rest = [a for a in range(n) if a != outsider]
        if not all(a in strong for a in rest):
            continue
        dominated = [outsider]     # agents that everyone still in ``rest`` must dominate
        chain: list[int] = []
        while True:
            if not rest:
                break
            if all(_dominates(g, a, b) for a in rest for b in dominated):
                return SolutionPlan("separation", tuple(sorted(dominated)), via="many-dominators")
            pick = next(a for a in rest if not all(_dominates(g, a, b) for b in dominated))
            # pick misses someone in ``dominated``, so it dominates every other agent in ``rest``
            chain.append(pick)
            rest.remove(pick)
            dominated.append(pick)
        if len(chain) == n - 1:
            return SolutionPlan("sequence", tuple(chain), via="many-dominators")
    return None


def solvable(g: DominationGraph, prefer: str = "separation") -> SolutionPlan | None:
    """A plan for dividing the remainder without new envy, or None."""
    finders = [("separation", find_separation), ("sequence", find_sequence)]
    if prefer == "sequence":
        finders.reverse()
    for kind, find in finders:
        found = find(g)
        if found is not None:
            return SolutionPlan(kind, found)
    return resolve_many_dominators(g)


# ---------------------------------------------------------------- rounds

def _sub_measures(measures, agents):
    return [measures[a] for a in agents]


def _round_pieces(table: Table) -> tuple[dict[int, Piece], tuple[int, ...]]:
    pieces = table.by_id()
    cutter0 = table.history[0][0]
    trims = tuple(sorted(p.id for p in table.pieces if p.last_cutter is not None and p.last_cutter != cutter0))
    return pieces, trims


def _best(m: ValueMeasure, pieces: dict[int, Piece], among) -> list[int]:
    vals = {pid: m.value(pieces[pid]) for pid in among}
    top = max(vals.values())
    return sorted(pid for pid, v in vals.items() if v == top)


def _matching_with(table: Table, forced: dict[int, int]) -> dict[int, int] | None:
    g = table.real_graph()
    g = g.with_edges({a: ([forced[a]] if a in forced else g.edges[a]) for a in g.agents})
    try:
        return max_matching(g)
    except MatchingError:
        return None


def run_efvip_star(state: EntireState, vip: int, designated_last: int | None = None):
    """One EFVIP round with Equalize* on the remainder.

    Returns ``(record, significant piece id or None, new k-domination edges)``.
    When ``designated_last`` is given it picks its favourite piece first,
    avoiding the significant piece when it is indifferent.
    """
    n = state.n
    if designated_last is None:
        designated_last = max(a for a in range(n) if a != vip)
    before = state.graph().edges()
    table, script = efvip_round(state.measures, vip, designated_last, state.remainder, state.log, EQUALIZE_STAR)
    pieces, trims = _round_pieces(table)
    m_vip = state.measures[vip]
    sig = None
    alternative = None
    comp = None
    last = designated_last
    if trims:
        lowest = min(m_vip.value(pieces[p]) for p in trims)
        candidates = [p for p in trims if m_vip.value(pieces[p]) == lowest]
        favs = _best(state.measures[last], pieces, pieces)
        plain = [p for p in favs if p not in candidates]
        choice = plain[0] if plain else favs[0]
        matching = _matching_with(table, {last: choice})
        if matching is None:
            raise ContradictionError("contradiction with the unknown-agent lemma: last agent's choice blocks")
        others = [p for p in candidates if p != choice]
        if others:
            sig = others[0]
        else:
            sig = choice
            m_last = state.measures[last]
            rest = [p for p in pieces if p != sig]
            for second in _best(m_last, pieces, rest):
                alternative = _matching_with(table, {last: second})
                if alternative is not None:
                    break
            if alternative is None:
                raise ContradictionError("contradiction: no matching gives the blocker its second piece")
            taker = next(a for a, p in alternative.items() if p == sig)
            delta = m_last.value(pieces[sig]) - m_last.value(pieces[second])
            if delta == 0:
                # the blocker is indifferent, so this is the easy case after all
                matching, alternative = alternative, None
            else:
                comp = CompetitionRecord(last, taker, delta, len(state.rounds), sig, second)
    else:
        matching = _matching_with(table, {})
        if matching is None:
            raise ContradictionError("contradiction with the unknown-agent lemma")
    remainder = union(*table.reserve)
    rec = RoundRecord(len(state.rounds), vip, last, script.describe(), pieces, matching, trims,
                      remainder, alternative)
    state.rounds.append(rec)
    state.remainder = remainder
    takers = " ".join(f"{a}:{matching[a]}" for a in sorted(matching))
    new = sorted(state.graph().edges() - before)
    state.note(f"round {rec.index}: vip={vip} last={last} query=[{script.describe()}] "
               f"trims={len(trims)} takers=[{takers}] significant={sig} new_edges={new}")
    state.history.append(state.graph().full)
    return rec, sig, new, comp


def promote_k_domination(state: EntireState, a: int, b: int, k: int, check=None) -> EntireState:
    """Run rounds with ``a`` as VIP until it fully dominates ``b``."""
    limit = promotion_rounds(state.n, k)
    done = 0
    while not state.graph().dominates(a, b):
        if check and check():
            return state
        if done >= limit:
            raise ContradictionError(f"contradiction with the promotion bound ({limit} rounds)")
        if not state.remainder or state.rem_value(a) == 0:
            break
        run_efvip_star(state, a)
        done += 1
    return state


def acquire_two_edges(state: EntireState, vip: int, check=None) -> EntireState:
    """Make ``vip`` k-dominate two agents, switching a hard-case round if needed."""
    n = state.n
    rounds = 0
    pending: dict[int, CompetitionRecord] = {}
    while len(state.graph().out(vip, full_only=False)) < 2:
        if check and check():
            return state
        if not state.remainder or state.rem_value(vip) == 0:
            return state
        targets = state.graph().out(vip, full_only=False)
        if rounds > n:
            raise ContradictionError("contradiction with the two-edge lemma: too many rounds")
        rounds += 1
        if not targets:
            run_efvip_star(state, vip)
            continue
        blocker = targets[0]
        rec, sig, new, comp = run_efvip_star(state, vip, blocker)
        if comp is None:
            continue
        state.records.append(comp)
        prev = pending.get(comp.competitor)
        if prev is None:
            pending[comp.competitor] = comp
            state.note(f"hard case: blocker {blocker} competes with {comp.competitor}, dV={comp.delta_v}")
            continue
        loser = comp if comp.delta_v <= prev.delta_v else prev
        r = state.rounds[loser.round_id]
        r.matching, r.switched = r.alternative, True
        state.note(f"competition repeated: round {loser.round_id} gives blocker {blocker} its second piece")
    return state


# ---------------------------------------------------------------- execution

def _execute(state: EntireState, plan: SolutionPlan) -> None:
    n, rem = state.n, state.remainder
    if plan.kind == "separation":
        group = list(plan.group)
        state.note(f"solvable: {plan.describe()} ({plan.via})")
        if rem:
            sub = divide_entire(_sub_measures(state.measures, group), cake=rem, log=state.log)
            for i, a in enumerate(group):
                state.extra.setdefault(a, []).append(sub.bundles[i])
            state.events.extend("  " + e for e in sub.trace)
        state.remainder = ()
        return
    chain = list(plan.group)
    cutter = next(a for a in range(n) if a not in chain)
    state.note(f"solvable: {plan.describe()} ({plan.via}); agent {cutter} cuts {n} equal parts")
    if not rem:
        return
    t = Table(state.measures, tuple(range(n)), rem, state.log)
    t.query(cutter, n)
    left = {p.id: p for p in t.pieces}
    order = list(reversed(chain)) + [cutter]
    picks = []
    for a in order:
        pid = _best(state.measures[a], left, left)[0]
        state.extra.setdefault(a, []).append(left.pop(pid).intervals)
        picks.append(f"{a}:{pid}")
    # zero-value leftovers (if the cutter could not make n parts) go to the cutter
    for p in left.values():
        state.extra.setdefault(cutter, []).append(p.intervals)
    state.note("pick order " + " ".join(picks))
    state.remainder = ()


def _finish(state: EntireState, **info) -> Allocation:
    rem = state.remainder
    if rem and any(state.rem_value(a) for a in range(state.n)):
        raise ContradictionError("entire-cake division left a valuable remainder")
    if rem:
        # nobody values it: hand it to agent 0 so the whole cake is allocated
        state.extra.setdefault(0, []).append(rem)
        state.remainder = ()
    pieces = sum(len(r.pieces) for r in state.rounds) + sum(len(v) for v in state.extra.values())
    return make_allocation(state.measures, state.bundles(), state.cake, state.log, pieces,
                           state.events, rounds=len(state.rounds), **info)


MAX_ROUNDS = {3: 6, 4: 40}


def divide_entire(measures: Sequence[ValueMeasure], cake: Cells = FULL_CAKE,
                  log: QueryLog | None = None) -> Allocation:
    """Envy-free allocation of the whole ``cake`` for 1 <= n <= 4 agents."""
    n = len(measures)
    if not 1 <= n <= 4:
        raise InputError("entire-cake division is unsupported for more than 4 agents")
    log = log or QueryLog()
    state = EntireState(measures, cake, log)
    if n == 1:
        state.extra[0] = [cake]
        state.remainder = ()
        state.note("single agent takes the cake")
        return _finish(state)
    if n == 2:
        t = Table(measures, (0, 1), cake, log)
        t.query(0, 2)
        pieces = {p.id: p for p in t.pieces}
        pick = _best(measures[1], pieces, pieces)[0]
        state.extra[1] = [pieces.pop(pick).intervals]
        state.extra[0] = [p.intervals for p in pieces.values()]
        state.remainder = ()
        state.note(f"cut and choose: agent 0 cuts, agent 1 takes piece {pick}")
        return _finish(state)

    def check() -> bool:
        if not state.remainder or all(state.rem_value(a) == 0 for a in range(n)):
            return True
        return solvable(state.graph()) is not None

    if n == 3:
        vip = 0
        while not check():
            if len(state.rounds) >= MAX_ROUNDS[3]:
                raise ContradictionError("three-agent entire division did not become solvable")
            if state.rem_value(vip) > 0:
                run_efvip_star(state, vip)
            vip = (vip + 1) % 3
    else:
        for vip in range(n - 1):
            if check():
                break
            acquire_two_edges(state, vip, check)
            for b in state.graph().out(vip, full_only=False):
                if check():
                    break
                k = state.graph().kdom.get((vip, b), n - 1)
                promote_k_domination(state, vip, b, k, check)
        if len(state.rounds) > MAX_ROUNDS[4]:
            raise ContradictionError("round bound exceeded")
    if state.remainder and any(state.rem_value(a) for a in range(n)):
        # with three agents the chain plan is the classic trim-choose-divide ending
        plan = solvable(state.graph(), prefer="sequence" if n == 3 else "separation")
        if plan is None:
            raise ContradictionError("domination graph not solvable after all rounds")
        _execute(state, plan)
    return _finish(state)
