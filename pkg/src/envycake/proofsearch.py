"""Symbolic case analysis over preference posets.

Agents are lowercase letters; ``a`` makes the first equal cut and the later
cutters trim pieces from the same side. A piece is named by its original
index and the trims applied to it: ``4b`` is piece 4 after ``b`` trimmed it
during Equalize(2), ``3cc`` is piece 3 after ``c`` trimmed it during
Equalize(3). Every agent holds a strict partial order over the pieces it has
heard of; a case split adds facts and is discarded when an order turns cyclic.

Two trims of the same original are nested (one contains the other) because
all cutters trim from the same side, so a strict preference between them for
any one agent holds for every agent. This is what ``infer_containment`` adds.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, permutations, product
from typing import Iterable, NamedTuple, Sequence

from .connected import BranchScript
from .errors import ContradictionError
from .poset import add_edges, closure
from .queries import EQUALIZE

GLOBAL = "*"


class BadInference(ContradictionError):
    pass


@dataclass(frozen=True, eq=False)
class SymbolicPiece:
    origin: int
    tag: tuple[str, ...] = ()
    key: str = ""
    parent: "SymbolicPiece | None" = None

    def __post_init__(self):
        if not self.key:
            object.__setattr__(self, "key", str(self.origin))
        object.__setattr__(self, "_depth", sum(len(t) for t in self.tag))

    def __eq__(self, other):
        return isinstance(other, SymbolicPiece) and other.key == self.key

    def __hash__(self):
        return hash(self.key)

    @property
    def name(self) -> str:
        return f"{self.origin}{''.join(self.tag)}"

    @property
    def depth(self) -> int:
        return self._depth

    def ancestors(self):
        p = self.parent
        while p is not None:
            yield p
            p = p.parent

    def trimmed(self, agent: str, k: int, context: str) -> "SymbolicPiece":
        return SymbolicPiece(self.origin, self.tag + (agent * (k - 1),), f"{self.key}/{context}", self)

    def __repr__(self):
        return self.name


class Fact(NamedTuple):
    agent: str          # a letter, or GLOBAL for every agent
    lo: str             # piece keys
    hi: str
    strict: bool = True


@dataclass(frozen=True, eq=False)
class SymbolicState:
    """Accumulated knowledge: orders over originals, known pieces and facts."""

    n: int
    orders: tuple[tuple[str, tuple[int, ...]], ...]
    pieces: tuple[SymbolicPiece, ...]
    facts: tuple[Fact, ...] = ()
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @classmethod
    def initial(cls, n: int, orders: dict[str, Sequence[int]]) -> "SymbolicState":
        return cls(n, tuple((a, tuple(o)) for a, o in orders.items()),
                   tuple(SymbolicPiece(i) for i in range(1, n + 1)))

    @property
    def agents(self) -> tuple[str, ...]:
        if "agents" not in self._cache:
            self._cache["agents"] = tuple(a for a, _ in self.orders)
        return self._cache["agents"]

    def order(self, agent: str) -> tuple[int, ...]:
        return dict(self.orders)[agent]

    def by_key(self) -> dict[str, SymbolicPiece]:
        if "keys" not in self._cache:
            self._cache["keys"] = {p.key: p for p in self.pieces}
        return self._cache["keys"]

    def fact_set(self) -> frozenset[Fact]:
        if "facts" not in self._cache:
            self._cache["facts"] = frozenset(self.facts)
        return self._cache["facts"]

    def extend(self, pieces: Iterable[SymbolicPiece] = (), facts: Iterable[Fact] = ()) -> "SymbolicState":
        known = self.by_key()
        new_pieces = tuple(dict.fromkeys(p for p in pieces if p.key not in known))
        have = self.fact_set()
        new_facts = tuple(f for f in dict.fromkeys(facts) if f not in have)
        if not new_pieces and not new_facts:
            return self
        child = SymbolicState(self.n, self.orders, self.pieces + new_pieces, self.facts + new_facts)
        # remembered so closures can be updated instead of rebuilt
        child._cache["parent"] = (self, new_pieces, new_facts)
        return child

    def _edges(self, agent: str, base: bool, pieces, facts):
        for p in pieces:
            if p.parent is not None:
                yield p.key, p.parent.key, True
        if base:
            return
        for f in facts:
            if f.agent == agent or f.agent == GLOBAL:
                yield f.lo, f.hi, f.strict
                if not f.strict:
                    yield f.hi, f.lo, False

    def _full_closure(self, agent: str, base: bool):
        idx = {p.key: i for i, p in enumerate(self.pieces)}
        m = len(self.pieces)
        le, lt = [0] * m, [0] * m
        order = self.order(agent) if agent in self.agents else ()
        for lo, hi in zip(order, order[1:]):
            lt[idx[str(lo)]] |= 1 << idx[str(hi)]
        for u, v, strict in self._edges(agent, base, self.pieces, self.facts):
            if strict:
                lt[idx[u]] |= 1 << idx[v]
            else:
                le[idx[u]] |= 1 << idx[v]
        return idx, closure(m, le, lt)

    def _closure(self, agent: str, base: bool = False):
        ck = (agent, base)
        if ck in self._cache:
            return self._cache[ck]
        # walk up to the nearest state whose closure is known, then replay the deltas
        chain, st = [], self
        while ck not in st._cache and "parent" in st._cache:
            chain.append(st)
            st = st._cache["parent"][0]
        if ck not in st._cache:
            st._cache[ck] = st._full_closure(agent, base)
        idx, res = st._cache[ck]
        for child in reversed(chain):
            _, new_pieces, new_facts = child._cache["parent"]
            if res is not None:
                idx = dict(idx)
                reach, lt = list(res[0]), list(res[1])
                for p in new_pieces:
                    idx[p.key] = len(reach)
                    reach.append(1 << len(reach))
                    lt.append(0)
                edges = [(idx[u], idx[v], strict)
                         for u, v, strict in child._edges(agent, base, new_pieces, new_facts)]
                res = (reach, lt) if add_edges(reach, lt, edges) else None
            else:
                idx = {p.key: i for i, p in enumerate(child.pieces)}
            child._cache[ck] = (idx, res)
        return self._cache[ck]

    def consistent(self, agents: Iterable[str] | None = None) -> bool:
        return all(self._closure(a)[1] is not None for a in (agents or self.agents))

    def less(self, agent: str, p: SymbolicPiece, q: SymbolicPiece, base: bool = False) -> bool:
        idx, res = self._closure(agent, base)
        if res is None:
            raise BadInference(f"bad inference: {agent}'s order is cyclic")
        return bool(res[1][idx[p.key]] >> idx[q.key] & 1)

    def global_relations(self) -> list[tuple[str, str]]:
        keys = self.by_key()
        return [(keys[f.lo].name, keys[f.hi].name) for f in self.facts if f.agent == GLOBAL]


def infer_containment(state: SymbolicState, fresh: Sequence[SymbolicPiece] = ()):
    """Record global relations between same-depth trims of one original.

    Returns the new state and the new relations as ``(lesser, greater)``
    pieces, listed in the order of ``fresh``. Only trims at the same depth
    made by different agents are compared.
    """
    fresh = list(fresh)
    seen = set(fresh)
    order = fresh + [p for p in state.pieces if p not in seen and p.tag]
    groups: dict[tuple[int, int], list[SymbolicPiece]] = {}
    for p in order:
        groups.setdefault((p.origin, p.depth), []).append(p)
    pairs = []
    for p in order:
        g = groups[(p.origin, p.depth)]
        for u in g[g.index(p) + 1:]:
            if u.tag != p.tag:
                pairs.append((p, u))
    found: list[tuple[SymbolicPiece, SymbolicPiece]] = []
    while pairs:
        rows = []
        for agent in state.agents:
            idx, res = state._closure(agent)
            if res is None:
                raise BadInference(f"bad inference: {agent}'s order is cyclic")
            rows.append((idx, res[1]))
        have = {(f.lo, f.hi) for f in state.facts if f.agent == GLOBAL}
        new, rest = [], []
        for t, u in pairs:
            if (t.key, u.key) in have or (u.key, t.key) in have:
                continue
            for idx, lt in rows:
                it, iu = idx[t.key], idx[u.key]
                if lt[it] >> iu & 1:
                    new.append((t, u))
                    break
                if lt[iu] >> it & 1:
                    new.append((u, t))
                    break
            else:
                rest.append((t, u))
        if not new:
            break
        state = state.extend(facts=[Fact(GLOBAL, lo.key, hi.key) for lo, hi in new])
        found += new
        pairs = rest
    if not state.consistent():
        raise BadInference("bad inference: containment made an order cyclic")
    return state, found


# ---------------------------------------------------------------- branches

@dataclass
class Leaf:
    state: SymbolicState
    success: bool
    culprit: str | None
    forced: bool
    cases: list[str]


@dataclass
class BranchOutcome:
    head: str
    relations: list[tuple[str, str]]
    leaves: list[Leaf]

    @property
    def failing(self) -> list[Leaf]:
        return [lf for lf in self.leaves if not lf.success]


def _letters(script: BranchScript, names: Sequence[str]):
    return [(names[a], k) for a, _kind, k in script.steps]


def _options(state: SymbolicState, agent: str, table: list[SymbolicPiece], k: int, need_kth: bool):
    """Top sets allowed by the agent's base order (originals plus containment)."""
    rev = list(reversed(table))

    def above(r, u):
        return state.less(agent, u, r, base=True)

    out = []
    for top in combinations(rev, k - 1):
        kths = [p for p in rev if p not in top] if need_kth else [None]
        for p in kths:
            u = set(top) | ({p} if p is not None else set())
            if any(above(r, x) for r in table if r not in u for x in u):
                continue
            if p is not None and any(state.less(agent, t, p, base=True) for t in top):
                continue
            out.append((top, p))
    return out


def _sort_by(state: SymbolicState, agent: str, pieces):
    pos = {o: i for i, o in enumerate(state.order(agent))}
    return sorted(pieces, key=lambda p: pos.get(p.origin, -1))


def simulate_branch(state: SymbolicState, script: BranchScript, names: Sequence[str] = "abcdefgh",
                    first_cutter: str = "a") -> BranchOutcome:
    """Enumerate the consistent outcomes of one branch run after the first equal cut.

    A leaf succeeds when every cutter and the first cutter still prefer at
    least two pieces at the end.
    """
    steps = _letters(script, names)
    table0 = [p for p in state.pieces if not p.tag]
    leaves: list[Leaf] = []
    heads: list[tuple[str, list]] = []

    def walk(st, i, table, best, forced, cases, context, culprit):
        if culprit is not None or i == len(steps):
            leaves.append(Leaf(st, culprit is None, culprit, forced, cases))
            return
        agent, k = steps[i]
        last = i == len(steps) - 1
        opts = _options(st, agent, table, k, not last)
        for top, p in opts:
            others = [r for r in table if r not in top and r != p]
            facts = []
            if p is not None:
                facts += [Fact(agent, p.key, t.key) for t in top]
                facts += [Fact(agent, r.key, p.key) for r in others]
            else:
                facts += [Fact(agent, r.key, t.key) for t in top for r in others]
            nxt = st.extend(facts=facts)
            if not nxt.consistent([agent]):
                continue
            ctx = f"{context}.{agent}{k}" if context else f"{agent}{k}"
            if not last:
                trims = [t.trimmed(agent, k, ctx) for t in _sort_by(st, agent, top)]
                nxt = nxt.extend(pieces=trims, facts=[Fact(agent, t.key, p.key, strict=False) for t in trims])
                try:
                    nxt, rel = infer_containment(nxt, trims)
                except BadInference:
                    continue
                if i == 0:
                    group = "=".join(x.name for x in [p] + trims)
                    heads.append((f"{agent}:Equalize({k}) makes {agent}'s best pieces: {group}", rel))
                if i == 0 and not st.pieces[0].tag and len(table) == len(table0):
                    newtable = _sort_by(st, agent, others) + [p] + trims
                else:
                    trim_of = dict(zip(_sort_by(st, agent, top), trims))
                    newtable = [trim_of.get(r, r) for r in table]
            else:
                trims, newtable = [], [r for r in table if r not in top]
            nbest = {}
            bad = None
            for who, held in best.items():
                left = [x for x in held if x not in top]
                nbest[who] = left
                if len(left) < 2 and bad is None:
                    bad = agent
            nbest[agent] = ([p] if p is not None else [None]) + trims if not last else [None] * k
            desc = f"{agent} prefers {' '.join(t.name for t in top)} to {' '.join(r.name for r in table if r not in top)}"
            walk(nxt, i + 1, newtable, nbest, forced and len(opts) == 1, cases + [desc], ctx, bad)

    walk(state, 0, list(table0), {first_cutter: list(table0)}, True, [], "", None)
    head, rel = heads[0] if heads else ("", [])
    return BranchOutcome(head, [(lo.name, hi.name) for lo, hi in rel], leaves)


# ---------------------------------------------------------------- 4-agent proof

FOUR_AGENT_TEMPLATE = (
    BranchScript(((1, EQUALIZE, 2), (2, EQUALIZE, 2))),
    BranchScript(((2, EQUALIZE, 2), (1, EQUALIZE, 2))),
    BranchScript(((1, EQUALIZE, 3), (2, EQUALIZE, 2))),
    BranchScript(((2, EQUALIZE, 3), (1, EQUALIZE, 2))),
)


@dataclass
class ProofNode:
    head: str
    relations: list[tuple[str, str]]
    verdict: str                       # "always", "must" or "may"
    culprit: str | None = None
    children: list[tuple[str | None, "ProofNode"]] = field(default_factory=list)

    def lines(self, depth: int = 0) -> list[str]:
        pad = "  " * (depth + 1)
        text = pad + self.head
        if self.relations:
            text += ", so globally: " + " ".join(f"{lo}<{hi}" for lo, hi in self.relations) + " "
        text += ". "
        if self.verdict == "always":
            return [text + "This always succeeds."]
        if self.verdict == "must":
            out = [text + f"This must fail because of {self.culprit}."]
            return out + self.children[0][1].lines(depth + 1)
        cases = ";  ".join(c for c, _ in self.children)
        word = "case" if len(self.children) == 1 else "cases"
        out = [text + f"This may fail in {len(self.children)} {word} : {cases} ."]
        for case, child in self.children:
            out.append(pad + f" Assume the case   {case}. Then:")
            out += child.lines(depth + 1)
        return out


@dataclass
class ProofCase:
    index: int
    order: tuple[int, ...]
    root: ProofNode

    def branch_path(self) -> list[str]:
        out, node = [], self.root
        while True:
            out.append(node.head.split(" makes")[0])
            if not node.children:
                return out
            node = node.children[0][1]


@dataclass
class ProofDoc:
    cases: list[ProofCase]
    total: int = 24

    def case(self, index: int) -> ProofCase:
        return next(c for c in self.cases if c.index == index)

    def render_case(self, c: ProofCase) -> list[str]:
        order = "<".join(map(str, c.order))
        return [f"CASE {c.index} OF {self.total} : c's order is {order} :"] + c.root.lines() + [""]

    def render(self, only: int | None = None) -> str:
        if only is not None:
            return "\n".join(self.render_case(self.case(only))) + "\n"
        out = ["Initially, agent a cuts four equal pieces:  1,2,3,4 .",
               "Assume w.l.o.g. that b's preferences are 1<2<3<4 .",
               f"Consider the following {self.total} cases regarding the preferences of c:", ""]
        for c in self.cases:
            out += self.render_case(c)
        out.append("Q.E.D!")
        return "\n".join(out) + "\n"


def _prove(state, template, idx, names) -> ProofNode:
    out = simulate_branch(state, template[idx], names)
    fails = out.failing
    if not fails:
        return ProofNode(out.head, out.relations, "always")
    if idx + 1 >= len(template):
        raise ContradictionError(f"unprovable case: every branch may fail ({out.head})")
    if len(out.leaves) == 1 and fails[0].forced:
        child = _prove(fails[0].state, template, idx + 1, names)
        return ProofNode(out.head, out.relations, "must", fails[0].culprit, [(None, child)])
    kids = [(leaf.cases[-1], _prove(leaf.state, template, idx + 1, names)) for leaf in fails]
    return ProofNode(out.head, out.relations, "may", children=kids)


def prove_4agent(template: Sequence[BranchScript] = FOUR_AGENT_TEMPLATE, only: int | None = None) -> ProofDoc:
    """Case analysis over c's 24 orders, with b's order fixed to 1<2<3<4."""
    names = "abcd"
    cases = []
    for i, order in enumerate(permutations((4, 3, 2, 1)), start=1):
        if only is not None and i != only:
            continue
        state = SymbolicState.initial(4, {"b": (1, 2, 3, 4), "c": order})
        cases.append(ProofCase(i, order, _prove(state, list(template), 0, names)))
    return ProofDoc(cases)


# ---------------------------------------------------------------- template search

def five_agent_template() -> list[BranchScript]:
    """Three of four unknown agents cut in every order; the fourth is last."""
    out = []
    for x, y, z in permutations((1, 2, 3)):
        for kx in (2, 3, 4):
            for ky in (2, 3):
                out.append(BranchScript(((x, EQUALIZE, kx), (y, EQUALIZE, ky), (z, EQUALIZE, 2))))
    return out


@dataclass
class Counterexample:
    orders: dict[str, tuple[int, ...]]
    failures: list[tuple[str, Leaf]]     # (branch description, failing leaf) per branch

    def describe(self) -> str:
        lines = [f"{a}: " + "<=".join(map(str, o)) for a, o in self.orders.items()]
        for desc, leaf in self.failures:
            why = f"fails because of {leaf.culprit}"
            lines.append(f"  {desc}: {why}" + (f" ({'; '.join(leaf.cases)})" if leaf.cases else ""))
        return "\n".join(lines)


def _delta(root: SymbolicState, leaf: Leaf):
    st = leaf.state
    return st.pieces[len(root.pieces):], st.facts[len(root.facts):]


def _merge(state: SymbolicState, deltas) -> SymbolicState | None:
    """Add the deltas and close under containment; None when inconsistent."""
    pieces, facts = [], []
    for p, f in deltas:
        pieces += p
        facts += f
    merged = state.extend(pieces, facts)
    if merged is state:
        return state
    if not merged.consistent():
        return None
    try:
        merged, _ = infer_containment(merged, [p for p in pieces if p.tag])
    except BadInference:
        return None
    return merged


def _compatible(state: SymbolicState, delta) -> bool:
    # orders only; containment is inferred once a leaf is actually chosen
    return state.extend(*delta).consistent()


def _explain(root, leaf_delta, assigned, pairs=None):
    """A small set of assigned branches that on their own rule out ``leaf_delta``.

    A single assigned choice that clashes with the leaf is tried first (the
    usual case, memoised in ``pairs``); otherwise divide and conquer over the
    assignment. Falls back to every assigned branch if the whole set does not
    reproduce the conflict.
    """
    def bad(items):
        return _merge(root, [leaf_delta] + [d for _, d in items]) is None

    for b, d in assigned:
        key = (id(leaf_delta), id(d))
        if pairs is None or key not in pairs:
            clash = bad([(b, d)])
            if pairs is None:
                if clash:
                    return {b}
                continue
            pairs[key] = clash
        if pairs[key]:
            return {b}

    def qx(base, added, cand):
        if added and bad(base):
            return []
        if len(cand) == 1:
            return cand
        half = len(cand) // 2
        c1, c2 = cand[:half], cand[half:]
        d2 = qx(base + c1, c1, c2)
        d1 = qx(base + d2, d2, c1)
        return d1 + d2

    items = list(assigned)
    if not items or not bad(items):
        return {b for b, _ in items}
    if bad([]):
        return set()
    return {b for b, _ in qx([], [], items)}


def _all_fail(root, state, full, alive, assigned, budget, pairs):
    """Pick one failing leaf per branch, keeping the knowledge consistent.

    ``full`` maps each branch to its failing leaves as ``(leaf, delta)``
    pairs, the deltas taken over the root knowledge; ``alive`` holds those
    of the remaining branches not yet ruled out.
    ``assigned`` lists the ``(branch, delta)`` choices made so far. Returns
    ``(choices, None)`` on success, else ``(None, conflict)`` where
    ``conflict`` names assigned branches responsible for the dead end, so
    that choices outside it are not retried (conflict-directed backjumping).
    """
    if not alive:
        return [], None
    budget[0] -= 1
    if budget[0] < 0:
        raise TimeoutError("search budget exhausted")
    now = dict(alive)
    pick = None
    # fewest live leaves first; a branch down to one leaf is taken at once
    for i in sorted(alive, key=lambda i: (len(alive[i]), i)):
        keep = [o for o in alive[i] if _compatible(state, o[1])]
        if not keep:
            conflict = set()
            for _, d in full[i]:
                conflict |= _explain(root, d, assigned, pairs)
            return None, conflict
        now[i] = keep
        if len(keep) == 1:
            pick = i
            break
    if pick is None:
        pick = min(now, key=lambda i: (len(now[i]), i))
    rest = {i: o for i, o in now.items() if i != pick}
    conflict: set[int] = set()
    for leaf, d in now[pick]:
        child = _merge(state, [d])
        if child is None:
            conflict |= _explain(root, d, assigned, pairs)
            continue
        found, why = _all_fail(root, child, full, rest, assigned + [(pick, d)], budget, pairs)
        if found is not None:
            return [(pick, leaf)] + found, None
        if pick not in why:
            return None, why
        conflict |= why - {pick}
    # the other leaves of this branch were ruled out by earlier choices
    for leaf, d in full[pick]:
        if not any(d is e for _, e in now[pick]):
            conflict |= _explain(root, d, assigned, pairs)
    return None, conflict


def verify_profile(orders: dict[str, Sequence[int]], template: Sequence[BranchScript],
                   n: int | None = None, budget: int | None = None) -> Counterexample | None:
    """A consistent way for every branch to fail under these orders, if one exists.

    ``budget`` caps the number of search nodes; running out raises TimeoutError.
    """
    n = n or len(next(iter(orders.values())))
    names = "abcdefgh"
    root = SymbolicState.initial(n, {a: tuple(o) for a, o in orders.items()})
    template = list(template)
    alive = {}
    for i, script in enumerate(template):
        fails = simulate_branch(root, script, names).failing
        if not fails:
            return None
        alive[i] = [(leaf, _delta(root, leaf)) for leaf in fails]
    found, _ = _all_fail(root, root, alive, dict(alive), [], [budget if budget is not None else float("inf")], {})
    if found is None:
        return None
    failures = [(template[i].describe(list(names)), leaf) for i, leaf in sorted(found, key=lambda x: x[0])]
    return Counterexample({a: tuple(o) for a, o in orders.items()}, failures)


def _cutters(template: Sequence[BranchScript], n: int) -> list[int]:
    used = sorted({a for s in template for a, _, _ in s.steps})
    return used or list(range(1, n - 1))


@dataclass
class SearchReport:
    counterexample: Counterexample | None
    checked: int                                   # profiles examined
    skipped: list[dict[str, tuple[int, ...]]]      # budget ran out before a verdict

    @property
    def conclusive(self) -> bool:
        return self.counterexample is not None or not self.skipped


DEFAULT_PROFILE_BUDGET = 150


def search_template(n: int, template: Sequence[BranchScript],
                    budget: int | None = DEFAULT_PROFILE_BUDGET) -> SearchReport:
    """Search profiles (first cutter's order ascending) for one defeating every branch.

    Profiles are taken with the remaining cutters' orders in lexicographic
    order. Each gets at most ``budget`` search nodes (None for no cap); a
    profile that runs out is skipped and listed in the report, so an empty
    result is only a proof when nothing was skipped.
    """
    names = "abcdefgh"
    cutters = _cutters(template, n)
    first, rest = names[cutters[0]], [names[c] for c in cutters[1:]]
    base = tuple(range(1, n + 1))
    skipped, checked = [], 0
    for combo in product(permutations(base), repeat=len(rest)):
        orders = {first: base, **dict(zip(rest, combo))}
        checked += 1
        try:
            found = verify_profile(orders, template, n, budget)
        except TimeoutError:
            skipped.append(orders)
            continue
        if found is not None:
            return SearchReport(found, checked, skipped)
    return SearchReport(None, checked, skipped)
