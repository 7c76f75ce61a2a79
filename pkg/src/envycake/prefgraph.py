"""Bipartite preference graph, its two reductions, Hall's condition and matching."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .measure import Piece, ValueMeasure
from .queries import EVAL, QueryLog


@dataclass(frozen=True)
class PreferenceGraph:
    agents: tuple[int, ...]
    pieces: tuple[int, ...]
    edges: Mapping[int, frozenset[int]]
    last_cutter: Mapping[int, int | None] = field(default_factory=dict)
    fmap: Mapping[int, int] = field(default_factory=dict)  # new piece -> original

    def neighbors(self, agents: Iterable[int]) -> frozenset[int]:
        out: set[int] = set()
        for a in agents:
            out |= self.edges.get(a, frozenset())
        return frozenset(out)

    def degree(self, agent: int) -> int:
        return len(self.edges.get(agent, ()))

    @property
    def ysets(self) -> dict[int, tuple[int, ...]]:
        """Original piece -> all pieces whose edges were folded onto it."""
        out: dict[int, list[int]] = {}
        for new, orig in self.fmap.items():
            out.setdefault(orig, []).append(new)
        return {o: (o, *sorted(out.get(o, ()))) for o in self.pieces}

    def with_edges(self, edges: Mapping[int, Iterable[int]]) -> "PreferenceGraph":
        return replace(self, edges={a: frozenset(edges.get(a, ())) for a in self.agents})

    def dump(self) -> str:
        lines = []
        for a in self.agents:
            targets = " ".join(str(p) for p in sorted(self.edges.get(a, ())))
            lines.append(f"agent {a} -> {targets}")
        return "\n".join(lines)


def best_ids(vals: Mapping[int, Fraction]) -> frozenset[int]:
    top = max(vals.values())
    return frozenset(pid for pid, v in vals.items() if v == top)


def build_graph(pieces: Sequence[Piece], measures: Sequence[ValueMeasure],
                agents: Sequence[int] | None = None, log: QueryLog | None = None,
                values: Mapping[int, Mapping[int, Fraction]] | None = None) -> PreferenceGraph:
    """Edge (a, p) iff p is one of a's most valuable pieces on the table (ties kept).

    ``values`` optionally supplies precomputed agent -> piece id -> value.
    """
    if agents is None:
        agents = range(len(measures))
    edges = {}
    for a in agents:
        if log is not None:
            log.add(a, EVAL, len(pieces))
        if values is not None:
            edges[a] = best_ids(values[a])
        else:
            edges[a] = best_ids({p.id: measures[a].value(p) for p in pieces})
    return PreferenceGraph(tuple(agents), tuple(p.id for p in pieces), edges,
                           {p.id: p.last_cutter for p in pieces})


def reduce_assumption1(g: PreferenceGraph, just_cut: Iterable[int], cutter: int) -> PreferenceGraph:
    """Drop edges to just-cut pieces from non-cutters who also prefer an uncut piece."""
    cut = frozenset(just_cut)
    edges = {}
    for a in g.agents:
        mine = g.edges[a]
        if a != cutter and mine & cut and mine - cut:
            mine = mine - cut
        edges[a] = mine
    return replace(g, edges=edges)


def reduce_assumption2(g: PreferenceGraph, new_pieces: Sequence[int],
                       originals: Sequence[int] | None = None,
                       mapping: Mapping[int, int] | None = None) -> PreferenceGraph:
    """Fold every edge to a new piece onto a distinct original piece.

    ``mapping`` carries the injections chosen in earlier queries; the new
    pieces of this query get fresh images, injective within the query. Images
    are taken in original-index order, skipping originals that some agent
    holding an edge to the new piece already points at (so folding never
    collapses two of an agent's edges into one).
    """
    fmap = dict(g.fmap)
    if mapping:
        fmap.update(mapping)
    if originals is None:
        originals = [p for p in g.pieces if p not in fmap and p not in new_pieces]
    originals = list(originals)
    fresh = [p for p in new_pieces if p not in fmap]
    assert len(fresh) <= len(originals), "more new pieces than originals in one query"

    def image(p: int) -> int:
        return fmap.get(p, p)

    used: set[int] = set()
    for p in fresh:
        holders = [a for a in g.agents if p in g.edges[a]]
        taken = {image(q) for a in holders for q in g.edges[a] if q != p and (q in fmap or q in originals)}
        free = [o for o in originals if o not in used]
        choice = next((o for o in free if o not in taken), free[0])
        fmap[p] = choice
        used.add(choice)
    edges = {a: frozenset(image(q) for q in g.edges[a]) for a in g.agents}
    pieces = tuple(p for p in g.pieces if p not in fmap)
    return replace(g, pieces=pieces, edges=edges, fmap=fmap)


def hall_check(g: PreferenceGraph) -> list[frozenset[int]]:
    """All inclusion-minimal agent sets S with |N(S)| < |S|."""
    bad: list[frozenset[int]] = []
    for size in range(1, len(g.agents) + 1):
        for group in combinations(g.agents, size):
            s = frozenset(group)
            if any(b <= s for b in bad):
                continue
            if len(g.neighbors(s)) < size:
                bad.append(s)
    return bad


def has_surplus(g: PreferenceGraph, known: Iterable[int]) -> bool:
    """Every k of the ``known`` agents jointly prefer at least k+1 pieces.

    Under this condition a saturating matching exists whatever the single
    remaining agent prefers.
    """
    known = list(known)
    for size in range(1, len(known) + 1):
        for group in combinations(known, size):
            if len(g.neighbors(group)) < size + 1:
                return False
    return True


class MatchingError(ValueError):
    def __init__(self, violations):
        super().__init__(f"no saturating matching; Hall violated by {sorted(map(sorted, violations))}")
        self.violations = violations


def max_matching(g: PreferenceGraph) -> dict[int, int]:
    """Saturating agent->piece matching by augmenting paths in id order."""
    owner: dict[int, int] = {}

    def augment(a: int, seen: set[int]) -> bool:
        for p in sorted(g.edges.get(a, ())):
            if p in seen:
                continue
            seen.add(p)
            if p not in owner or augment(owner[p], seen):
                owner[p] = a
                return True
        return False

    for a in g.agents:
        if not augment(a, set()):
            raise MatchingError(hall_check(g))
    return {a: p for p, a in owner.items()}


def finalize_allocation(matching: Mapping[int, int], ysets: Mapping[int, Sequence[int]],
                        measures: Sequence[ValueMeasure], pieces: Mapping[int, Piece]) -> dict[int, Piece]:
    """Each agent takes its best piece within the Y-set of its matched original."""
    out = {}
    for a, orig in matching.items():
        members = [pieces[q] for q in ysets.get(orig, (orig,)) if q in pieces]
        out[a] = max(members, key=lambda q: (measures[a].value(q), -q.id))
    return out
