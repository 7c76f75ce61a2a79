"""Mutable division state: the pieces on the table and the reduced preference graph.

A :class:`Table` is owned by exactly one division instance. Branch trials work
on :meth:`Table.copy` so the real state only ever sees the winning branch.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .measure import Cells, FULL_CAKE, Piece, ValueMeasure
from .prefgraph import (PreferenceGraph, build_graph, finalize_allocation, max_matching,
                        reduce_assumption1, reduce_assumption2)
from .queries import EQUALIZE, EQUALIZE_STAR, QueryLog, apply_plan, equalize, equalize_star


@dataclass
class Table:
    measures: Sequence[ValueMeasure]
    agents: tuple[int, ...]
    cake: Cells = FULL_CAKE
    log: QueryLog = field(default_factory=QueryLog)
    pieces: list[Piece] = field(default_factory=list)
    reserve: list[Piece] = field(default_factory=list)
    originals: list[int] = field(default_factory=list)
    fmap: dict[int, int] = field(default_factory=dict)
    bans: dict[tuple[int, int], Cells] = field(default_factory=dict)
    history: list[tuple[int, str, int, int]] = field(default_factory=list)
    graph: PreferenceGraph | None = None
    next_id: int = 1
    fold: bool = False
    _vals: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self.pieces:
            self.pieces = [Piece(tuple(self.cake), id=0, origin=0)]

    def copy(self) -> "Table":
        # pieces are immutable; the query log is shared on purpose
        return Table(self.measures, self.agents, self.cake, self.log, list(self.pieces),
                     list(self.reserve), list(self.originals), dict(self.fmap), dict(self.bans),
                     list(self.history), self.graph, self.next_id, self.fold,
                     {a: dict(v) for a, v in self._vals.items()})

    def _new_id(self) -> int:
        self.next_id += 1
        return self.next_id - 1

    def values(self) -> dict[int, dict[int, Fraction]]:
        """agent -> piece id -> value, for the pieces on the table."""
        for a in self.agents:
            cache = self._vals.setdefault(a, {})
            m = self.measures[a]
            for p in self.pieces:
                if p.id not in cache:
                    cache[p.id] = m.value(p)
        return self._vals

    def _forget(self, ids) -> None:
        live = {p.id for p in self.pieces}
        for cache in self._vals.values():
            for pid in list(cache):
                if pid in ids or pid not in live:
                    del cache[pid]

    def by_id(self) -> dict[int, Piece]:
        return {p.id: p for p in self.pieces}

    @property
    def piece_count(self) -> int:
        return len(self.pieces) + len(self.reserve)

    @property
    def query_count(self) -> int:
        return len(self.history)

    def query(self, agent: int, k: int, kind: str = EQUALIZE) -> list[int]:
        """Run Equalize(k) (or Equalize*(k)) for ``agent``; return ids it now prefers."""
        m = self.measures[agent]
        first = not self.history
        if kind == EQUALIZE_STAR and not first:
            plan = equalize_star(agent, m, self.pieces, k, self.log)
        else:
            plan = equalize(agent, m, self.pieces, k, self.log)
        applied = apply_plan(plan, m, self.pieces, self._new_id, mark_new=not first)
        self.pieces = applied.pieces
        if kind == EQUALIZE_STAR:
            self.reserve.extend(applied.leftovers)
        self.history.append((agent, kind, k, plan.cut_count))
        if first:
            self.originals = [p.id for p in self.pieces]
            self.pieces = [p.evolve(origin=p.id) for p in self.pieces]
        touched = set(applied.cut) | {p.id for p in applied.created}
        self._forget(touched)
        self._update_graph(agent, touched, first)
        return sorted(self.graph.edges[agent])

    def _update_graph(self, cutter: int, touched: set[int], first: bool) -> None:
        cells = {p.id: p.intervals for p in self.pieces}
        # a ban lapses once its piece has been cut again
        # and the cutter's own answer defines its preferences afresh
        self.bans = {key: c for key, c in self.bans.items()
                     if key[0] != cutter and cells.get(key[1]) == c and key[1] not in touched}
        g = self.real_graph()
        g = g.with_edges({a: [p for p in g.edges[a] if (a, p) not in self.bans] for a in g.agents})
        reduced = reduce_assumption1(g, touched, cutter)
        for a in g.agents:
            for p in g.edges[a] - reduced.edges[a]:
                self.bans[(a, p)] = cells[p]
        if self.fold and not first:
            new_ids = [p.id for p in self.pieces if p.is_new]
            reduced = reduce_assumption2(reduced, new_ids, self.originals, self.fmap)
            self.fmap = dict(reduced.fmap)
        self.graph = reduced

    def preferred(self, agent: int) -> frozenset[int]:
        return self.graph.edges[agent]

    def real_graph(self) -> PreferenceGraph:
        return build_graph(self.pieces, self.measures, self.agents, values=self.values())

    def matching(self, forced: dict[int, int] | None = None, real: bool = False) -> dict[int, int]:
        g = self.real_graph() if real else self.graph
        if forced:
            g = g.with_edges({a: ([forced[a]] if a in forced else g.edges[a]) for a in g.agents})
        return max_matching(g)

    def assign(self, matching: dict[int, int]) -> dict[int, Piece]:
        """Real piece per agent: the best member of the matched original's Y-set."""
        return finalize_allocation(matching, self.graph.ysets, self.measures, self.by_id())
