"""Equalize and Equalize* queries, answered through mark/eval queries.

An Equalize(k) answer is computed by the envy-free stick-division reduction:
the agent's values of the pieces on the table are sticks, ``l*`` is the
largest length of which ``k`` copies can be cut, and every longer stick is
cut into ``l*``-sized pieces from the left.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .measure import Piece, ValueMeasure, ZERO, split_at

EVAL, MARK, EQUALIZE, EQUALIZE_STAR = "eval", "mark", "equalize", "equalize_star"


@dataclass
class QueryLog:
    """Per-agent query counters. Shared by every branch trial of one division."""

    counts: dict[int, Counter] = field(default_factory=dict)

    def add(self, agent: int, kind: str, amount: int = 1) -> None:
        self.counts.setdefault(agent, Counter())[kind] += amount

    def total(self, kind: str | None = None) -> int:
        if kind is None:
            return sum(sum(c.values()) for c in self.counts.values())
        return sum(c[kind] for c in self.counts.values())

    def of(self, agent: int, kind: str) -> int:
        return self.counts.get(agent, Counter())[kind]

    def merge(self, other: "QueryLog") -> None:
        for agent, c in other.counts.items():
            self.counts.setdefault(agent, Counter()).update(c)

    def snapshot(self) -> dict[str, int]:
        return {k: self.total(k) for k in (EVAL, MARK, EQUALIZE, EQUALIZE_STAR)}


def stick_division(lengths: Sequence[Fraction], k: int) -> Fraction:
    """Largest l such that at least k pieces of length l can be cut.

    The optimum is always one of the candidates ``lengths[j] / i`` with
    ``1 <= i <= k``; the largest feasible candidate is returned.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if not lengths:
        raise ValueError("no sticks")
    if any(x < 0 for x in lengths):
        raise ValueError("negative stick length")
    if all(x == 0 for x in lengths):
        raise ValueError("degenerate sticks")
    # max/k is always feasible, so smaller candidates never matter
    floor = max(lengths) / k
    distinct = {Fraction(x) for x in lengths if x >= floor}
    candidates = sorted({x / i for x in distinct for i in range(1, k + 1) if x / i >= floor}, reverse=True)
    weights = Counter(Fraction(x) for x in lengths if x >= floor)

    def feasible(l):
        return sum(c * (x // l) for x, c in weights.items()) >= k

    # feasibility is monotone in l: find the first feasible candidate
    lo, hi = 0, len(candidates) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if feasible(candidates[mid]):
            hi = mid
        else:
            lo = mid + 1
    return candidates[lo]


@dataclass(frozen=True)
class CutPlan:
    """Marks an agent places in answer to an Equalize-type query.

    ``marks`` maps a piece id to the increasing list of prefix values at which
    that piece is cut (values in the cutter's measure).
    """

    cutter: int
    kind: str
    k: int
    l_star: Fraction
    marks: tuple[tuple[int, tuple[Fraction, ...]], ...]

    @property
    def cut_count(self) -> int:
        return sum(len(m) for _, m in self.marks)

    @property
    def cut_ids(self) -> tuple[int, ...]:
        return tuple(pid for pid, _ in self.marks)


def _values(m: ValueMeasure, pieces: Sequence[Piece], agent: int, log: QueryLog | None) -> list[Fraction]:
    if log is not None:
        log.add(agent, EVAL, len(pieces))
    return [m.value(p) for p in pieces]


def equalize(agent: int, m: ValueMeasure, pieces: Sequence[Piece], k: int,
             log: QueryLog | None = None) -> CutPlan:
    """Answer Equalize(k): at least k equally-best pieces for ``agent``."""
    if k > len(pieces) and len(pieces) != 1:
        raise ValueError(f"k={k} exceeds the {len(pieces)} pieces on the table")
    if k < 1:
        raise ValueError("k must be positive")
    vals = _values(m, pieces, agent, log)
    if log is not None:
        log.add(agent, EQUALIZE)
    if max(vals) == 0:
        # everything is worthless to the agent: it is already indifferent
        return CutPlan(agent, EQUALIZE, k, ZERO, ())
    l_star = stick_division(vals, k)
    marks = []
    for p, v in zip(pieces, vals):
        if v <= l_star:
            continue
        cuts = math.ceil(v / l_star) - 1
        marks.append((p.id, tuple(l_star * i for i in range(1, cuts + 1))))
    plan = CutPlan(agent, EQUALIZE, k, l_star, tuple(marks))
    if log is not None:
        log.add(agent, MARK, plan.cut_count)
    return plan


def ranked(pieces: Sequence[Piece], vals: Sequence[Fraction]) -> list[int]:
    """Indices of ``pieces`` from most to least valuable; ties by piece id."""
    return sorted(range(len(pieces)), key=lambda i: (-vals[i], pieces[i].id))


def equalize_star(agent: int, m: ValueMeasure, pieces: Sequence[Piece], k: int,
                  log: QueryLog | None = None) -> CutPlan:
    """Answer Equalize*(k): trim the best k-1 pieces down to the k-th best."""
    if not 2 <= k <= len(pieces):
        raise ValueError(f"Equalize*({k}) needs 2 <= k <= {len(pieces)}")
    vals = _values(m, pieces, agent, log)
    if log is not None:
        log.add(agent, EQUALIZE_STAR)
    order = ranked(pieces, vals)
    target = vals[order[k - 1]]
    marks = tuple((pieces[i].id, (target,)) for i in order[: k - 1] if vals[i] > target)
    if log is not None:
        log.add(agent, MARK, len(marks))
    return CutPlan(agent, EQUALIZE_STAR, k, target, marks)


@dataclass(frozen=True)
class Applied:
    pieces: list[Piece]       # new table, left-to-right replacement order
    equalized: list[int]      # ids of pieces valued exactly l* by the cutter after the cut
    leftovers: list[Piece]    # fragments that are not l*-sized (reserve for Equalize*)
    created: list[Piece]      # every fresh piece (sub-pieces and leftovers)
    cut: list[int]            # ids of pre-existing pieces that were cut


def apply_plan(plan: CutPlan, m: ValueMeasure, pieces: Sequence[Piece],
               new_id: Callable[[], int], mark_new: bool = True) -> Applied:
    """Physically cut the table according to ``plan``.

    Each cut piece is split at its marks; the leftmost fragment keeps the
    piece identity. For Equalize* the leftover fragments leave the table.
    """
    marks = dict(plan.marks)
    table: list[Piece] = []
    equalized: list[int] = []
    leftovers: list[Piece] = []
    created: list[Piece] = []
    for p in pieces:
        if p.id not in marks:
            table.append(p)
            if plan.l_star and m.value(p) == plan.l_star:
                equalized.append(p.id)
            continue
        rest = p.intervals
        frags = []
        consumed = ZERO
        for target in marks[p.id]:
            head, rest = split_at(rest, m.mark(rest, target - consumed))
            consumed = target
            frags.append(head)
        frags.append(rest)
        first = p.evolve(intervals=frags[0], last_cutter=plan.cutter)
        table.append(first)
        equalized.append(first.id)
        tail = frags[1:]
        for j, cells in enumerate(tail):
            q = Piece(cells, id=new_id(), origin=p.origin, last_cutter=plan.cutter, is_new=mark_new)
            created.append(q)
            is_full = plan.kind == EQUALIZE and m.value(cells) == plan.l_star
            if is_full:
                table.append(q)
                equalized.append(q.id)
            elif plan.kind == EQUALIZE_STAR:
                leftovers.append(q)
            else:
                table.append(q)
                leftovers.append(q)
    return Applied(table, equalized, leftovers, created, list(marks))
