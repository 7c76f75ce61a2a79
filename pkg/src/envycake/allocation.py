"""Allocation results and the post-hoc checks run against the true measures."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .measure import Cells, ValueMeasure, difference, normalize_cells, union
from .queries import QueryLog


@dataclass
class Allocation:
    bundles: tuple[Cells, ...]            # agent index -> its (possibly disconnected) share
    remainder: Cells                      # disposed / unallocated part of the divided cake
    envy: tuple[tuple[Fraction, ...], ...]  # envy[i][j] = V_i(bundle_j)
    log: QueryLog
    piece_count: int
    cake: Cells
    trace: list[str] = field(default_factory=list)
    info: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.bundles)

    def value(self, agent: int) -> Fraction:
        return self.envy[agent][agent]

    def values(self) -> list[Fraction]:
        return [self.envy[i][i] for i in range(self.n)]

    def is_envy_free(self) -> bool:
        return all(self.envy[i][i] >= self.envy[i][j] for i in range(self.n) for j in range(self.n))

    def is_connected(self) -> bool:
        return all(len(b) <= 1 for b in self.bundles)

    def min_value(self) -> Fraction:
        return min(self.values())


def envy_matrix(measures: Sequence[ValueMeasure], bundles: Sequence[Cells]) -> tuple[tuple[Fraction, ...], ...]:
    return tuple(tuple(m.value(b) for b in bundles) for m in measures)


def check_disjoint(bundles: Sequence[Cells]) -> None:
    cells = sorted(iv for b in bundles for iv in b)
    for (_, hi), (lo, _) in zip(cells, cells[1:]):
        if lo < hi:
            raise AssertionError("allocated pieces overlap")


def make_allocation(measures: Sequence[ValueMeasure], bundles: Sequence[Cells], cake: Cells,
                    log: QueryLog, piece_count: int, trace: list[str] | None = None,
                    **info) -> Allocation:
    bundles = tuple(normalize_cells(b) for b in bundles)
    check_disjoint(bundles)
    remainder = difference(cake, union(*bundles))
    return Allocation(bundles, remainder, envy_matrix(measures, bundles), log, piece_count,
                      normalize_cells(cake), list(trace or []), dict(info))


def combine(measures: Sequence[ValueMeasure], parts: Sequence[Allocation], cake: Cells,
            log: QueryLog, trace: list[str] | None = None, **info) -> Allocation:
    """Concatenate per-round allocations agent by agent."""
    n = len(measures)
    bundles = [union(*(p.bundles[i] for p in parts)) for i in range(n)]
    count = sum(p.piece_count for p in parts)
    return make_allocation(measures, bundles, cake, log, count, trace, **info)
