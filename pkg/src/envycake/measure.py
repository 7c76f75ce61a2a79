"""Exact value measures over the unit-interval cake.

A measure is a piecewise-constant density with rational breakpoints, so every
eval and every mark answer is an exact :class:`~fractions.Fraction`.  Pieces
are finite unions of disjoint intervals; the functions here never mutate them.
"""
from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Sequence, Union

Interval = tuple[Fraction, Fraction]
Cells = tuple[Interval, ...]

ZERO = Fraction(0)
ONE = Fraction(1)


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("floats are not accepted; pass int, str or Fraction")
    return Fraction(x)


def normalize_cells(intervals: Iterable[Sequence]) -> Cells:
    """Sort, merge touching intervals and drop zero-length ones."""
    items = sorted((as_fraction(lo), as_fraction(hi)) for lo, hi in intervals)
    out: list[list[Fraction]] = []
    for lo, hi in items:
        if hi < lo:
            raise ValueError(f"interval with hi < lo: [{lo}, {hi}]")
        if hi == lo:
            continue
        if out and lo <= out[-1][1]:
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return tuple((lo, hi) for lo, hi in out)


@dataclass(frozen=True)
class Piece:
    """A finite union of disjoint intervals plus its lineage.

    ``id`` survives trimming: the part that keeps the left end of a trimmed
    piece inherits the identity, every other fragment is a fresh piece.
    """

    intervals: Cells
    id: int = 0
    origin: int = 0
    last_cutter: int | None = None
    is_new: bool = False

    @property
    def length(self) -> Fraction:
        return sum((hi - lo for lo, hi in self.intervals), ZERO)

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    @property
    def is_connected(self) -> bool:
        return len(self.intervals) <= 1

    @property
    def left(self) -> Fraction:
        return self.intervals[0][0]

    @property
    def right(self) -> Fraction:
        return self.intervals[-1][1]

    def evolve(self, **changes) -> "Piece":
        return replace(self, **changes)


PieceLike = Union[Piece, Sequence[Interval]]


def cells_of(p: PieceLike) -> Cells:
    if isinstance(p, Piece):
        return p.intervals
    return normalize_cells(p)


def union(*parts: PieceLike) -> Cells:
    return normalize_cells(iv for p in parts for iv in cells_of(p))


def difference(a: PieceLike, b: PieceLike) -> Cells:
    """Point-set difference ``a minus b`` (up to measure-zero endpoints)."""
    out: list[Interval] = []
    sub = cells_of(b)
    for lo, hi in cells_of(a):
        pieces = [(lo, hi)]
        for blo, bhi in sub:
            nxt = []
            for plo, phi in pieces:
                if bhi <= plo or blo >= phi:
                    nxt.append((plo, phi))
                    continue
                if plo < blo:
                    nxt.append((plo, blo))
                if bhi < phi:
                    nxt.append((bhi, phi))
            pieces = nxt
        out.extend(pieces)
    return normalize_cells(out)


def intersection_length(a: PieceLike, b: PieceLike) -> Fraction:
    total = ZERO
    for alo, ahi in cells_of(a):
        for blo, bhi in cells_of(b):
            lo, hi = max(alo, blo), min(ahi, bhi)
            if hi > lo:
                total += hi - lo
    return total


def split_at(p: PieceLike, x: Fraction) -> tuple[Cells, Cells]:
    """Split a piece at point ``x`` into (part left of x, part right of x)."""
    left: list[Interval] = []
    right: list[Interval] = []
    for lo, hi in cells_of(p):
        if hi <= x:
            left.append((lo, hi))
        elif lo >= x:
            right.append((lo, hi))
        else:
            left.append((lo, x))
            right.append((x, hi))
    return tuple(left), tuple(right)


@dataclass(frozen=True)
class ValueMeasure:
    """Piecewise-constant density on [0, 1].

    ``breakpoints`` is strictly increasing from 0 to 1; ``densities[j]`` is the
    density on ``[breakpoints[j], breakpoints[j+1])``.
    """

    breakpoints: tuple[Fraction, ...]
    densities: tuple[Fraction, ...]
    _cumulative: tuple[Fraction, ...] = field(init=False, repr=False, compare=False)
    _memo: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        bps = tuple(as_fraction(b) for b in self.breakpoints)
        dens = tuple(as_fraction(d) for d in self.densities)
        if len(bps) < 2 or bps[0] != 0 or bps[-1] != 1:
            raise ValueError("breakpoints must start at 0 and end at 1")
        if any(b2 <= b1 for b1, b2 in zip(bps, bps[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        if len(dens) != len(bps) - 1:
            raise ValueError("need exactly one density per segment")
        if any(d < 0 for d in dens):
            raise ValueError("densities must be nonnegative")
        cum = [ZERO]
        for j, d in enumerate(dens):
            cum.append(cum[-1] + d * (bps[j + 1] - bps[j]))
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "densities", dens)
        object.__setattr__(self, "_cumulative", tuple(cum))
        object.__setattr__(self, "_memo", {})

    @classmethod
    def uniform(cls) -> "ValueMeasure":
        return cls((ZERO, ONE), (ONE,))

    @classmethod
    def from_values(cls, breakpoints, segment_values) -> "ValueMeasure":
        """Build from the *value* of each segment instead of its density."""
        bps = [as_fraction(b) for b in breakpoints]
        dens = [as_fraction(v) / (b2 - b1) for v, b1, b2 in zip(segment_values, bps, bps[1:])]
        return cls(tuple(bps), tuple(dens))

    @property
    def total(self) -> Fraction:
        return self._cumulative[-1]

    def normalized(self) -> "ValueMeasure":
        t = self.total
        if t <= 0:
            raise ValueError("measure has zero total value")
        if t == 1:
            return self
        return ValueMeasure(self.breakpoints, tuple(d / t for d in self.densities))

    def cdf(self, x: Fraction) -> Fraction:
        """Value of ``[0, x]``."""
        if x <= 0:
            return ZERO
        if x >= 1:
            return self._cumulative[-1]
        j = bisect_right(self.breakpoints, x) - 1
        return self._cumulative[j] + self.densities[j] * (x - self.breakpoints[j])

    def value(self, p: PieceLike) -> Fraction:
        cells = cells_of(p)
        v = self._memo.get(cells)
        if v is None:
            v = sum((self.cdf(hi) - self.cdf(lo) for lo, hi in cells), ZERO)
            if len(self._memo) > 100_000:
                self._memo.clear()
            self._memo[cells] = v
        return v

    def _advance(self, lo: Fraction, hi: Fraction, need: Fraction) -> Fraction | None:
        """Leftmost y in (lo, hi] with value([lo, y]) == need > 0, else None."""
        j = bisect_right(self.breakpoints, lo) - 1
        pos = lo
        while pos < hi:
            seg_end = min(self.breakpoints[j + 1], hi)
            d = self.densities[j]
            got = d * (seg_end - pos)
            if d > 0 and got >= need:
                return pos + need / d
            need -= got
            pos = seg_end
            j += 1
        return None

    def mark(self, p: PieceLike, target) -> Fraction:
        """Leftmost point x with value(prefix of p up to x) == target."""
        target = as_fraction(target)
        if target < 0:
            raise ValueError("negative target")
        cells = cells_of(p)
        if target > self.value(cells):
            raise ValueError("insufficient value")
        if target == 0:
            return cells[0][0] if cells else ZERO
        remaining = target
        for lo, hi in cells:
            v = self.cdf(hi) - self.cdf(lo)
            if v >= remaining:
                x = self._advance(lo, hi, remaining)
                assert x is not None
                return x
            remaining -= v
        raise AssertionError("unreachable: value check above")  # pragma: no cover


def eval_piece(m: ValueMeasure, p: PieceLike) -> Fraction:
    return m.value(p)


def mark(m: ValueMeasure, p: PieceLike, target) -> Fraction:
    return m.mark(p, target)


def split_at_mark(m: ValueMeasure, p: PieceLike, target) -> tuple[Cells, Cells]:
    """(prefix worth exactly ``target``, suffix) of ``p`` under ``m``."""
    return split_at(p, m.mark(p, target))


FULL_CAKE: Cells = ((ZERO, ONE),)
