"""Disconnected envy-free division by repeatedly dividing the remainder.

``weak_reduction`` rotates the VIP over all agents (each run on what is left),
``strong_reduction`` keeps one VIP and repeats until its share is within
``1 - epsilon`` of proportional.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .allocation import Allocation, combine, make_allocation
from .bounds import strong_rounds
from .connected import divide_4_connected, divide_n_connected
from .errors import ContradictionError
from .measure import Cells, FULL_CAKE, ValueMeasure, difference, union
from .queries import QueryLog

EfvipRoutine = Callable[..., Allocation]   # (measures, vip, cake=..., log=...) -> Allocation


@dataclass(frozen=True)
class RoundTrace:
    t: int
    vip: int
    C_prime_t: Cells                   # cake allocated in this round
    V_t: tuple[Fraction, ...]          # cumulative value per agent
    V_prime_t: tuple[Fraction, ...]    # value gained this round per agent

    def line(self) -> str:
        gains = " ".join(str(v) for v in self.V_prime_t)
        return f"round {self.t} vip={self.vip} gains=[{gains}]"


def _empty(measures, n) -> Allocation:
    return make_allocation(measures, [()] * n, (), QueryLog(), 0)


def _run_rounds(measures: Sequence[ValueMeasure], cake: Cells, vips: Sequence[int],
                routine: EfvipRoutine, log: QueryLog, stop: Callable[[Cells, int], bool]):
    n = len(measures)
    parts: list[Allocation] = []
    traces: list[RoundTrace] = []
    remainder = cake
    held = [Fraction(0)] * n
    for t, vip in enumerate(vips, start=1):
        if stop(remainder, vip):
            continue
        part = routine(measures, vip, cake=remainder, log=log)
        if not part.is_envy_free():
            raise ContradictionError(f"round {t} produced envy")
        parts.append(part)
        gained = tuple(part.values())
        held = [h + g for h, g in zip(held, gained)]
        taken = union(*part.bundles)
        traces.append(RoundTrace(t, vip, taken, tuple(held), gained))
        remainder = difference(remainder, taken)
    return parts, traces, remainder


def weak_reduction(measures: Sequence[ValueMeasure], efvip: EfvipRoutine = divide_4_connected,
                   cake: Cells = FULL_CAKE, log: QueryLog | None = None) -> Allocation:
    """Run an EFVIP routine n times on successive remainders, VIP in index order."""
    n = len(measures)
    log = log or QueryLog()

    def stop(rem, vip):
        # an empty remainder, or one the VIP does not want, cannot lower its share
        return not rem or measures[vip].value(rem) == 0

    parts, traces, _ = _run_rounds(measures, cake, range(n), efvip, log, stop)
    if not parts:
        return _empty(measures, n)
    alloc = combine(measures, parts, cake, log, [tr.line() for tr in traces], rounds=traces)
    return alloc


def strong_reduction(measures: Sequence[ValueMeasure], vip: int = 0, epsilon: Fraction = Fraction(1, 10),
                     cake: Cells = FULL_CAKE, log: QueryLog | None = None,
                     efvip: EfvipRoutine = divide_n_connected, m: int | None = None) -> Allocation:
    """Repeat an EFVIP(n, M) routine with a fixed VIP on the remainder, t* times.

    The per-round claims are checked exactly against the VIP's value of ``cake``.
    """
    n = len(measures)
    epsilon = Fraction(epsilon)
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie strictly between 0 and 1")
    if m is None:
        m = 2 ** (n - 2) + 1 if n > 3 else n
    t_star = strong_rounds(n, epsilon, m)
    log = log or QueryLog()
    total = measures[vip].value(cake)

    def stop(rem, _vip):
        return not rem or measures[vip].value(rem) == 0

    parts, traces, _ = _run_rounds(measures, cake, [vip] * t_star, efvip, log, stop)
    prev = Fraction(0)
    for tr in traces:
        gain, now = tr.V_prime_t[vip], tr.V_t[vip]
        if gain < (total - n * prev) / m:
            raise ContradictionError(f"round {tr.t}: VIP gain {gain} below (1 - n V_(t-1)) / M")
        if now < total * (1 - (1 - Fraction(n, m)) ** tr.t) / n:
            raise ContradictionError(f"round {tr.t}: VIP total {now} below the geometric bound")
        prev = now
    if not parts:
        alloc = _empty(measures, n)
    else:
        alloc = combine(measures, parts, cake, log, [tr.line() for tr in traces])
    alloc.info.update(rounds=traces, t_star=t_star, M=m, vip=vip, epsilon=epsilon)
    return alloc


def divide_n_disconnected(measures: Sequence[ValueMeasure], epsilon: Fraction = Fraction(1, 10),
                          cake: Cells = FULL_CAKE, log: QueryLog | None = None) -> Allocation:
    """Weak reduction whose inner routine is the strong reduction: EF and >= (1-eps)/n each."""
    epsilon = Fraction(epsilon)
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie strictly between 0 and 1")

    runs: dict[int, list[str]] = {}

    def inner(ms, vip, cake, log):
        part = strong_reduction(ms, vip, epsilon, cake=cake, log=log)
        runs[vip] = [f"  inner {line}" for line in part.trace]
        return part

    alloc = weak_reduction(measures, inner, cake, log)
    trace = []
    for tr in alloc.info.get("rounds", []):
        trace.append(tr.line())
        trace += runs.get(tr.vip, [])
    alloc.trace = trace
    alloc.info.update(epsilon=epsilon, inner_runs=sum(map(len, runs.values())))
    return alloc


def divide_4_disconnected(measures: Sequence[ValueMeasure], cake: Cells = FULL_CAKE,
                          log: QueryLog | None = None) -> Allocation:
    if len(measures) != 4:
        raise ValueError("needs exactly 4 agents")
    return weak_reduction(measures, divide_4_connected, cake, log)
