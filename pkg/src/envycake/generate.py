"""Random rational instances for tests and benchmarks."""
from __future__ import annotations

import random
from fractions import Fraction

from .measure import ValueMeasure


def random_measure(rng: random.Random, max_segments: int = 8, denom: int = 60,
                   allow_zero: bool = False) -> ValueMeasure:
    """Piecewise-constant measure with at most ``max_segments`` segments, normalized."""
    k = rng.randint(1, max_segments)
    cuts = sorted(rng.sample(range(1, denom), k - 1))
    bps = [Fraction(0)] + [Fraction(c, denom) for c in cuts] + [Fraction(1)]
    lo = 0 if allow_zero else 1
    vals = [rng.randint(lo, 20) for _ in range(k)]
    if not any(vals):
        vals[rng.randrange(k)] = 1
    return ValueMeasure.from_values(bps, vals).normalized()


def random_profile(rng: random.Random, n: int, **kw) -> list[ValueMeasure]:
    return [random_measure(rng, **kw) for _ in range(n)]
