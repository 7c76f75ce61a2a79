"""Round-count formulas involving logarithms, evaluated with outward rounding.

A logarithm of a rational is irrational, so these ceilings are computed on an
interval enclosure and the ceiling of its upper end is returned (an extra round
never breaks a guarantee, a missing one can).
"""
from __future__ import annotations

from fractions import Fraction

import mpmath
from mpmath import iv

PREC = 128


def _iv(q: Fraction):
    q = Fraction(q)
    return iv.mpf(q.numerator) / iv.mpf(q.denominator)


def _ceil_of(expr) -> int:
    saved = iv.prec
    iv.prec = PREC
    try:
        x = expr()
        return int(mpmath.ceil(x.b))
    finally:
        iv.prec = saved


def ceil_log_ratio(num: Fraction, den: Fraction, scale: Fraction = Fraction(1)) -> int:
    """ceil(scale * ln(num) / ln(den)) for num >= 1, den > 1."""
    num, den = Fraction(num), Fraction(den)
    if num < 1 or den <= 1:
        raise ValueError("need num >= 1 and den > 1")
    if num == 1:
        return 0
    up = max(0, _ceil_of(lambda: _iv(scale) * iv.log(_iv(num)) / iv.log(_iv(den))))
    # the enclosure may straddle an exact integer ratio: num == den**(up-1)
    if scale == 1 and up >= 1 and num == den ** (up - 1):
        return up - 1
    return up


def strong_rounds(n: int, epsilon: Fraction, m: int | None = None) -> int:
    """ceil(M * ln(1/eps) / n), with M = 2^(n-2)+1 unless given."""
    epsilon = Fraction(epsilon)
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie strictly between 0 and 1")
    if m is None:
        m = 2 ** (n - 2) + 1
    return max(1, _ceil_of(lambda: iv.mpf(m) * iv.log(1 / _iv(epsilon)) / iv.mpf(n)))


def promotion_rounds(n: int, k: int) -> int:
    """ceil(ln k / ln(n/(n-1))): rounds that turn k-domination into full domination."""
    if k <= 1:
        return 0
    return ceil_log_ratio(Fraction(k), Fraction(n, n - 1))
