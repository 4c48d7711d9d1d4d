"""Shared numeric helpers: explicit-base logarithms, binomial sums, floors.

Every formula in this package uses base-2 logarithms except the covering
lemma's natural log; there are no bare `log` calls anywhere, each call site
names its base through these helpers.
"""

from __future__ import annotations

import math
from fractions import Fraction

import mpmath as mp

from .errors import InvalidParameterError


def log2f(x: float) -> float:
    return math.log2(x)


def lnf(x: float) -> float:
    return math.log(x)


def log2mp(x) -> mp.mpf:
    """Base-2 log at the current mpmath working precision."""
    return mp.log(x) / mp.log(2)


def lnmp(x) -> mp.mpf:
    return mp.log(x)


def binom_sum_leq(n: int, k: int) -> int:
    """Exact sum_{i=0..min(k,n)} C(n, i); 0 when k < 0."""
    if k < 0:
        return 0
    return sum(math.comb(n, i) for i in range(min(k, n) + 1))


def floor_exact(x) -> int:
    """Floor for int/Fraction without any float round-trip."""
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return x.numerator // x.denominator
    return math.floor(x)


def ceil_exact(x) -> int:
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return -((-x.numerator) // x.denominator)
    return math.ceil(x)


def floor_log2_power(base: int, exponent: int) -> int:
    """floor(exponent * log2(base)) computed exactly via big integers."""
    if base < 2 or exponent < 0:
        raise InvalidParameterError("need base >= 2 and exponent >= 0")
    if exponent == 0:
        return 0
    return (base**exponent).bit_length() - 1


def as_fraction(x) -> Fraction:
    """Exact Fraction view of an int, Fraction, float, or 'p/q' string."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(*x.as_integer_ratio())
    if isinstance(x, str):
        return Fraction(x)
    raise InvalidParameterError(f"cannot interpret {x!r} as an exact rational")


def format_fraction(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)
