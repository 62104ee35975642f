"""Exact rational utilities: Bernoulli polynomials, double factorials,
fractional parts.

Everything here stays in ``fractions.Fraction`` / ``int``; floating point
enters only at the numeric boundary (see :mod:`mirrorgw.numerics`).
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import comb


@lru_cache(maxsize=None)
def bernoulli_number(n: int) -> Fraction:
    """B_n with the B_1 = -1/2 convention, computed by the defining recursion."""
    if n < 0:
        raise ValueError("Bernoulli index must be non-negative")
    if n == 0:
        return Fraction(1)
    # sum_{k=0}^{n} C(n+1, k) B_k = 0 for n >= 1
    acc = Fraction(0)
    for k in range(n):
        acc += comb(n + 1, k) * bernoulli_number(k)
    return -acc / (n + 1)


def bernoulli_poly(n: int, x: Fraction) -> Fraction:
    """B_n(x) = sum_k C(n,k) B_k x^(n-k), exact for rational x."""
    x = Fraction(x)
    acc = Fraction(0)
    for k in range(n + 1):
        acc += comb(n, k) * bernoulli_number(k) * x ** (n - k)
    return acc


def double_factorial(n: int) -> int:
    """(2d-1)!! style double factorial; (-1)!! = 1 by convention."""
    if n <= 0:
        return 1
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


def frac_part(x: Fraction) -> Fraction:
    """Fractional part {x} in [0, 1), exact."""
    x = Fraction(x)
    return x - (x.numerator // x.denominator)


def floor_frac(x: Fraction) -> int:
    """Exact floor of a rational."""
    x = Fraction(x)
    return x.numerator // x.denominator


def is_nonpositive_integer(x: Fraction) -> bool:
    """True when x is in {0, -1, -2, ...}; used for reciprocal-Gamma zeros."""
    x = Fraction(x)
    return x.denominator == 1 and x.numerator <= 0
