"""Exact psi-class intersection numbers <tau_{k_1} ... tau_{k_n}>_g.

Evaluation runs on the DVV/Virasoro coefficient recursion (the Airy-curve
specialization of the topological recursion) in exact rational arithmetic,
with string- and dilaton-equation fast paths.  Values feed every vertex
weight downstream, so denominators like 1/24 must never see a float.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

from .errors import ValidationError
from .exact import double_factorial


def _stable(g: int, n: int) -> bool:
    return 2 * g - 2 + n > 0


@lru_cache(maxsize=None)
def _airy_t(g: int, ds: tuple) -> Fraction:
    """Normalized correlator T_g(d) = 2^(g-1) <prod tau_d> prod (2d+1)!!/2^d.

    Recursion on the first leg; T vanishes off the dimension shell
    sum(d) = 3g - 3 + n and for unstable (g, n).
    """
    n = len(ds)
    if not _stable(g, n) or any(d < 0 for d in ds):
        return Fraction(0)
    if sum(ds) != 3 * g - 3 + n:
        return Fraction(0)
    if g == 0 and n == 3:
        return Fraction(1, 2)
    if g == 1 and n == 1:
        return Fraction(1, 16)

    d1 = ds[0]
    rest = ds[1:]
    acc = Fraction(0)
    # annihilation against another leg
    for j, dj in enumerate(rest):
        others = rest[:j] + rest[j + 1:]
        acc += Fraction(2 * dj + 1, 2) * _airy_t(g, tuple(sorted((d1 + dj - 1,) + others, reverse=True)))
    # splitting of the recursion leg
    for a in range(d1 - 1):
        b = d1 - 2 - a
        acc += Fraction(1, 4) * _airy_t(g - 1, tuple(sorted((a, b) + rest, reverse=True)))
        for g1 in range(g + 1):
            g2 = g - g1
            for bits in range(1 << len(rest)):
                left = tuple(rest[i] for i in range(len(rest)) if bits >> i & 1)
                right = tuple(rest[i] for i in range(len(rest)) if not bits >> i & 1)
                t1 = _airy_t(g1, tuple(sorted((a,) + left, reverse=True)))
                if t1 == 0:
                    continue
                t2 = _airy_t(g2, tuple(sorted((b,) + right, reverse=True)))
                acc += Fraction(1, 4) * t1 * t2
    return acc


@lru_cache(maxsize=None)
def psi_intersection(g: int, ks: tuple) -> Fraction:
    """<tau_{k_1} ... tau_{k_n}>_g as an exact rational.

    Zero off the dimension shell sum(ks) = 3g - 3 + n; raises for unstable
    (g, n).  Symmetric in ks.
    """
    ks = tuple(sorted(ks, reverse=True))
    n = len(ks)
    if g < 0 or n < 1 or any(k < 0 for k in ks):
        raise ValidationError(f"bad psi key (g={g}, ks={ks})")
    if not _stable(g, n):
        raise ValidationError(f"unstable moduli (g={g}, n={n})")
    if sum(ks) != 3 * g - 3 + n:
        return Fraction(0)
    if g == 0 and n == 3:
        return Fraction(1)
    if g == 1 and ks == (1,):
        return Fraction(1, 24)

    # string equation
    if ks[-1] == 0 and _stable(g, n - 1):
        return sum(
            (psi_intersection(g, ks[:j] + (ks[j] - 1,) + ks[j + 1:-1])
             for j in range(n - 1) if ks[j] >= 1),
            Fraction(0),
        )
    # dilaton equation
    if ks[-1] == 1 and _stable(g, n - 1):
        return (2 * g - 2 + n - 1) * psi_intersection(g, ks[:-1])

    t = _airy_t(g, ks)
    norm = Fraction(2) ** (g - 1)
    for k in ks:
        norm *= Fraction(double_factorial(2 * k + 1), 2 ** k)
    return t / norm
