from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement

import pytest

from mirrorgw.errors import ValidationError
from mirrorgw.exact import double_factorial
from mirrorgw.psi import psi_intersection


# Reference values frozen from the Witten-Kontsevich literature.
TABLE = {
    (0, (0, 0, 0)): Fraction(1),
    (0, (1, 0, 0, 0)): Fraction(1),
    (0, (1, 1, 0, 0, 0)): Fraction(2),
    (0, (2, 0, 0, 0, 0)): Fraction(1),
    (1, (1,)): Fraction(1, 24),
    (1, (2, 0)): Fraction(1, 24),
    (1, (1, 1)): Fraction(1, 24),
    (1, (3, 0, 0)): Fraction(1, 24),
    (1, (2, 1, 0)): Fraction(1, 12),
    (1, (1, 1, 1)): Fraction(1, 12),
    (2, (4,)): Fraction(1, 1152),
    (2, (5, 0)): Fraction(1, 1152),
    (2, (4, 1)): Fraction(1, 384),
    (2, (3, 2)): Fraction(29, 5760),
    (3, (7,)): Fraction(1, 82944),
    (3, (7, 1)): Fraction(5, 82944),
    (3, (6, 2)): Fraction(77, 414720),
    (3, (5, 3)): Fraction(503, 1451520),
    (3, (4, 4)): Fraction(607, 1451520),
}


def test_frozen_table():
    for (g, ks), expected in TABLE.items():
        assert psi_intersection(g, ks) == expected


def test_dimension_constraint():
    assert psi_intersection(2, (0, 0, 5)) == 0
    assert psi_intersection(1, (2,)) == 0


def test_symmetry():
    assert psi_intersection(2, (3, 2)) == psi_intersection(2, (2, 3))
    assert psi_intersection(0, (0, 1, 0, 0)) == psi_intersection(0, (0, 0, 0, 1))


def test_unstable_rejected():
    with pytest.raises(ValidationError):
        psi_intersection(0, (0,))
    with pytest.raises(ValidationError):
        psi_intersection(0, (0, 0))


def test_genus_zero_closed_form():
    # <tau_{k_1}...tau_{k_n}>_0 = (n-3)! / prod k_i!
    import math
    for n in range(3, 8):
        for ks in combinations_with_replacement(range(n - 2), n):
            if sum(ks) != n - 3:
                continue
            expect = Fraction(math.factorial(n - 3))
            for k in ks:
                expect /= math.factorial(k)
            assert psi_intersection(0, ks) == expect


def test_one_point_all_genus():
    # <tau_{3g-2}>_g = 1 / (24^g g!)
    import math
    for g in range(1, 5):
        expect = Fraction(1, 24 ** g * math.factorial(g))
        assert psi_intersection(g, (3 * g - 2,)) == expect


# -- independent slow oracle: classical recursion in the bare normalization --


@lru_cache(maxsize=None)
def oracle(g: int, ks: tuple) -> Fraction:
    ks = tuple(sorted(ks))
    n = len(ks)
    if g < 0 or any(k < 0 for k in ks) or 2 * g - 2 + n <= 0:
        return Fraction(0)
    if sum(ks) != 3 * g - 3 + n:
        return Fraction(0)
    if (g, ks) == (0, (0, 0, 0)):
        return Fraction(1)
    if (g, ks) == (1, (1,)):
        return Fraction(1, 24)
    k = ks[-1]       # recurse on the largest entry
    rest = ks[:-1]
    if k == 0:
        return Fraction(0)  # unreachable on-shell except the bases above
    acc = Fraction(0)
    for j, dj in enumerate(rest):
        others = rest[:j] + rest[j + 1:]
        acc += Fraction(double_factorial(2 * (k + dj) - 1),
                        double_factorial(2 * dj - 1)) * oracle(g, others + (k + dj - 1,))
    for a in range(k - 1):
        b = k - 2 - a
        w = Fraction(double_factorial(2 * a + 1) * double_factorial(2 * b + 1), 2)
        acc += w * oracle(g - 1, rest + (a, b))
        for g1 in range(g + 1):
            for bits in range(1 << len(rest)):
                left = tuple(rest[i] for i in range(len(rest)) if bits >> i & 1)
                right = tuple(rest[i] for i in range(len(rest)) if not bits >> i & 1)
                t1 = oracle(g1, left + (a,))
                if t1 == 0:
                    continue
                acc += w * t1 * oracle(g - g1, right + (b,))
    return acc / double_factorial(2 * k + 1)


def test_against_slow_oracle():
    for g in range(0, 4):
        for n in range(1, 6):
            if 2 * g - 2 + n <= 0:
                continue
            dim = 3 * g - 3 + n
            for ks in combinations_with_replacement(range(dim + 1), n):
                if sum(ks) != dim:
                    continue
                assert psi_intersection(g, ks) == oracle(g, ks), (g, ks)
