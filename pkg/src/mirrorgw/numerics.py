"""Precision contexts: double-precision scalars by default, mpmath scalars
in extended mode.

A :class:`Context` converts exact rationals to scalars and supplies the
transcendental functions plus the fixed branch conventions used throughout:

* negative rational base: ``b**c = |b|**c * exp(i*pi*c)`` (argument +pi),
* ``sqrt(w1*w2*w3) = i*sqrt(|w1*w2*w3|)`` (the product is negative),
* ``sqrt(-2) = i*sqrt(2)``.

Gamma values are evaluated at exact rational arguments.  Poles must be
excluded by the caller with :func:`mirrorgw.exact.is_nonpositive_integer`;
reciprocal-Gamma zero semantics live at the call sites.
"""

from __future__ import annotations

import cmath
import math
from fractions import Fraction

import mpmath


class Context:
    """Double-precision numeric context (complex/float scalars)."""

    name = "double"

    def real(self, x):
        """Exact rational (or int) to a real scalar."""
        return float(x)

    def gamma(self, x: Fraction):
        """Gamma at an exact rational argument (not a pole).

        Double mode delegates to the platform Lanczos-type implementation.
        Near-pole negative arguments (condition number above ~1e6) and
        arguments outside the overflow-safe range fall back to mpmath.
        """
        xf = float(x)
        if xf > 150.0:
            return float(mpmath.gamma(mpmath.mpf(x.numerator) / x.denominator))
        if xf < 0 and abs(xf - round(xf)) < 1e-6:
            return float(mpmath.gamma(mpmath.mpf(x.numerator) / x.denominator))
        return math.gamma(xf)

    def exp(self, z):
        return cmath.exp(z)

    def log_real(self, x):
        """log of a positive real scalar."""
        return math.log(x)

    def sqrt_pos(self, x):
        """Square root of a positive real scalar."""
        return math.sqrt(x)

    def sqrt_c(self, z):
        """Principal square root of a complex scalar."""
        return cmath.sqrt(z)

    def cis(self, turn: Fraction):
        """exp(2*pi*i*turn) for an exact fraction of a full turn."""
        t = float(turn)
        return cmath.exp(2j * cmath.pi * t)

    def cispi(self, q):
        """exp(i*pi*q) for a rational or real q."""
        return cmath.exp(1j * cmath.pi * float(q))

    @property
    def pi(self):
        return math.pi

    @property
    def i(self):
        return 1j

    def to_complex(self, z) -> complex:
        return complex(z)

    def abs(self, z) -> float:
        return abs(complex(z))

    # branch helpers ---------------------------------------------------

    def power_signed(self, base: Fraction, expo: Fraction):
        """base**expo with the fixed +pi branch for negative rational base."""
        base = Fraction(base)
        e = float(expo)
        if base > 0:
            return self.real(base) ** e
        if base == 0:
            return 0.0
        return (self.real(-base) ** e) * self.cispi(expo)

    def sqrt_signed(self, x: Fraction):
        """sqrt with i*sqrt(|x|) for negative rational x."""
        x = Fraction(x)
        if x >= 0:
            return self.sqrt_pos(self.real(x))
        return self.i * self.sqrt_pos(self.real(-x))


class ExtendedContext(Context):
    """mpmath-backed context with >= 128-bit significand."""

    name = "extended"

    def __init__(self, dps: int = 40):
        self.dps = dps
        self.mp = mpmath.mp.clone()
        self.mp.dps = dps

    def real(self, x):
        x = Fraction(x)
        return self.mp.mpf(x.numerator) / self.mp.mpf(x.denominator)

    def gamma(self, x: Fraction):
        return self.mp.gamma(self.real(x))

    def exp(self, z):
        return self.mp.exp(z)

    def log_real(self, x):
        return self.mp.log(x)

    def sqrt_pos(self, x):
        return self.mp.sqrt(x)

    def sqrt_c(self, z):
        return self.mp.sqrt(z)

    def cis(self, turn: Fraction):
        return self.exp(2 * self.i * self.pi * self.real(turn))

    def cispi(self, q):
        q = self.real(q) if isinstance(q, (Fraction, int)) else q
        return self.exp(self.i * self.pi * q)

    @property
    def pi(self):
        return self.mp.pi

    @property
    def i(self):
        return self.mp.mpc(0, 1)

    def to_complex(self, z) -> complex:
        return complex(z)

    def abs(self, z) -> float:
        return float(self.mp.fabs(z))

    def power_signed(self, base: Fraction, expo: Fraction):
        base = Fraction(base)
        e = self.real(expo)
        if base > 0:
            return self.real(base) ** e
        if base == 0:
            return self.real(0)
        return (self.real(-base) ** e) * self.cispi(expo)


DOUBLE = Context()


def make_context(precision: str = "double", dps: int = 40) -> Context:
    if precision == "double":
        return DOUBLE
    if precision == "extended":
        return ExtendedContext(dps=dps)
    raise ValueError(f"unknown precision mode {precision!r}")
