"""Group-theoretic and toric data of the orbifold target from (r, m, s, f).

The finite abelian group G sits inside the torus of SL(3, C); everything
about it is encoded by four integers.  Elements are indexed by
(j, l) in Z_r x Z_m through eta_1^j eta_2^l, characters by the dual pairing
chi_1^j chi_2^l.  Roots of unity are stored as exact fractions of a turn so
the group law and character orthogonality hold exactly; complex values are
rendered only on demand.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ValidationError
from .exact import frac_part
from .numerics import Context, DOUBLE


@dataclass(frozen=True)
class OrbifoldInput:
    r: int
    m: int
    s: int
    f: int

    def validate(self) -> None:
        if not (isinstance(self.r, int) and self.r >= 1):
            raise ValidationError(f"r must be a positive integer, got {self.r!r}")
        if not (isinstance(self.m, int) and self.m >= 1):
            raise ValidationError(f"m must be a positive integer, got {self.m!r}")
        if not (isinstance(self.s, int) and 0 <= self.s < self.r):
            raise ValidationError(f"s must lie in [0, r), got {self.s!r}")
        if not (isinstance(self.f, int) and self.f >= 1):
            raise ValidationError(f"f must be a positive integer, got {self.f!r}")


@dataclass(frozen=True)
class GroupElement:
    j: int
    l: int
    c: tuple[Fraction, Fraction, Fraction]
    age: int

    @property
    def index(self) -> tuple[int, int]:
        return (self.j, self.l)


@dataclass(frozen=True)
class Age1Element:
    a: int          # 1-based position in the tau ordering
    j: int
    l: int
    m_a: int
    n_a: int


@dataclass(frozen=True)
class OrbifoldData:
    input: OrbifoldInput
    order: int
    w: tuple[Fraction, Fraction, Fraction]
    elements: tuple[GroupElement, ...]
    age1: tuple[Age1Element, ...]
    genus: int      # number of age-2 elements
    p: int          # number of age-1 elements
    punctures: int  # p - genus + 3
    _by_index: dict = field(repr=False, hash=False, compare=False, default_factory=dict)

    # -- indexing ------------------------------------------------------

    @property
    def r(self) -> int:
        return self.input.r

    @property
    def m(self) -> int:
        return self.input.m

    @property
    def f(self) -> int:
        return self.input.f

    @property
    def s(self) -> int:
        return self.input.s

    def element(self, j: int, l: int) -> GroupElement:
        key = (j % self.r, l % self.m)
        try:
            return self._by_index[key]
        except KeyError:
            raise ValidationError(f"element index {key} out of range") from None

    def character_indices(self) -> list[tuple[int, int]]:
        return [(j, l) for j in range(self.r) for l in range(self.m)]

    def inverse(self, h: GroupElement) -> GroupElement:
        return self.element(-h.j, -h.l)

    # -- characters ------------------------------------------------------

    def character_turn(self, alpha: tuple[int, int], h: GroupElement) -> Fraction:
        """Exact fraction of a turn t with chi_alpha(h) = exp(2*pi*i*t).

        chi_alpha = chi_1^j' chi_2^l' evaluates on h through the fractional
        coordinates: chi_1(h) = e(c_1(h)), chi_2(h) = e(c_2(h)).
        """
        jp, lp = alpha
        if not (0 <= jp < self.r and 0 <= lp < self.m):
            raise ValidationError(f"character index {alpha} out of range")
        return frac_part(jp * h.c[0] + lp * h.c[1])

    def character_value(self, alpha: tuple[int, int], h: GroupElement, ctx: Context = DOUBLE):
        return ctx.cis(self.character_turn(alpha, h))

    # -- winding elements --------------------------------------------------

    def element_of_winding(self, d0: int, k: int) -> GroupElement:
        """h(d0, k) = eta_1^{d0} eta_2^{-k} for d0 >= 1, 0 <= k < m."""
        if d0 <= 0:
            raise ValidationError(f"winding d0 must be >= 1, got {d0}")
        if not (0 <= k < self.m):
            raise ValidationError(f"class index k must lie in [0, m), got {k}")
        w1, w2, w3 = self.w
        c1 = frac_part(d0 * w1)
        c2 = frac_part(d0 * w2 - Fraction(k, self.m))
        c3 = frac_part(d0 * w3 + Fraction(k, self.m))
        j = d0 % self.r
        # solve l/m = c2 - j*w2 (mod 1)
        l_frac = frac_part(c2 - j * w2) * self.m
        assert l_frac.denominator == 1
        return self.element(j, int(l_frac))

    # -- serialization ----------------------------------------------------

    def to_json_dict(self) -> dict:
        inp = self.input
        return {
            "r": inp.r,
            "m": inp.m,
            "s": inp.s,
            "f": inp.f,
            "order": self.order,
            "w": [f"{wi.numerator}/{wi.denominator}" for wi in self.w],
            "elements": [
                {
                    "j": h.j,
                    "l": h.l,
                    "c": [f"{ci.numerator}/{ci.denominator}" for ci in h.c],
                    "age": h.age,
                }
                for h in self.elements
            ],
            "age1": [
                {"a": e.a, "j": e.j, "l": e.l, "m_a": e.m_a, "n_a": e.n_a}
                for e in self.age1
            ],
            "genus": self.genus,
            "p": self.p,
            "punctures": self.punctures,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())


def build_orbifold(inp: OrbifoldInput) -> OrbifoldData:
    """Populate all derived data, enumerating G as eta_1^j eta_2^l."""
    inp.validate()
    r, m, s, f = inp.r, inp.m, inp.s, inp.f
    w1 = Fraction(1, r)
    w2 = Fraction(s + r * f, r * m)
    w3 = -w1 - w2

    elements = []
    by_index = {}
    for j in range(r):
        for l in range(m):
            c1 = frac_part(j * w1)
            c2 = frac_part(j * w2 + Fraction(l, m))
            c3 = frac_part(j * w3 - Fraction(l, m))
            age = c1 + c2 + c3
            assert age.denominator == 1
            h = GroupElement(j=j, l=l, c=(c1, c2, c3), age=int(age))
            elements.append(h)
            by_index[(j, l)] = h

    age1 = []
    a = 0
    for h in elements:  # already lexicographic in (j, l)
        if h.age == 1:
            a += 1
            m_a = r * h.c[0]
            n_a = -s * h.c[0] + m * h.c[1]
            assert m_a.denominator == 1 and n_a.denominator == 1
            age1.append(Age1Element(a=a, j=h.j, l=h.l, m_a=int(m_a), n_a=int(n_a)))

    p = len(age1)
    genus = sum(1 for h in elements if h.age == 2)
    data = OrbifoldData(
        input=inp,
        order=r * m,
        w=(w1, w2, w3),
        elements=tuple(elements),
        age1=tuple(age1),
        genus=genus,
        p=p,
        punctures=p - genus + 3,
    )
    data._by_index.update(by_index)
    return data


# -- Chen-Ruan class-basis change -------------------------------------------


def class_dft(values, m: int, ctx: Context = DOUBLE) -> list:
    """Apply the symmetric matrix M[l,k] = (1/m) * omega_m^{-k*l}.

    This is the discrete-Fourier change between the twisted-sector basis
    1'_{k/m} and the idempotent basis psi_l; M is an involution up to the
    inverse below (M^{-1}[k,l] = omega_m^{+k*l}).
    """
    if len(values) != m:
        raise ValidationError(f"expected a vector of length {m}, got {len(values)}")
    out = []
    for l in range(m):
        acc = 0
        for k, v in enumerate(values):
            acc += v * ctx.cis(Fraction(-k * l, m))
        out.append(acc / m)
    return out


def class_dft_inv(values, m: int, ctx: Context = DOUBLE) -> list:
    """Inverse of :func:`class_dft` (entries omega_m^{+k*l}, no 1/m)."""
    if len(values) != m:
        raise ValidationError(f"expected a vector of length {m}, got {len(values)}")
    out = []
    for k in range(m):
        acc = 0
        for l, v in enumerate(values):
            acc += v * ctx.cis(Fraction(k * l, m))
        out.append(acc)
    return out
