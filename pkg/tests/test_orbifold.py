from fractions import Fraction

import pytest

from mirrorgw.errors import ValidationError
from mirrorgw.orbifold import (OrbifoldInput, build_orbifold, class_dft,
                               class_dft_inv)


def data(r, m, s, f):
    return build_orbifold(OrbifoldInput(r, m, s, f))


def test_trivial_group():
    d = data(1, 1, 0, 1)
    assert d.order == 1
    assert d.w == (Fraction(1), Fraction(1), Fraction(-2))
    assert (d.p, d.genus, d.punctures) == (0, 0, 3)


def test_z3_vertical():
    d = data(3, 1, 1, 1)
    assert d.order == 3
    ages = sorted(h.age for h in d.elements)
    assert ages == [0, 1, 2]
    assert (d.p, d.genus) == (1, 1)
    assert d.w == (Fraction(1, 3), Fraction(4, 3), Fraction(-5, 3))


def test_z3_gerby():
    d = data(1, 3, 0, 1)
    assert d.order == 3
    for k in (1, 2):
        h = d.element(0, k)
        assert h.c == (Fraction(0), Fraction(k, 3), Fraction(1) - Fraction(k, 3))
        assert h.age == 1
    assert (d.p, d.genus, d.punctures) == (2, 0, 5)
    assert 1 + d.p + d.genus == d.order


@pytest.mark.parametrize("bad", [
    dict(r=0, m=1, s=0, f=1),
    dict(r=1, m=0, s=0, f=1),
    dict(r=2, m=1, s=2, f=1),
    dict(r=1, m=1, s=0, f=0),
])
def test_validation(bad):
    with pytest.raises(ValidationError):
        build_orbifold(OrbifoldInput(**bad))


def test_character_values():
    d = data(3, 1, 1, 1)
    eta1 = d.element(1, 0)
    assert d.character_turn((1, 0), eta1) == Fraction(1, 3)
    val = d.character_value((1, 0), eta1)
    import cmath
    assert abs(val - cmath.exp(2j * cmath.pi / 3)) < 1e-15


def test_character_orthogonality_exact():
    d = data(3, 1, 1, 1)
    chars = d.character_indices()
    for a in chars:
        for b in chars:
            total = sum(d.character_value(a, d.inverse(h)) * d.character_value(b, h)
                        for h in d.elements)
            expected = d.order if a == b else 0
            assert abs(total - expected) < 1e-13


def test_character_group_law_exact():
    d = data(2, 2, 0, 1)
    for a in d.character_indices():
        for h in d.elements:
            for hp in d.elements:
                prod = d.element(h.j + hp.j, h.l + hp.l)
                lhs = d.character_turn(a, prod)
                rhs = d.character_turn(a, h) + d.character_turn(a, hp)
                assert (lhs - rhs) % 1 == 0


def test_element_of_winding():
    d = data(1, 3, 0, 1)
    h = d.element_of_winding(1, 0)
    assert h.c == (Fraction(0), Fraction(1, 3), Fraction(2, 3))
    d2 = data(3, 1, 1, 1)
    assert d2.element_of_winding(2, 0).age == 2
    triv = data(1, 1, 0, 1)
    assert triv.element_of_winding(5, 0) == triv.element(0, 0)
    with pytest.raises(ValidationError):
        d.element_of_winding(0, 0)


def test_winding_integrality():
    d = data(2, 2, 0, 1)
    w1, w2, _ = d.w
    for d0 in range(1, 7):
        for k in range(d.m):
            h = d.element_of_winding(d0, k)
            assert (d0 * w1 - h.c[0]).denominator == 1
            assert (d0 * w2 - Fraction(k, d.m) - h.c[1]).denominator == 1


def test_inverse_fractional_coordinates():
    # c_i(h) + c_i(h^-1) = 1 unless c_i(h) = 0
    for args in [(3, 1, 1, 1), (2, 2, 0, 1), (1, 3, 0, 1)]:
        d = data(*args)
        for h in d.elements:
            hi = d.inverse(h)
            for i in range(3):
                expected = 0 if h.c[i] == 0 else 1
                assert h.c[i] + hi.c[i] == expected


def test_box_lattice_labels():
    # (m_a, n_a, 1) = c1 b1 + c2 b2 + c3 b3 in the e-basis
    for args in [(3, 1, 1, 1), (2, 2, 0, 1), (2, 1, 0, 1)]:
        d = data(*args)
        r, m, s = d.r, d.m, d.s
        for e in d.age1:
            h = d.element(e.j, e.l)
            c1, c2, c3 = h.c
            assert e.m_a == r * c1
            assert e.n_a == -s * c1 + m * c2
            assert c1 + c2 + c3 == 1


def test_age_counts():
    for args in [(1, 1, 0, 1), (2, 1, 0, 1), (1, 2, 0, 1), (3, 1, 1, 1),
                 (2, 2, 0, 1), (1, 3, 0, 1)]:
        d = data(*args)
        ages = [h.age for h in d.elements]
        assert ages.count(0) == 1
        assert ages.count(1) == d.p
        assert ages.count(2) == d.genus
        assert 1 + d.p + d.genus == d.order


def test_class_dft_examples():
    assert class_dft([3.0], 1) == [3.0]
    out = class_dft([1.0, 0.0], 2)
    assert abs(out[0] - 0.5) < 1e-15 and abs(out[1] - 0.5) < 1e-15


def test_class_dft_roundtrip():
    vec = [0.3 + 0.1j, -1.2, 0.77 + 2j]
    back = class_dft_inv(class_dft(vec, 3), 3)
    assert max(abs(a - b) for a, b in zip(vec, back)) < 1e-14


def test_serialization_key_order():
    doc = data(2, 2, 0, 1).to_json_dict()
    assert list(doc) == ["r", "m", "s", "f", "order", "w", "elements",
                        "age1", "genus", "p", "punctures"]
