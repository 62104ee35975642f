import math

import pytest
from hypothesis import given, settings, strategies as st

from mirrorgw.errors import ValidationError
from mirrorgw.series import INF, TruncatedSeries, divide_by_z_plus_w, reversion


def univariate(coeffs, var="z", lo=0, hi=None):
    hi = hi if hi is not None else lo + len(coeffs) - 1
    return TruncatedSeries((var,), {var: (lo, hi)},
                           {(lo + i,): c for i, c in enumerate(coeffs)})


coeff = st.complex_numbers(min_magnitude=0, max_magnitude=4,
                           allow_nan=False, allow_infinity=False)
series_strategy = st.lists(coeff, min_size=1, max_size=7).map(univariate)


@settings(max_examples=60, deadline=None)
@given(series_strategy, series_strategy, series_strategy)
def test_ring_axioms(a, b, c):
    scale = _scale(a, b, c)
    assert _max_dev((a + b) * c, a * c + b * c) < 1e-14 * scale
    assert _max_dev((a * b) * c, a * (b * c)) < 1e-14 * scale
    assert _max_dev(a * b, b * a) < 1e-14 * scale


def _scale(*series):
    vals = [abs(v) for s in series for v in s.coeffs.values()]
    top = max(vals + [1.0])
    return (len(series) * top + 1.0) ** 3


def _max_dev(a, b):
    keys = set(a.coeffs) | set(b.coeffs)
    lo = max(a.window["z"][0], b.window["z"][0])
    his = [h for h in (a.window["z"][1], b.window["z"][1]) if h is not INF]
    hi = min(his) if his else None
    out = 0.0
    for k in keys:
        if k[0] < lo or (hi is not None and k[0] > hi):
            continue
        out = max(out, abs(a.coeffs.get(k, 0) - b.coeffs.get(k, 0)))
    return out


def test_exp_example():
    z = TruncatedSeries.variable("z", 3)
    e = z.exp()
    assert abs(e.coefficient((0,)) - 1) < 1e-15
    assert abs(e.coefficient((1,)) - 1) < 1e-15
    assert abs(e.coefficient((2,)) - 0.5) < 1e-15
    assert abs(e.coefficient((3,)) - 1 / 6) < 1e-15


def test_geometric_inverse():
    one_minus_z = univariate([1.0, -1.0], hi=5)
    inv = one_minus_z.invert_unit()
    prod = inv * one_minus_z
    assert abs(prod.coefficient((0,)) - 1) < 1e-15
    for k in range(1, 5):
        assert abs(prod.coefficient((k,))) < 1e-15


def test_exp_log_inverse_pair():
    s = univariate([0.0, 0.3, -0.2, 0.11, 0.05], hi=4)
    back = (s.exp() - 1.0).log1p()
    assert _max_dev(back, s) < 1e-14


def test_d_exp_property():
    s = univariate([0.0, 1.3, -0.4, 0.21], hi=3)
    e = s.exp()
    lhs = e.derivative("z")
    rhs = s.derivative("z") * e
    assert _max_dev(lhs, rhs) < 1e-13


def test_compose_against_convolution_oracle():
    # log(1+w) at w = z + z^2, order 3: brute-force convolution oracle
    inner = univariate([0.0, 1.0, 1.0], hi=3)
    outer = [0.0, 1.0, -0.5, 1.0 / 3.0]  # log(1+w) coefficients
    got = inner.compose_univariate(outer, "z")

    oracle = [0.0] * 4
    powers = {1: [0.0, 1.0, 1.0, 0.0]}
    powers[2] = _convolve(powers[1], powers[1])
    powers[3] = _convolve(powers[2], powers[1])
    for k in range(1, 4):
        for i in range(4):
            oracle[i] += outer[k] * powers[k][i]
    for i in range(4):
        assert abs(got.coefficient((i,)) - oracle[i]) < 1e-14


def _convolve(a, b):
    out = [0.0] * len(a)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            if i + j < len(out):
                out[i + j] += x * y
    return out


def test_residue():
    s = TruncatedSeries(("z",), {"z": (-2, 2)},
                        {(-1,): 1.0, (0,): 3.0, (1,): 1.0})
    assert s.residue("z") == 1.0
    s2 = TruncatedSeries(("z",), {"z": (-2, 2)}, {(-2,): 5.0})
    assert s2.residue("z") == 0
    zinv_exp = univariate([1.0, 1.0, 0.5, 1 / 6], hi=3).shift("z", -1)
    assert abs(zinv_exp.residue("z") - 1.0) < 1e-15


def test_reversion_examples():
    x = TruncatedSeries.variable("t", 6)
    assert _one_var_equal(reversion(x, "t", "X", 6), {(1,): 1.0})
    two_t = x.scaled(2.0)
    assert _one_var_equal(reversion(two_t, "t", "X", 6), {(1,): 0.5})

    s = univariate([0.0, 1.0, 1.0], var="t", hi=6)
    inv = reversion(s, "t", "X", 6)
    # t(X) = X - X^2 + 2X^3 - 5X^4 + ... (signed Catalan numbers)
    expect = [0.0, 1.0, -1.0, 2.0, -5.0, 14.0, -42.0]
    for k in range(1, 7):
        assert abs(inv.coefficient((k,)) - expect[k]) < 1e-11
    # recomposition returns the identity
    s_list = [0.0, 1.0, 1.0] + [0.0] * 5
    recomp = inv.compose_univariate(s_list, "X")
    assert abs(recomp.coefficient((1,)) - 1.0) < 1e-12
    for k in range(2, 7):
        assert abs(recomp.coefficient((k,))) < 1e-12


def test_reversion_rejects_degenerate():
    s = univariate([0.0, 0.0, 1.0], var="t", hi=4)
    with pytest.raises(ValidationError):
        reversion(s, "t", "X", 4)


def test_integrate_log():
    s = univariate([0.0, 0.0, 1.0], hi=4)  # z^2
    assert abs(s.integrate_log("z").coefficient((2,)) - 0.5) < 1e-15
    z = univariate([0.0, 1.0], hi=4)
    assert abs(z.integrate_log("z", times=2).coefficient((1,)) - 1.0) < 1e-15
    rnd = univariate([0.0, 0.7, -0.3, 2.2], hi=3)
    assert _max_dev(rnd.integrate_log("z").xdx("z"), rnd) < 1e-15
    bad = univariate([1.0, 1.0], hi=2)
    with pytest.raises(ValidationError):
        bad.integrate_log("z")


def test_divide_by_z_plus_w():
    # p = (z + w) * (1 + 2 z + 3 w + z w)
    q_true = {(0, 0): 1.0, (1, 0): 2.0, (0, 1): 3.0, (1, 1): 1.0}
    p = {}
    for (i, j), c in q_true.items():
        p[(i + 1, j)] = p.get((i + 1, j), 0) + c
        p[(i, j + 1)] = p.get((i, j + 1), 0) + c
    got = divide_by_z_plus_w(p, 1, 4)
    for key, val in q_true.items():
        assert abs(got[key] - val) < 1e-15


def test_window_soundness_laurent():
    # Laurent factor times a truncated series shrinks the window honestly
    a = TruncatedSeries(("z",), {"z": (-2, 8)}, {(-2,): 1.0})
    b = univariate([1.0] * 4, hi=3)
    prod = a * b
    assert prod.window["z"] == (-2, 1)


def _one_var_equal(series, coeffs, tol=1e-12):
    for k, v in coeffs.items():
        if abs(series.coefficient(k) - v) > tol:
            return False
    return True
