"""Closed-form hypergeometric flat coordinates tau_a(q) and their
inversion to finite total degree.

The lattice constraint {sum_b d_b c_i(h_b)} = 0 is tested in exact
rationals before any Gamma factor is evaluated; reciprocal-Gamma zeros are
exact.  Coefficients here use plain total-degree-truncated dictionaries
(the per-variable windows of TruncatedSeries are the wrong shape for this).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import ValidationError
from .exact import frac_part, is_nonpositive_integer
from .numerics import Context, DOUBLE
from .orbifold import OrbifoldData


def _multi_indices(p: int, total: int):
    if p == 0:
        if total >= 0:
            yield ()
        return

    def rec(left, parts):
        if parts == 1:
            for v in range(left + 1):
                yield (v,)
            return
        for v in range(left + 1):
            for tail in rec(left - v, parts - 1):
                yield (v,) + tail

    yield from rec(total, p)


def _mul(a: dict, b: dict, degree: int) -> dict:
    out: dict = {}
    for ka, va in a.items():
        for kb, vb in b.items():
            key = tuple(x + y for x, y in zip(ka, kb))
            if sum(key) > degree:
                continue
            out[key] = out.get(key, 0) + va * vb
    return out


def _compose(series: dict, args: list, degree: int, p: int) -> dict:
    """series(q) with q_b replaced by args[b], truncated by total degree."""
    out: dict = {}
    power_cache: dict = {}

    def power(b, e):
        if e == 0:
            return {tuple([0] * p): 1.0}
        key = (b, e)
        if key not in power_cache:
            power_cache[key] = _mul(power(b, e - 1), args[b], degree)
        return power_cache[key]

    for expo, coef in series.items():
        term = {tuple([0] * p): coef}
        for b, e in enumerate(expo):
            if e:
                term = _mul(term, power(b, e), degree)
        for k, v in term.items():
            out[k] = out.get(k, 0) + v
    return {k: v for k, v in out.items() if v != 0}


@dataclass
class MirrorMapSeries:
    p: int
    degree: int
    forward: list    # forward[a] = {q multi-index: coeff} for tau_a(q)
    inverse: list    # inverse[a] = {tau multi-index: coeff} for q_a(tau)


def constraint_indices(data: OrbifoldData, max_total: int) -> list:
    """Multi-indices d with {sum_b d_b c_i(h_b)} = 0 for i = 1, 2, 3."""
    h_list = [data.element(e.j, e.l) for e in data.age1]
    out = []
    for d in _multi_indices(data.p, max_total):
        ok = True
        for i in range(3):
            s = Fraction(0)
            for b, db in enumerate(d):
                s += db * h_list[b].c[i]
            if frac_part(s) != 0:
                ok = False
                break
        if ok:
            out.append(d)
    return out


def mirror_map_series(data: OrbifoldData, degree: int,
                      ctx: Context = DOUBLE) -> MirrorMapSeries:
    """tau_a(q) to the requested total degree, plus the reverted q_a(tau)."""
    if degree < 1:
        raise ValidationError("mirror map degree must be >= 1")
    p = data.p
    h_list = [data.element(e.j, e.l) for e in data.age1]
    forward = []
    for a in range(p):
        ha = h_list[a]
        series: dict = {}
        for d in constraint_indices(data, degree - 1):
            coef = 1.0
            zero = False
            for i in range(3):
                s = Fraction(0)
                for b, db in enumerate(d):
                    s += db * h_list[b].c[i]
                den_arg = -ha.c[i] - s + 1
                if is_nonpositive_integer(den_arg):
                    zero = True
                    break
                num = ctx.gamma(-frac_part(ha.c[i]) + 1)
                coef = coef * num / ctx.gamma(den_arg)
            if zero:
                continue
            for db in d:
                for t in range(1, db + 1):
                    coef = coef / t
            key = tuple(db + (1 if b == a else 0) for b, db in enumerate(d))
            if sum(key) <= degree:
                series[key] = series.get(key, 0) + coef
        forward.append(series)

    inverse = _revert(forward, p, degree)
    return MirrorMapSeries(p=p, degree=degree, forward=forward, inverse=inverse)


def _revert(forward: list, p: int, degree: int) -> list:
    """Fixed-point inversion: q = tau - (nonlinear part of tau(q)) o q."""
    unit = [{tuple(1 if i == a else 0 for i in range(p)): 1.0} for a in range(p)]
    inverse = [dict(u) for u in unit]
    for _ in range(degree + 1):
        new = []
        for a in range(p):
            tail = {k: v for k, v in forward[a].items() if sum(k) >= 2}
            corr = _compose(tail, inverse, degree, p)
            cur = dict(unit[a])
            for k, v in corr.items():
                cur[k] = cur.get(k, 0) - v
            new.append({k: v for k, v in cur.items() if v != 0})
        inverse = new
    return inverse


def roundtrip_deviation(mm: MirrorMapSeries, ctx: Context = DOUBLE) -> float:
    """|tau(q(tau)) - tau| coefficient-wise, within the truncation degree."""
    worst = 0.0
    for a in range(mm.p):
        comp = _compose(mm.forward[a], mm.inverse, mm.degree, mm.p)
        for k, v in comp.items():
            expect = 1.0 if (sum(k) == 1 and k[a] == 1) else 0.0
            worst = max(worst, ctx.abs(v - expect))
    return worst
