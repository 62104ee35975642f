"""Truncated multivariate power/Laurent series over complex-like scalars.

The coefficient map is sparse; each variable carries a window (lo, hi)
meaning: every stored exponent lies in [lo, hi], the series is exact below
hi + 1, and nothing is known above.  Arithmetic shrinks windows to the
sharpest guaranteed range (lo_mul = loA + loB, hi_mul per the usual
truncated-product calculus).  A window hi of None means "unbounded" and is
used for series that do not involve a variable.

Scalars only need +, -, *, / by ints and each other, so the same code runs
on Python complex and on mpmath.mpc.
"""

from __future__ import annotations

from .errors import TruncationError, ValidationError

INF = None  # window upper bound sentinel


def _int_add(x, y):
    return x + y


def _min_hi(a, b):
    if a is INF:
        return b
    if b is INF:
        return a
    return min(a, b)


def _add_hi(a, b):
    if a is INF or b is INF:
        return INF
    return a + b


class TruncatedSeries:
    __slots__ = ("vars", "window", "coeffs")

    def __init__(self, variables, window, coeffs):
        self.vars = tuple(variables)
        self.window = dict(window)
        self.coeffs = {}
        for exps, c in coeffs.items():
            if c == 0:
                continue
            if self._in_window(exps):
                self.coeffs[exps] = c

    # -- constructors ---------------------------------------------------

    @classmethod
    def constant(cls, value, variables=(), window=None):
        """Constant series; the window is widened to include exponent 0."""
        variables = tuple(variables)
        win = {}
        for v in variables:
            lo, hi = (window or {}).get(v, (0, INF))
            win[v] = (min(lo, 0), hi)
        zero = tuple(0 for _ in variables)
        return cls(variables, win, {zero: value})

    @classmethod
    def variable(cls, name, hi, lo=0):
        return cls((name,), {name: (lo, hi)}, {(1,): 1.0})

    # -- bookkeeping ------------------------------------------------------

    def _in_window(self, exps):
        for v, e in zip(self.vars, exps):
            lo, hi = self.window[v]
            if e < lo or (hi is not INF and e > hi):
                return False
        return True

    def copy_with(self, coeffs=None, window=None):
        return TruncatedSeries(self.vars, window or self.window, coeffs if coeffs is not None else self.coeffs)

    def align(self, other: "TruncatedSeries"):
        """Extend both series to the union variable tuple (sorted)."""
        if self.vars == other.vars:
            return self, other
        allv = tuple(sorted(set(self.vars) | set(other.vars)))
        return self._embed(allv), other._embed(allv)

    def _embed(self, allv):
        if self.vars == allv:
            return self
        pos = {v: i for i, v in enumerate(self.vars)}
        window = {}
        for v in allv:
            window[v] = self.window[v] if v in pos else (0, INF)
        coeffs = {}
        for exps, c in self.coeffs.items():
            new = tuple(exps[pos[v]] if v in pos else 0 for v in allv)
            coeffs[new] = c
        return TruncatedSeries(allv, window, coeffs)

    def coefficient(self, exps):
        if isinstance(exps, dict):
            exps = tuple(exps.get(v, 0) for v in self.vars)
        return self.coeffs.get(tuple(exps), 0)

    def constant_term(self):
        return self.coefficient(tuple(0 for _ in self.vars))

    def is_zero(self):
        return not self.coeffs

    # -- ring operations ----------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, TruncatedSeries):
            other = TruncatedSeries.constant(other, self.vars, self.window)
        a, b = self.align(other)
        window = {}
        for v in a.vars:
            loA, hiA = a.window[v]
            loB, hiB = b.window[v]
            window[v] = (min(loA, loB), _min_hi(hiA, hiB))
        coeffs = dict(a.coeffs)
        for exps, c in b.coeffs.items():
            coeffs[exps] = coeffs.get(exps, 0) + c
        return TruncatedSeries(a.vars, window, coeffs)

    __radd__ = __add__

    def __neg__(self):
        return self.copy_with({e: -c for e, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scaled(self, scalar):
        if scalar == 0:
            return TruncatedSeries(self.vars, self.window, {})
        return self.copy_with({e: c * scalar for e, c in self.coeffs.items()})

    @classmethod
    def _raw(cls, variables, window, coeffs):
        """Construct without re-filtering (internal fast path; the caller
        guarantees every key lies inside the window and is nonzero)."""
        obj = object.__new__(cls)
        obj.vars = variables
        obj.window = window
        obj.coeffs = coeffs
        return obj

    def __mul__(self, other):
        if not isinstance(other, TruncatedSeries):
            return self.scaled(other)
        a, b = self.align(other)
        nv = len(a.vars)
        window = {}
        for v in a.vars:
            loA, hiA = a.window[v]
            loB, hiB = b.window[v]
            window[v] = (loA + loB, _min_hi(_add_hi(hiA, loB), _add_hi(hiB, loA)))
        if not a.coeffs or not b.coeffs:
            return TruncatedSeries._raw(a.vars, window, {})
        bounds = [window[v] for v in a.vars]
        out = {}
        # bucket on the first axis so out-of-window pairs are skipped in bulk
        lo0, hi0 = bounds[0]
        buckets_a: dict = {}
        for ea, ca in a.coeffs.items():
            buckets_a.setdefault(ea[0], []).append((ea, ca))
        buckets_b: dict = {}
        for eb, cb in b.coeffs.items():
            buckets_b.setdefault(eb[0], []).append((eb, cb))
        get = out.get
        for e0a, items_a in buckets_a.items():
            for e0b, items_b in buckets_b.items():
                s0 = e0a + e0b
                if s0 < lo0 or (hi0 is not INF and s0 > hi0):
                    continue
                for ea, ca in items_a:
                    for eb, cb in items_b:
                        key = tuple(map(_int_add, ea, eb))
                        ok = True
                        for i in range(1, nv):
                            lo, hi = bounds[i]
                            e = key[i]
                            if e < lo or (hi is not INF and e > hi):
                                ok = False
                                break
                        if ok:
                            out[key] = get(key, 0) + ca * cb
        for key in [k for k, v in out.items() if v == 0]:
            del out[key]
        return TruncatedSeries._raw(a.vars, window, out)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self.copy_with({e: c / scalar for e, c in self.coeffs.items()})

    # -- univariate helpers ---------------------------------------------

    def _axis(self, var):
        try:
            return self.vars.index(var)
        except ValueError:
            raise ValidationError(f"series has no variable {var!r}") from None

    def valuation(self, var):
        ax = self._axis(var)
        if not self.coeffs:
            lo, hi = self.window[var]
            return hi if hi is not INF else 0
        return min(e[ax] for e in self.coeffs)

    def shift(self, var, k):
        """Multiply by var**k (exponent shift; window shifts along)."""
        ax = self._axis(var)
        lo, hi = self.window[var]
        window = dict(self.window)
        window[var] = (lo + k, hi if hi is INF else hi + k)
        coeffs = {}
        for exps, c in self.coeffs.items():
            new = list(exps)
            new[ax] += k
            coeffs[tuple(new)] = c
        return TruncatedSeries(self.vars, window, coeffs)

    def derivative(self, var):
        ax = self._axis(var)
        lo, hi = self.window[var]
        window = dict(self.window)
        window[var] = (min(lo - 1, 0) if lo <= 0 else lo - 1, hi if hi is INF else hi - 1)
        coeffs = {}
        for exps, c in self.coeffs.items():
            e = exps[ax]
            if e == 0:
                continue
            new = list(exps)
            new[ax] = e - 1
            coeffs[tuple(new)] = c * e
        return TruncatedSeries(self.vars, window, coeffs)

    def xdx(self, var):
        """Euler operator var * d/d var."""
        ax = self._axis(var)
        coeffs = {}
        for exps, c in self.coeffs.items():
            if exps[ax] != 0:
                coeffs[exps] = c * exps[ax]
        return self.copy_with(coeffs)

    def integrate_log(self, var, times=1):
        """Inverse of the Euler operator; requires no var-degree-0 terms."""
        ax = self._axis(var)
        coeffs = dict(self.coeffs)
        for _ in range(times):
            out = {}
            for exps, c in coeffs.items():
                e = exps[ax]
                if e == 0:
                    if c != 0:
                        raise ValidationError(
                            "integrate_log needs a zero constant term in " + var
                        )
                    continue
                out[exps] = c / e
            coeffs = out
        return self.copy_with(coeffs)

    def antiderivative(self, var):
        """Term-wise antiderivative (no log terms: requires no var**-1)."""
        ax = self._axis(var)
        lo, hi = self.window[var]
        window = dict(self.window)
        window[var] = (lo + 1 if lo != -1 else 0, hi if hi is INF else hi + 1)
        coeffs = {}
        for exps, c in self.coeffs.items():
            e = exps[ax]
            if e == -1:
                raise ValidationError("antiderivative hit a residue term")
            new = list(exps)
            new[ax] = e + 1
            coeffs[tuple(new)] = c / (e + 1)
        return TruncatedSeries(self.vars, window, coeffs)

    def residue(self, var):
        """Coefficient of var**-1, as a series in the remaining variables."""
        ax = self._axis(var)
        rest = tuple(v for i, v in enumerate(self.vars) if i != ax)
        window = {v: self.window[v] for v in rest}
        coeffs = {}
        for exps, c in self.coeffs.items():
            if exps[ax] == -1:
                key = tuple(e for i, e in enumerate(exps) if i != ax)
                coeffs[key] = coeffs.get(key, 0) + c
        if not rest:
            return coeffs.get((), 0)
        return TruncatedSeries(rest, window, coeffs)

    def substitute_neg(self, var):
        """var -> -var."""
        ax = self._axis(var)
        coeffs = {}
        for exps, c in self.coeffs.items():
            coeffs[exps] = c if exps[ax] % 2 == 0 else -c
        return self.copy_with(coeffs)

    def truncate(self, var, hi):
        ax = self._axis(var)
        lo, old_hi = self.window[var]
        window = dict(self.window)
        window[var] = (lo, _min_hi(old_hi, hi))
        coeffs = {e: c for e, c in self.coeffs.items() if hi is INF or e[ax] <= hi}
        return TruncatedSeries(self.vars, window, coeffs)

    def rename(self, mapping):
        """Rename variables; result variables are re-sorted."""
        newv = tuple(mapping.get(v, v) for v in self.vars)
        if len(set(newv)) != len(newv):
            raise ValidationError("variable rename collision")
        order = sorted(range(len(newv)), key=lambda i: newv[i])
        vars_sorted = tuple(newv[i] for i in order)
        window = {newv[i]: self.window[self.vars[i]] for i in range(len(newv))}
        coeffs = {}
        for exps, c in self.coeffs.items():
            coeffs[tuple(exps[i] for i in order)] = c
        return TruncatedSeries(vars_sorted, window, coeffs)

    # -- transcendental / composition ------------------------------------

    def _require_positive_valuation(self):
        for exps in self.coeffs:
            if all(e == 0 for e in exps):
                raise ValidationError("nonzero constant term where none allowed")

    def _cap(self, template) -> "TruncatedSeries":
        """Truncate to the upper windows of a template (loop control)."""
        out = self
        for v, (_lo, hi) in template.items():
            if hi is not INF and v in out.window:
                out = out.truncate(v, hi)
        return out

    def tighten(self) -> "TruncatedSeries":
        """Raise window lower bounds to the actual stored valuations.

        Sound because coefficients inside the window are exact: a missing
        low-order coefficient really is zero.
        """
        if not self.coeffs:
            return self
        window = dict(self.window)
        changed = False
        for i, v in enumerate(self.vars):
            lo, hi = window[v]
            mn = min(e[i] for e in self.coeffs)
            if mn > lo:
                window[v] = (mn, hi)
                changed = True
        if not changed:
            return self
        return TruncatedSeries(self.vars, window, self.coeffs)

    def exp(self):
        """exp of a series with zero constant term (fold constants outside)."""
        self = self.tighten()
        self._require_positive_valuation()
        one = TruncatedSeries.constant(1.0, self.vars, self.window)
        acc = one
        term = one
        k = 1
        while True:
            term = ((term * self) / k)._cap(self.window)
            if term.is_zero():
                break
            acc = acc + term
            k += 1
            if k > 10000:
                raise TruncationError("exp did not terminate; window unbounded?")
        return acc

    def log1p(self):
        """log(1 + s) for s with zero constant term."""
        self = self.tighten()
        self._require_positive_valuation()
        acc = TruncatedSeries(self.vars, self.window, {})
        term = TruncatedSeries.constant(1.0, self.vars, self.window)
        k = 1
        while True:
            term = (term * self)._cap(self.window)
            if term.is_zero():
                break
            acc = acc + (term / k if k % 2 == 1 else -(term / k))
            k += 1
            if k > 10000:
                raise TruncationError("log did not terminate; window unbounded?")
        return acc

    def compose_univariate(self, outer_coeffs, var=None):
        """sum_k outer_coeffs[k] * self**k for self with positive valuation."""
        if var is None and len(self.vars) == 1:
            var = self.vars[0]
        self = self.tighten()
        if self.valuation(var) < 1 and not self.is_zero():
            raise ValidationError("compose requires positive valuation inner series")
        acc = TruncatedSeries.constant(outer_coeffs[0], self.vars, self.window)
        power = TruncatedSeries.constant(1.0, self.vars, self.window)
        for k in range(1, len(outer_coeffs)):
            power = (power * self)._cap(self.window)
            if power.is_zero():
                break
            if outer_coeffs[k] != 0:
                acc = acc + power.scaled(outer_coeffs[k])
        return acc

    def invert_unit(self):
        """1/self when the constant term is nonzero (geometric series)."""
        c0 = self.constant_term()
        if c0 == 0:
            raise ValidationError("invert_unit needs a nonzero constant term")
        rest = ((self - c0) / c0).tighten()
        one = TruncatedSeries.constant(1.0, self.vars, self.window)
        acc = one
        term = one
        k = 0
        while True:
            term = (term * rest)._cap(self.window)
            if term.is_zero():
                break
            acc = (acc - term) if k % 2 == 0 else (acc + term)
            k += 1
            if k > 10000:
                raise TruncationError("inversion did not terminate")
        return acc / c0

    def divide(self, other):
        """self / other with other of the form (unit) * var**v on one axis."""
        a, b = self.align(other)
        val = {v: b.valuation(v) for v in b.vars}
        shifted = b
        for v, k in val.items():
            if k:
                shifted = shifted.shift(v, -k)
        out = a * shifted.invert_unit()
        for v, k in val.items():
            if k:
                out = out.shift(v, -k)
        return out


# -- free functions ------------------------------------------------------


def reversion(s: TruncatedSeries, var: str, out_var: str, order: int) -> TruncatedSeries:
    """Compositional inverse t(X) of X = s(t) for s with a simple zero.

    Newton iteration on truncated series; verified downstream by
    re-composition.
    """
    if len(s.vars) != 1 or s.vars[0] != var:
        raise ValidationError("reversion expects a univariate series")
    if s.valuation(var) != 1:
        raise ValidationError("reversion needs a simple zero (valuation 1)")
    c1 = s.coefficient((1,))
    if c1 == 0:
        raise ValidationError("vanishing linear coefficient")
    x = TruncatedSeries.variable(out_var, order)
    t = x / c1
    hi = s.window[var][1]
    top = order if hi is INF else hi
    s_list = [s.coefficient((k,)) for k in range(0, top + 1)]
    while len(s_list) < order + 2:
        s_list.append(0)
    ds_list = [k * s_list[k] for k in range(1, len(s_list))]
    for _ in range(order.bit_length() + 2):
        st = t.compose_univariate(s_list, out_var)
        dst = t.compose_univariate(ds_list, out_var)
        err = st - x
        if err.is_zero():
            break
        t = (t - err.divide(dst)).truncate(out_var, order)
    return t.truncate(out_var, order)


def divide_by_z_plus_w(p: dict, K: int, order_available: int) -> dict:
    """q with p(z, w) = (z + w) * q(z, w) on {(k, l): k, l <= K}.

    By unrolling the recurrence p_{a,b} = q_{a-1,b} + q_{a,b-1}:
    q_{k,l} = sum_{j=0}^{l} (-1)^j p_{k+1+j, l-j}, which needs p known up
    to first index k + l + 1.  p maps (i, j) -> scalar and is assumed exact
    for both indices <= order_available.
    """
    if order_available < 2 * K + 1:
        raise TruncationError(
            f"edge division needs series order {2 * K + 1}, have {order_available}"
        )
    q = {}
    for k in range(K + 1):
        for l in range(K + 1):
            acc = 0
            for j in range(l + 1):
                term = p.get((k + 1 + j, l - j), 0)
                acc = acc + term if j % 2 == 0 else acc - term
            q[(k, l)] = acc
    return q
