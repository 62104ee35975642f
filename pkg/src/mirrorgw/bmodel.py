"""B-model pipeline at the large-radius point: Laplace f-matrix, dilaton
series, Bergman-kernel edge coefficients, thimble expansions, oscillatory
integral checks, and the graph-sum potentials.

The ingredient stack (f-matrix, xi-hat expansions, B-check edges) is
independent of the A-model stack; the two sides are compared only by the
verification suites.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

from .errors import TruncationError, ValidationError
from .exact import bernoulli_poly, is_nonpositive_integer
from .graphs import DecoratedGraph, enumerate_graphs
from .numerics import Context, DOUBLE, ExtendedContext
from .orbifold import OrbifoldData
from .potentials import PSI, PotentialSeries
from .psi import psi_intersection
from .series import divide_by_z_plus_w


class BModel:
    """Cached per-orbifold B-model tables (everything at vanishing moduli)."""

    def __init__(self, data: OrbifoldData, ctx: Context = DOUBLE):
        self.data = data
        self.ctx = ctx
        w1, w2, w3 = data.w
        self.w_prod = w1 * w2 * w3
        # h_1(0) = (1/|G|) sqrt(-2 / (w1 w2 w3)), real positive
        self.h1_zero = ctx.sqrt_pos(ctx.real(Fraction(-2) / self.w_prod)) / data.order
        self.sqrt_m2 = ctx.i * ctx.sqrt_pos(ctx.real(2))
        self.vertex_base = self.h1_zero / self.sqrt_m2

    # -- Laplace transform of the one-forms ---------------------------------

    @lru_cache(maxsize=None)
    def _element_exponential(self, h_index: tuple, order: int) -> tuple:
        """Exact coefficients of exp(sum_m (-1)^{m+1}/(m(m+1))
        sum_i B_{m+1}(c_i(h)) (w_i u)^{-m}) through u^{-order}."""
        h = self.data.element(*h_index)
        expo = [Fraction(0)] * (order + 1)
        for mm in range(1, order + 1):
            c = Fraction(0)
            for i in range(3):
                c += bernoulli_poly(mm + 1, h.c[i]) / self.data.w[i] ** mm
            expo[mm] = Fraction((-1) ** (mm + 1), mm * (mm + 1)) * c
        out = [Fraction(0)] * (order + 1)
        out[0] = Fraction(1)
        term = list(out)
        kk = 1
        while True:
            new = [Fraction(0)] * (order + 1)
            nonzero = False
            for a, ta in enumerate(term):
                if ta == 0:
                    continue
                for b in range(1, order + 1 - a):
                    if expo[b] == 0:
                        continue
                    new[a + b] += ta * expo[b]
                    nonzero = True
            if not nonzero:
                break
            term = [x / kk for x in new]
            for j in range(order + 1):
                out[j] += term[j]
            kk += 1
        return tuple(out)

    @lru_cache(maxsize=None)
    def f_matrix(self, order: int) -> dict:
        """f^alpha_beta(u, 0) coefficients: (alpha, beta) -> tuple indexed
        by the power of 1/u; the constant term is delta_{alpha beta}."""
        data, ctx = self.data, self.ctx
        chars = data.character_indices()
        out = {}
        for alpha in chars:
            for beta in chars:
                acc = [0j] * (order + 1)
                for h in data.elements:
                    chi = ctx.cis(data.character_turn(alpha, h)
                                  - data.character_turn(beta, h))
                    eh = self._element_exponential(h.index, order)
                    for j in range(order + 1):
                        if eh[j]:
                            acc[j] += chi * ctx.real(eh[j])
                out[(alpha, beta)] = tuple(a / data.order for a in acc)
        return out

    @lru_cache(maxsize=None)
    def h_check(self, order: int) -> tuple:
        """check-h(u, 0) coefficients (independent of the thimble label)."""
        ident = self.data.element(0, 0)
        eh = self._element_exponential(ident.index, order)
        return tuple(self.h1_zero * self.ctx.real(c) for c in eh)

    def h_check_via_f(self, alpha: tuple, order: int) -> tuple:
        """Second route: sum_beta f^alpha_beta(u,0) h^beta_1(0)."""
        f = self.f_matrix(order)
        acc = [0j] * (order + 1)
        for beta in self.data.character_indices():
            for j in range(order + 1):
                acc[j] += f[(alpha, beta)][j] * self.h1_zero
        return tuple(acc)

    # -- Bergman edge coefficients ----------------------------------------

    @lru_cache(maxsize=None)
    def b_check_table(self, K: int) -> dict:
        """check-B^{alpha,beta}_{k,l} for k, l <= K from the f-matrix."""
        order = 2 * K + 2
        f = self.f_matrix(order)
        chars = self.data.character_indices()
        out = {}
        for alpha in chars:
            for beta in chars:
                p = {}
                for i in range(order + 1):
                    for j in range(order + 1):
                        s = 0
                        for gamma in chars:
                            s += f[(alpha, gamma)][i] * f[(beta, gamma)][j]
                        p[(i, j)] = -s
                p[(0, 0)] = p[(0, 0)] + (1 if alpha == beta else 0)
                out[(alpha, beta)] = divide_by_z_plus_w(p, K, order)
        return out

    def b_check(self, alpha: tuple, beta: tuple, k: int, l: int):
        K = max(k, l)
        return self.b_check_table(K)[(alpha, beta)][(k, l)]

    # -- thimble expansions at X = 0 ----------------------------------------

    @lru_cache(maxsize=None)
    def xi_hat(self, beta: tuple, k: int, D: int) -> tuple:
        """xi-hat^beta_k leg series as ((d, psi-class), coeff) pairs.

        k applies the Euler operator k times to the base expansion; the
        psi-class component ell collects the winding classes with the
        character twist of the thimble ending at that puncture.
        """
        data, ctx = self.data, self.ctx
        m = data.m
        w1, w2, w3 = data.w
        acc: dict = {}
        for d0 in range(1, D + 1):
            for cls in range(m):
                h = data.element_of_winding(d0, cls)
                den1 = d0 * w1 - h.c[0] + 1
                den2 = d0 * w2 - h.c[1] + 1
                if is_nonpositive_integer(den1) or is_nonpositive_integer(den2):
                    continue
                gam = ctx.gamma(d0 * (w1 + w2) + h.c[2]) / (
                    ctx.gamma(den1) * ctx.gamma(den2))
                hinv = data.inverse(h)
                chi = ctx.cis(data.character_turn(beta, hinv))
                wfac = 1
                for i in range(3):
                    wfac = wfac * ctx.power_signed(data.w[i], Fraction(1, 2) - h.c[i])
                phase = ctx.cispi(-(d0 * w3 - h.c[2]))
                base = (self.sqrt_m2 * phase * chi * wfac * gam
                        * ctx.real(Fraction(1, d0) ** (h.age - 1) * Fraction(1, m))
                        * ctx.real(Fraction(d0) ** k))
                for ell in range(m):
                    tw = ctx.cis(Fraction(-cls * (ell + 1), m))
                    key = (d0, ell)
                    acc[key] = acc.get(key, 0) + base * tw
        return tuple(sorted(acc.items()))

    # -- graph weight ingredients -----------------------------------------

    @lru_cache(maxsize=None)
    def open_leaf(self, alpha: tuple, k: int, D: int) -> dict:
        """(L^xi)^alpha_k built from xi-hat ladders and B-check edge data."""
        acc: dict = dict(self.xi_hat(alpha, k, D))
        if k >= 1:
            table = self.b_check_table(k)
            for i in range(k):
                for beta in self.data.character_indices():
                    b = table[(alpha, beta)][(k - 1 - i, 0)]
                    if b == 0:
                        continue
                    for key, val in self.xi_hat(beta, i, D):
                        acc[key] = acc.get(key, 0) - b * val
        scale = -1 / self.sqrt_m2
        return {key: v * scale for key, v in acc.items()}

    @lru_cache(maxsize=None)
    def primary_leaf(self, alpha: tuple, k: int, order: int) -> list:
        """(1/sqrt(-2)) (check-h^tau)^alpha_k as a vector over the age-1 index."""
        data, ctx = self.data, self.ctx
        f = self.f_matrix(order)
        pref = self.h1_zero / self.sqrt_m2
        out = []
        for entry in data.age1:
            h_a = data.element(entry.j, entry.l)
            wfac = 1
            for i in range(3):
                wfac = wfac * ctx.power_signed(data.w[i], h_a.c[i])
            s = 0
            for beta in data.character_indices():
                s += f[(alpha, beta)][k] * ctx.cis(data.character_turn(beta, h_a))
            out.append(pref * wfac * s)
        return out

    @lru_cache(maxsize=None)
    def dilaton_leaf(self, alpha: tuple, k: int, order: int):
        """-(1/sqrt(-2)) [u^{-(k-1)}] check-h(u, 0)."""
        if k < 2:
            raise ValidationError("dilaton leaves need height >= 2")
        if k - 1 > order:
            raise TruncationError(f"dilaton height {k} beyond h-check order")
        return -self.h_check(order)[k - 1] / self.sqrt_m2

    @lru_cache(maxsize=None)
    def _psi_real(self, g: int, heights: tuple):
        psi = psi_intersection(g, heights)
        return None if psi == 0 else self.ctx.real(psi)

    @lru_cache(maxsize=None)
    def _base_pow(self, k: int):
        return self.vertex_base ** k

    @lru_cache(maxsize=None)
    def open_leaf_items(self, alpha: tuple, k: int, D: int) -> tuple:
        return tuple(sorted(self.open_leaf(alpha, k, D).items()))

    def weight(self, graph: DecoratedGraph, D: int, order: int) -> tuple:
        """B-model weight of one decorated graph, divided by |Aut|.

        Same return shape as the A-model weight; carries the global sign
        (-1)^(g(Gamma) - 1).
        """
        data = self.data
        chars = data.character_indices()
        scalar = -1 if (graph.total_genus() - 1) % 2 else 1
        for v, heights in enumerate(graph.heights_by_vertex()):
            gv = graph.genus[v]
            psi = self._psi_real(gv, heights)
            if psi is None:
                return ({}, [])
            scalar = scalar * psi * self._base_pow(2 - 2 * gv - len(heights))

        if graph.edges:
            K = max(k for e in graph.edges for k in (e[2], e[3]))
            edges = self.b_check_table(K)
            for (v1, v2, k1, k2) in graph.edges:
                scalar = scalar * edges[(chars[graph.marking[v1]], chars[graph.marking[v2]])][(k1, k2)]

        for (v, k) in graph.dilaton_leaves:
            scalar = scalar * self.dilaton_leaf(chars[graph.marking[v]], k, order)

        scalar = scalar / graph.aut

        tau_poly = {tuple([0] * data.p): scalar}
        for (v, k) in graph.primary_leaves:
            vec = self.primary_leaf(chars[graph.marking[v]], k, order)
            new: dict = {}
            for expo, coef in tau_poly.items():
                for a, va in enumerate(vec):
                    if va == 0:
                        continue
                    key = expo[:a] + (expo[a] + 1,) + expo[a + 1:]
                    new[key] = new.get(key, 0) + coef * va
            tau_poly = new
            if not tau_poly:
                return ({}, [])

        leg_tables = [self.open_leaf_items(chars[graph.marking[v]], k, D)
                      for (v, k) in graph.open_leaves]
        return (tau_poly, leg_tables)

    # -- unstable parts from the thimble expansions -------------------------

    def disk_extras(self, tau_degree: int, D: int) -> PotentialSeries:
        """Formula route for the (0,1) moduli-constant terms.

        Orientation calibrated so the disk sector satisfies the mirror
        identity with the +|G| factor (see the eo module's disk potential).
        """
        data, ctx = self.data, self.ctx
        pot = PotentialSeries(0, 1, data.p, data.m, PSI,
                              meta={"side": "b", "unstable_source": "formula"})
        pref = -1 / (data.order * ctx.sqrt_pos(ctx.real(-2 * self.w_prod)))
        zero = tuple([0] * data.p)
        total: dict = {}
        for beta in data.character_indices():
            for (key, val) in self.xi_hat(beta, 0, D):
                total[key] = total.get(key, 0) + val
        for (d, ell), val in total.items():
            pot.add(zero, ((d, ell),), pref * val / (d * d))
        if tau_degree >= 1:
            pref_tau = -1 / ctx.sqrt_pos(ctx.real(-2 * self.w_prod))
            for entry in data.age1:
                h_a = data.element(entry.j, entry.l)
                wfac = 1
                for i in range(3):
                    wfac = wfac * ctx.power_signed(data.w[i], h_a.c[i])
                expo = [0] * data.p
                expo[entry.a - 1] = 1
                comp: dict = {}
                for beta in data.character_indices():
                    chi = ctx.cis(data.character_turn(beta, h_a))
                    for (key, val) in self.xi_hat(beta, 0, D):
                        comp[key] = comp.get(key, 0) + chi * val
                for (d, ell), val in comp.items():
                    pot.add(tuple(expo), ((d, ell),), pref_tau * wfac * val / d)
        return pot

    def annulus_extras(self, D: int) -> PotentialSeries:
        """Formula route for the (0,2) moduli-constant terms."""
        data = self.data
        pot = PotentialSeries(0, 2, data.p, data.m, PSI,
                              meta={"side": "b", "unstable_source": "formula"})
        zero = tuple([0] * data.p)
        for gamma in data.character_indices():
            tab = self.xi_hat(gamma, 0, D)
            for (k1, v1) in tab:
                for (k2, v2) in tab:
                    d1, d2 = k1[0], k2[0]
                    pot.add(zero, (k1, k2), 0.5 * v1 * v2 / (d1 + d2))
        return pot


def f_gn_b(data: OrbifoldData, g: int, n: int, tau_degree: int, max_winding: int,
           ctx: Context = DOUBLE, model: "BModel | None" = None,
           unstable_source: str = "auto") -> PotentialSeries:
    """B-model potential through the requested windows (psi-class basis).

    The (0,1)/(0,2) moduli-constant parts come from the spectral curve when
    one is available (r = 1 families and the trivial group) and from the
    thimble-expansion formulas otherwise.
    """
    if tau_degree < 0 or max_winding < 1:
        raise ValidationError("windows must be positive")
    model = model or BModel(data, ctx)
    pot = PotentialSeries(g, n, data.p, data.m, PSI,
                          meta={"side": "b", "tau_degree": tau_degree,
                                "max_winding": max_winding})
    from .amodel import _accumulate
    order = 2 * (3 * g + n + tau_degree + 2) + 2
    for ell in range(tau_degree + 1):
        for graph in enumerate_graphs(data.order, g, n, ell):
            tau_poly, leg_tables = model.weight(graph, max_winding, order)
            _accumulate(pot, tau_poly, leg_tables)

    if (g, n) in ((0, 1), (0, 2)):
        from . import eo
        use_curve = unstable_source == "curve" or (
            unstable_source == "auto" and eo.supports(data))
        if use_curve:
            curve = eo.build_spectral_curve(data, ctx)
            extra = (eo.disk_potential(curve, max_winding)
                     if (g, n) == (0, 1) else eo.annulus_potential(curve, max_winding))
            pot.meta["unstable_source"] = "curve"
            if (g, n) == (0, 1) and tau_degree >= 1:
                tau_part = model.disk_extras(tau_degree, max_winding)
                tau_part.coeffs = {k: v for k, v in tau_part.coeffs.items()
                                   if sum(k[0]) >= 1}
                extra = extra + tau_part
        else:
            extra = (model.disk_extras(tau_degree, max_winding)
                     if (g, n) == (0, 1) else model.annulus_extras(max_winding))
            pot.meta["unstable_source"] = "formula"
        pot = pot + extra
    return pot


# -- oscillatory integrals and asymptotics ----------------------------------


def oscillatory_phi(data: OrbifoldData, alpha: tuple, u_values, q_degree: int,
                    dps: int = 50) -> dict:
    """Coefficients of the oscillatory integral of the Liouville form along
    the alpha-thimble, as a q-series with values on the u grid.

    Returns {multi-index r: [value at each u]}; the r coefficient carries
    the (-1)^{|r|} / prod r_a! weight from expanding the exponential.
    """
    ctx = ExtendedContext(dps=dps)
    data_w = data.w
    eta1 = _eta1_element(data)
    theta = 2 * ctx.pi * ctx.real(data.character_turn(alpha, eta1))
    out = {}
    for r_multi in _multi_indices(data.p, q_degree):
        c = [Fraction(0)] * 3
        chi_turn = Fraction(0)
        fact = 1
        for a, ra in enumerate(r_multi):
            entry = data.age1[a]
            h_a = data.element(entry.j, entry.l)
            for i in range(3):
                c[i] += ra * h_a.c[i]
            chi_turn += ra * data.character_turn(alpha, h_a)
            for t in range(1, ra + 1):
                fact *= t
        vals = []
        for u in u_values:
            uu = ctx.real(Fraction(u))
            g1 = ctx.mp.gamma(uu * ctx.real(data_w[0]) + ctx.real(c[0]))
            g2 = ctx.mp.gamma(uu * ctx.real(data_w[1]) + ctx.real(c[1]))
            g3 = ctx.mp.gamma(-uu * ctx.real(data_w[2]) - ctx.real(c[2]) + 1)
            pref = ctx.exp(ctx.i * (theta + ctx.pi * ctx.real(data_w[2])) * uu)
            val = (pref / data.order) * ctx.cispi(c[2]) * ctx.cis(chi_turn) \
                * ((-1) ** sum(r_multi)) / fact * g1 * g2 / g3
            vals.append(val)
        out[r_multi] = vals
    return out


def _eta1_element(data: OrbifoldData):
    """eta_1 as a group element: index via winding (d0, k) = (1, 0)."""
    return data.element_of_winding(1, 0)


def _multi_indices(p: int, total: int):
    if p == 0:
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


def f_via_oscillatory(data: OrbifoldData, alpha: tuple, beta: tuple, u,
                      dps: int = 50):
    """Reconstruct f^alpha_beta(u, 0) from the oscillatory closed forms."""
    ctx = ExtendedContext(dps=dps)
    eta1 = _eta1_element(data)
    theta = 2 * ctx.pi * ctx.real(data.character_turn(alpha, eta1))
    uu = ctx.real(Fraction(u))
    w = data.w
    log_ws = 0
    for i in range(3):
        wi = w[i]
        if wi > 0:
            log_ws += ctx.real(wi) * ctx.log_real(ctx.real(wi))
        else:
            log_ws += ctx.real(wi) * (ctx.log_real(ctx.real(-wi)) + ctx.i * ctx.pi)
    sqrt_m2pi = ctx.i * ctx.sqrt_pos(2 * ctx.pi)
    acc = 0
    for h in data.elements:
        hinv = data.inverse(h)
        chib = ctx.cis(data.character_turn(beta, hinv))
        osc = (ctx.exp(ctx.i * (theta + ctx.pi * ctx.real(w[2])) * uu) / data.order
               * ((-1) ** h.age) * ctx.cispi(h.c[2]) * ctx.cis(data.character_turn(alpha, h))
               * ctx.mp.gamma(uu * ctx.real(w[0]) + ctx.real(h.c[0]))
               * ctx.mp.gamma(uu * ctx.real(w[1]) + ctx.real(h.c[1]))
               / ctx.mp.gamma(-uu * ctx.real(w[2]) - ctx.real(h.c[2]) + 1))
        wfac = 1
        for i in range(3):
            wfac = wfac * _power_signed_hp(ctx, w[i], Fraction(1, 2) - h.c[i])
        acc += chib * ((-1) ** h.age) * uu ** ctx.real(Fraction(3, 2) - h.age) * wfac * osc
    return acc * ctx.exp(-(ctx.i * theta + log_ws) * uu) / sqrt_m2pi


def _power_signed_hp(ctx: ExtendedContext, base: Fraction, expo: Fraction):
    if base > 0:
        return ctx.real(base) ** ctx.real(expo)
    return (ctx.real(-base) ** ctx.real(expo)) * ctx.cispi(expo)


def f_series_value(model: BModel, alpha: tuple, beta: tuple, u, order: int):
    """Evaluate the truncated f-matrix series at a numeric u (Horner in 1/u)."""
    coeffs = model.f_matrix(order)[(alpha, beta)]
    acc = 0
    for j in range(order, 0, -1):
        acc = (acc + coeffs[j]) / u
    return acc + coeffs[0]


def stirling_check(data: OrbifoldData, h_index: tuple, u_samples, order: int,
                   dps: int = 60) -> list:
    """Relative deviations between the exact Gamma ratio and its truncated
    asymptotic expansion at each u sample; deviations should fall like
    u^-(order+1)."""
    ctx = ExtendedContext(dps=dps)
    h = data.element(*h_index)
    w = data.w
    log_ws = 0
    for i in range(3):
        wi = w[i]
        if wi > 0:
            log_ws += ctx.real(wi) * ctx.log_real(ctx.real(wi))
        else:
            log_ws += ctx.real(wi) * (ctx.log_real(ctx.real(-wi)) + ctx.i * ctx.pi)
    sqrt_m2pi = ctx.i * ctx.sqrt_pos(2 * ctx.pi)
    devs = []
    for u in u_samples:
        uu = ctx.real(Fraction(u))
        lhs = (ctx.mp.gamma(uu * ctx.real(w[0]) + ctx.real(h.c[0]))
               * ctx.mp.gamma(uu * ctx.real(w[1]) + ctx.real(h.c[1]))
               / ctx.mp.gamma(-uu * ctx.real(w[2]) + 1 - ctx.real(h.c[2])))
        wfac = 1
        for i in range(3):
            wfac = wfac * _power_signed_hp(ctx, w[i], h.c[i] - Fraction(1, 2))
        c_inv = (sqrt_m2pi * ctx.cispi(-(ctx.real(w[2]) * uu + ctx.real(h.c[2])))
                 * uu ** ctx.real(Fraction(h.age) - Fraction(3, 2)) * wfac
                 * ctx.exp(uu * log_ws))
        expo = 0
        for mm in range(1, order + 1):
            c = Fraction(0)
            for i in range(3):
                c += bernoulli_poly(mm + 1, h.c[i]) / w[i] ** mm
            expo += ctx.real(Fraction((-1) ** (mm + 1), mm * (mm + 1)) * c) / uu ** mm
        rhs = c_inv * ctx.exp(expo)
        devs.append(float(ctx.abs(lhs - rhs) / ctx.abs(lhs)))
    return devs
