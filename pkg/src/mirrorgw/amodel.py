"""A-model pipeline: disk function, descendant leg series, canonical
R-matrix, decorated-graph weights, and the assembled open potentials.

Ingredients used here (disk Gamma factors, Bernoulli R-matrix, xi-tilde
tables) are deliberately disjoint from the B-model stack in
:mod:`mirrorgw.bmodel`; the two meet only in the acceptance comparisons.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

from .errors import TruncationError, ValidationError
from .exact import bernoulli_poly, floor_frac, is_nonpositive_integer
from .graphs import DecoratedGraph, enumerate_graphs
from .numerics import Context, DOUBLE
from .orbifold import OrbifoldData
from .potentials import TWISTED, PotentialSeries
from .psi import psi_intersection
from .series import divide_by_z_plus_w


def disk_function(data: OrbifoldData, d0: int, k: int, ctx: Context = DOUBLE):
    """Winding-d0, class-k disk factor D'(d0, k).

    Exactly zero when a denominator Gamma argument is a non-positive
    integer (reciprocal-Gamma semantics); the sign (-1)^floor(d0 w3 + k/m)
    is taken from the exact rational floor.
    """
    if d0 <= 0:
        raise ValidationError(f"winding must be positive, got {d0}")
    h = data.element_of_winding(d0, k)
    w1, w2, w3 = data.w
    den1 = d0 * w1 - h.c[0] + 1
    den2 = d0 * w2 - h.c[1] + 1
    if is_nonpositive_integer(den1) or is_nonpositive_integer(den2):
        return 0
    num = d0 * (w1 + w2) + h.c[2]
    sign = -1 if floor_frac(d0 * w3 + Fraction(k, data.m)) % 2 else 1
    val = ctx.gamma(num) / (ctx.gamma(den1) * ctx.gamma(den2))
    scale = Fraction(-sign, data.m) * Fraction(1, d0) ** (h.age - 1)
    return ctx.real(scale) * val


def _leg_sign(data: OrbifoldData, k: int, ctx: Context):
    """The class-k leg carries -(-1)^{-k/m} = -exp(-i pi k / m)."""
    return -ctx.cispi(Fraction(-k, data.m))


class AModel:
    """Cached per-orbifold A-model tables (all tau-independent parts)."""

    def __init__(self, data: OrbifoldData, ctx: Context = DOUBLE):
        self.data = data
        self.ctx = ctx
        w1, w2, w3 = data.w
        self.w_prod = w1 * w2 * w3
        # |G| sqrt(w1 w2 w3) with the fixed branch i sqrt|.|
        self.vertex_base = data.order * ctx.sqrt_signed(self.w_prod)

    # -- R-matrix ---------------------------------------------------------

    @lru_cache(maxsize=None)
    def _element_exponential(self, h_index: tuple, order: int) -> tuple:
        """Exact rational coefficients of exp(sum_m (-1)^m/(m(m+1))
        sum_i B_{m+1}(c_i(h)) (z/w_i)^m) through z^order."""
        h = self.data.element(*h_index)
        expo = [Fraction(0)] * (order + 1)
        for mm in range(1, order + 1):
            c = Fraction(0)
            for i in range(3):
                c += bernoulli_poly(mm + 1, h.c[i]) / self.data.w[i] ** mm
            expo[mm] = Fraction((-1) ** mm, mm * (mm + 1)) * c
        out = [Fraction(0)] * (order + 1)
        out[0] = Fraction(1)
        term = [Fraction(0)] * (order + 1)
        term[0] = Fraction(1)
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
            if all(x == 0 for x in term):
                break
        return tuple(out)

    @lru_cache(maxsize=None)
    def r_matrix(self, order: int) -> dict:
        """R(z)^alpha_beta coefficients: dict (alpha, beta) -> tuple of
        complex, index = power of z.  R(0) is the identity."""
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

    # -- descendant leg series --------------------------------------------

    @lru_cache(maxsize=None)
    def _winding_atoms(self, D: int) -> dict:
        """(d0, k) -> (element index, D'(d0,k) * leg sign) for d0 <= D."""
        data, ctx = self.data, self.ctx
        out = {}
        for d0 in range(1, D + 1):
            for k in range(data.m):
                h = data.element_of_winding(d0, k)
                val = disk_function(data, d0, k, ctx) * _leg_sign(data, k, ctx)
                out[(d0, k)] = (h.index, val)
        return out

    @lru_cache(maxsize=None)
    def _w_factor(self, h_index: tuple) -> complex:
        """prod_i w_i^{1 - c_i(h)} under the +pi branch for w3."""
        h = self.data.element(*h_index)
        out = 1
        for i in range(3):
            out = out * self.ctx.power_signed(self.data.w[i], 1 - h.c[i])
        return out

    @lru_cache(maxsize=None)
    def phi_table(self, h_index: tuple, a: int, D: int) -> tuple:
        """Phi^h_a as ((d, class), coeff) pairs; class indexes 1'_{c/m}."""
        if a < -2:
            raise ValidationError("descendant ladder index below -2 is unused")
        data = self.data
        items = []
        for (d0, k), (hidx, atom) in self._winding_atoms(D).items():
            if hidx != h_index or atom == 0:
                continue
            c = (-k) % data.m
            items.append(((d0, c), atom * self.ctx.real(Fraction(d0) ** a) / data.order))
        return tuple(items)

    @lru_cache(maxsize=None)
    def xi_tilde(self, gamma: tuple, a: int, D: int) -> tuple:
        """xi-tilde^gamma_a leg series as ((d, class), coeff) pairs.

        Includes the |G| prefactor, the character sum over G, and the
        w-power factors; the a-ladder is realized by d0^a.
        """
        if a < -2:
            raise ValidationError("descendant ladder index below -2 is unused")
        data, ctx = self.data, self.ctx
        acc: dict = {}
        for (d0, k), (hidx, atom) in self._winding_atoms(D).items():
            if atom == 0:
                continue
            h = data.element(*hidx)
            hinv = data.inverse(h)
            chi = ctx.cis(data.character_turn(gamma, hinv))
            c = (-k) % data.m
            val = chi * self._w_factor(hidx) * atom * ctx.real(Fraction(d0) ** a)
            key = (d0, c)
            acc[key] = acc.get(key, 0) + val
        return tuple(sorted(acc.items()))

    # -- graph weight ingredients -----------------------------------------

    @lru_cache(maxsize=None)
    def edge_table(self, K: int) -> dict:
        """Edge weights E^{alpha,beta}_{k,l} for k, l <= K."""
        order = 2 * K + 2
        R = self.r_matrix(order)
        chars = self.data.character_indices()
        out = {}
        for alpha in chars:
            for beta in chars:
                p = {}
                for i in range(order + 1):
                    for j in range(order + 1):
                        s = 0
                        for gamma in chars:
                            s += R[(gamma, alpha)][i] * R[(gamma, beta)][j]
                        s = s if (i + j) % 2 == 0 else -s
                        p[(i, j)] = -s
                p[(0, 0)] = p[(0, 0)] + (1 if alpha == beta else 0)
                out[(alpha, beta)] = divide_by_z_plus_w(p, K, order)
        return out

    @lru_cache(maxsize=None)
    def open_leaf(self, alpha: tuple, k: int, D: int, order: int) -> dict:
        """(L^xi-tilde)^alpha_k leg series as {(d, class): coeff}."""
        R = self.r_matrix(order)
        if k > order:
            raise TruncationError(f"open leaf height {k} exceeds R order {order}")
        acc: dict = {}
        for beta in self.data.character_indices():
            for a in range(0, k + 1):
                r = R[(beta, alpha)][k - a]
                if (k - a) % 2 == 1:
                    r = -r
                if r == 0:
                    continue
                for key, val in self.xi_tilde(beta, a, D):
                    acc[key] = acc.get(key, 0) + r * val
        scale = 1 / self.vertex_base
        return {key: v * scale for key, v in acc.items()}

    @lru_cache(maxsize=None)
    def primary_leaf(self, alpha: tuple, k: int, order: int) -> list:
        """(L^tau)^alpha_k as a vector over the age-1 index a."""
        data, ctx = self.data, self.ctx
        R = self.r_matrix(order)
        out = []
        for entry in data.age1:
            h_a = data.element(entry.j, entry.l)
            wfac = 1
            for i in range(3):
                wfac = wfac * ctx.power_signed(data.w[i], h_a.c[i])
            s = 0
            for beta in data.character_indices():
                r = R[(beta, alpha)][k]
                if k % 2 == 1:
                    r = -r
                s += r * ctx.cis(data.character_turn(beta, h_a))
            out.append(wfac * s / self.vertex_base)
        return out

    @lru_cache(maxsize=None)
    def dilaton_leaf(self, alpha: tuple, k: int, order: int):
        """(L^1)^alpha_k = [z^{k-1}] of -(1/|G| sqrt w) sum_beta R(-z)^beta_alpha."""
        if k < 2:
            raise ValidationError("dilaton leaves need height >= 2")
        R = self.r_matrix(order)
        s = 0
        for beta in self.data.character_indices():
            s += R[(beta, alpha)][k - 1]
        if (k - 1) % 2 == 1:
            s = -s
        return -s / self.vertex_base

    # -- full graph weight ---------------------------------------------------

    @lru_cache(maxsize=None)
    def _psi_real(self, g: int, heights: tuple):
        psi = psi_intersection(g, heights)
        return None if psi == 0 else self.ctx.real(psi)

    @lru_cache(maxsize=None)
    def _base_pow(self, k: int):
        return self.vertex_base ** k

    @lru_cache(maxsize=None)
    def open_leaf_items(self, alpha: tuple, k: int, D: int, order: int) -> tuple:
        return tuple(sorted(self.open_leaf(alpha, k, D, order).items()))

    def weight(self, graph: DecoratedGraph, D: int, order: int) -> tuple:
        """Weight of one decorated graph, divided by |Aut|.

        Returns (tau_poly, leg_tables): tau_poly maps tau multi-exponents
        to scalar factors (vertex/edge/dilaton parts included), leg_tables
        is the per-open-leaf list of {(d, class): coeff}.
        """
        data = self.data
        chars = data.character_indices()
        scalar = 1
        for v, heights in enumerate(graph.heights_by_vertex()):
            gv = graph.genus[v]
            psi = self._psi_real(gv, heights)
            if psi is None:
                return ({}, [])
            scalar = scalar * psi * self._base_pow(2 * gv - 2 + len(heights))

        if graph.edges:
            K = max(k for e in graph.edges for k in (e[2], e[3]))
            edges = self.edge_table(K)
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

        leg_tables = [self.open_leaf_items(chars[graph.marking[v]], k, D, order)
                      for (v, k) in graph.open_leaves]
        return (tau_poly, leg_tables)


def _accumulate(potential: PotentialSeries, tau_poly: dict, leg_tables: list) -> None:
    """Accumulate a graph weight into the coefficient map (hot path:
    writes potential.coeffs directly)."""
    if not tau_poly:
        return
    coeffs = potential.coeffs
    legs_enum = [t.items() if isinstance(t, dict) else t for t in leg_tables]
    n = len(legs_enum)

    def rec(i, legs, factor):
        if i == n:
            for expo, coef in tau_poly.items():
                key = (expo, legs)
                coeffs[key] = coeffs.get(key, 0) + coef * factor
            return
        for (key, val) in legs_enum[i]:
            if val != 0:
                rec(i + 1, legs + (key,), factor * val)

    rec(0, (), 1)


def f_gn_a(data: OrbifoldData, g: int, n: int, tau_degree: int, max_winding: int,
           ctx: Context = DOUBLE, model: AModel | None = None) -> PotentialSeries:
    """A-model potential F_{g,n} through the requested windows.

    Sums decorated-graph weights over primary-leaf counts 0..tau_degree and
    adds the closed-form unstable parts for (g, n) = (0, 1) and (0, 2).
    """
    if tau_degree < 0 or max_winding < 1:
        raise ValidationError("windows must be positive")
    model = model or AModel(data, ctx)
    pot = PotentialSeries(g, n, data.p, data.m, TWISTED,
                          meta={"side": "a", "tau_degree": tau_degree,
                                "max_winding": max_winding})
    order = 2 * (3 * g + n + tau_degree + 2) + 2
    for ell in range(tau_degree + 1):
        for graph in enumerate_graphs(data.order, g, n, ell):
            tau_poly, leg_tables = model.weight(graph, max_winding, order)
            _accumulate(pot, tau_poly, leg_tables)

    if (g, n) == (0, 1):
        zero = tuple([0] * data.p)
        for (key, val) in model.phi_table(data.element(0, 0).index, -2, max_winding):
            pot.add(zero, (key,), val)
        for entry in data.age1:
            if tau_degree < 1:
                break
            expo = [0] * data.p
            expo[entry.a - 1] = 1
            for (key, val) in model.phi_table((entry.j, entry.l), -1, max_winding):
                pot.add(tuple(expo), (key,), val)
    elif (g, n) == (0, 2):
        zero = tuple([0] * data.p)
        scale = ctx.real(Fraction(1, data.order ** 2) / model.w_prod)
        for gamma in data.character_indices():
            tab = model.xi_tilde(gamma, 0, max_winding)
            for (k1, v1) in tab:
                for (k2, v2) in tab:
                    d1, d2 = k1[0], k2[0]
                    pot.add(zero, (k1, k2), scale * v1 * v2 / (d1 + d2))
    return pot
