"""Orchestrated verification suites.

Each check returns a dict with at least {name, passed, max_dev, detail};
`run_all` prints one line per check and collects failures.  Tolerances are
pinned here, once, and shared by the CLI and the acceptance tests.
"""

from __future__ import annotations

from fractions import Fraction

from .amodel import AModel, f_gn_a
from .bmodel import BModel, f_gn_b, f_series_value, f_via_oscillatory, stirling_check
from .errors import CheckFailure
from .graphs import enumerate_graphs
from .mirrormap import constraint_indices, mirror_map_series, roundtrip_deviation, _multi_indices
from .numerics import Context, DOUBLE
from .orbifold import OrbifoldData, OrbifoldInput, build_orbifold, class_dft
from .potentials import TWISTED
from .psi import psi_intersection
from . import eo

CATALOG = (
    OrbifoldInput(1, 1, 0, 1),
    OrbifoldInput(1, 1, 0, 2),
    OrbifoldInput(2, 1, 0, 1),
    OrbifoldInput(1, 2, 0, 1),
    OrbifoldInput(1, 3, 0, 1),
    OrbifoldInput(3, 1, 1, 1),
    OrbifoldInput(2, 2, 0, 1),
)

EO_CATALOG = (
    OrbifoldInput(1, 1, 0, 1),
    OrbifoldInput(1, 1, 0, 2),
    OrbifoldInput(1, 2, 0, 1),
    OrbifoldInput(1, 3, 0, 1),
)

MAIN_PAIRS = ((0, 1), (0, 2), (0, 3), (1, 1), (1, 2), (2, 1))

TOL_MAIN = 1e-8
TOL_MAIN_EXTENDED = 1e-12
TOL_PER_GRAPH = 1e-9
TOL_BRIDGE = 1e-12
TOL_SYMPLECTIC = 1e-12
TOL_EDGE_REMAINDER = 1e-11
TOL_EO = 1e-9
TOL_UNSTABLE = 1e-9
TOL_KERNELS = 1e-10
TOL_MIRRORMAP = 1e-12


def _result(name, passed, max_dev, detail=""):
    return {"name": name, "passed": bool(passed), "max_dev": float(max_dev),
            "detail": detail}


# -- criteria 1 and 2: main identity and per-graph identity -------------------
#
# Both run over the same decorated-graph sweep, so one pass computes the
# potentials (criterion 1) and the per-graph weight ratios (criterion 2).


def sweep_graph_sums(inputs=CATALOG, pairs=MAIN_PAIRS, tau_degree=2,
                     max_winding=5, ctx: Context = DOUBLE, tol_main=None,
                     tol_graph=TOL_PER_GRAPH, full_every=97, emit=None):
    from .potentials import PSI, PotentialSeries
    from .amodel import _accumulate
    tol_main = tol_main if tol_main is not None else (
        TOL_MAIN if ctx.name == "double" else TOL_MAIN_EXTENDED)
    worst_main = 0.0
    worst_graph = 0.0
    count = 0
    n_pots = 0
    for inp in inputs:
        data = build_orbifold(inp)
        am = AModel(data, ctx)
        bm = BModel(data, ctx)
        chars = data.character_indices()
        checked_legs = set()
        for (g, n) in pairs:
            order = 2 * (3 * g + n + tau_degree + 2) + 2
            sign = -1 if (g - 1) % 2 else 1
            pa = PotentialSeries(g, n, data.p, data.m, TWISTED)
            pb = PotentialSeries(g, n, data.p, data.m, PSI)
            for ell in range(tau_degree + 1):
                for graph in enumerate_graphs(data.order, g, n, ell):
                    ta, la = am.weight(graph, max_winding, order)
                    tb, lb = bm.weight(graph, max_winding, order)
                    _accumulate(pa, ta, la)
                    _accumulate(pb, tb, lb)
                    if not ta and not tb:
                        continue
                    count += 1
                    for key in set(ta) | set(tb):
                        a = ta.get(key, 0) * sign
                        b = tb.get(key, 0)
                        worst_graph = max(worst_graph, ctx.abs(a - b)
                                          / max(1.0, ctx.abs(a), ctx.abs(b)))
                    for j, (v, k) in enumerate(graph.open_leaves):
                        alpha = chars[graph.marking[v]]
                        if (alpha, k) in checked_legs:
                            continue
                        checked_legs.add((alpha, k))
                        worst_graph = max(worst_graph, _leg_identity_dev(
                            data, dict(la[j]), dict(lb[j]), ctx))
                    if count % full_every == 0:
                        worst_graph = max(worst_graph, _full_graph_dev(
                            data, g, n, ta, la, tb, lb, ctx))
            # unstable closed-form parts complete the potentials
            pa = pa + _unstable_a(data, g, n, tau_degree, max_winding, ctx, am)
            pb = pb + _unstable_b(data, g, n, tau_degree, max_winding, ctx, bm)
            factor = (-1) ** (g - 1 + n) * data.order ** n
            dev = pb.to_basis(TWISTED, ctx).max_deviation(pa.scaled(factor), ctx)
            worst_main = max(worst_main, dev)
            n_pots += 1
            if emit:
                emit(f"  F[{inp.r},{inp.m},{inp.s},{inp.f}] (g,n)=({g},{n})"
                     f"  dev={dev:.3e}")
    main = _result("main-identity", worst_main <= tol_main, worst_main,
                   f"{n_pots} potentials compared")
    graph = _result("per-graph-identity", worst_graph <= tol_graph, worst_graph,
                    f"{count} graphs compared")
    return main, graph


def _unstable_a(data, g, n, tau_degree, max_winding, ctx, am):
    """Closed-form moduli-constant parts of the A-side disk and annulus."""
    from .potentials import PotentialSeries
    out = PotentialSeries(g, n, data.p, data.m, TWISTED)
    if (g, n) == (0, 1):
        zero = tuple([0] * data.p)
        for (key, val) in am.phi_table(data.element(0, 0).index, -2, max_winding):
            out.add(zero, (key,), val)
        if tau_degree >= 1:
            for entry in data.age1:
                expo = [0] * data.p
                expo[entry.a - 1] = 1
                for (key, val) in am.phi_table((entry.j, entry.l), -1, max_winding):
                    out.add(tuple(expo), (key,), val)
    elif (g, n) == (0, 2):
        zero = tuple([0] * data.p)
        scale = ctx.real(Fraction(1, data.order ** 2) / am.w_prod)
        for gamma in data.character_indices():
            tab = am.xi_tilde(gamma, 0, max_winding)
            for (k1, v1) in tab:
                for (k2, v2) in tab:
                    out.add(zero, (k1, k2), scale * v1 * v2 / (k1[0] + k2[0]))
    return out


def _unstable_b(data, g, n, tau_degree, max_winding, ctx, bm):
    from .potentials import PSI, PotentialSeries
    out = PotentialSeries(g, n, data.p, data.m, PSI)
    if (g, n) not in ((0, 1), (0, 2)):
        return out
    if eo.supports(data):
        curve = eo.build_spectral_curve(data, ctx)
        extra = (eo.disk_potential(curve, max_winding) if (g, n) == (0, 1)
                 else eo.annulus_potential(curve, max_winding))
        if (g, n) == (0, 1) and tau_degree >= 1 and data.p:
            tau_part = bm.disk_extras(tau_degree, max_winding)
            tau_part.coeffs = {k: v for k, v in tau_part.coeffs.items()
                               if sum(k[0]) >= 1}
            extra = extra + tau_part
        return extra
    return (bm.disk_extras(tau_degree, max_winding) if (g, n) == (0, 1)
            else bm.annulus_extras(max_winding))


def check_main_identity(**kwargs):
    main, _graph = sweep_graph_sums(**kwargs)
    return main


def check_per_graph(**kwargs):
    _main, graph = sweep_graph_sums(**kwargs)
    return graph


def check_main_and_graphs(**kwargs):
    return sweep_graph_sums(**kwargs)


def _leg_identity_dev(data, leg_a: dict, leg_b: dict, ctx) -> float:
    """(L^xi) = -|G| (L^xi-tilde), comparing in the twisted basis."""
    m = data.m
    worst = 0.0
    ds = sorted({d for (d, _c) in leg_a} | {d for (d, _c) in leg_b})
    for d in ds:
        vec_b = [leg_b.get((d, ell), 0) for ell in range(m)]
        tw = class_dft(vec_b, m, ctx)
        for c in range(m):
            a = -data.order * leg_a.get((d, c), 0)
            b = tw[c]
            worst = max(worst, ctx.abs(a - b) / max(1.0, ctx.abs(a), ctx.abs(b)))
    return worst


def _full_graph_dev(data, g, n, ta, la, tb, lb, ctx) -> float:
    from .potentials import PSI, PotentialSeries
    from .amodel import _accumulate
    pa = PotentialSeries(g, n, data.p, data.m, TWISTED)
    _accumulate(pa, ta, la)
    pb = PotentialSeries(g, n, data.p, data.m, PSI)
    _accumulate(pb, tb, lb)
    factor = (-1) ** (g - 1 + n) * data.order ** n
    return pb.to_basis(TWISTED, ctx).max_deviation(pa.scaled(factor), ctx)


# -- criteria 3 and 4: R/f bridge and symplectic edges -------------------------


def check_bridge(inputs=CATALOG, orders=8, ctx: Context = DOUBLE, tol=TOL_BRIDGE):
    worst = 0.0
    for inp in inputs:
        data = build_orbifold(inp)
        R = AModel(data, ctx).r_matrix(orders)
        F = BModel(data, ctx).f_matrix(orders)
        for alpha in data.character_indices():
            for beta in data.character_indices():
                for k in range(orders + 1):
                    lhs = R[(beta, alpha)][k] * (-1 if k % 2 else 1)
                    worst = max(worst, ctx.abs(lhs - F[(alpha, beta)][k]))
    return _result("laplace-bridge", worst <= tol, worst)


def check_symplectic(inputs=CATALOG, order=8, ctx: Context = DOUBLE,
                     tol=TOL_SYMPLECTIC, tol_remainder=TOL_EDGE_REMAINDER):
    """sum_g R(z)^g_a R(-z)^g_b = delta_ab through z^order, and vanishing of
    the edge numerator delta - sum_g R(-z)^g_a R(-w)^g_b on w = -z."""
    worst = 0.0
    worst_rem = 0.0
    for inp in inputs:
        data = build_orbifold(inp)
        chars = data.character_indices()
        R = AModel(data, ctx).r_matrix(order)
        for a in chars:
            for b in chars:
                for k in range(order + 1):
                    s = 0
                    rem = 0
                    for gam in chars:
                        for i in range(k + 1):
                            term = R[(gam, a)][i] * R[(gam, b)][k - i]
                            s += -term if (k - i) % 2 else term
                            rem += -term if i % 2 else term
                    target = 1.0 if (a == b and k == 0) else 0.0
                    worst = max(worst, ctx.abs(s - target))
                    worst_rem = max(worst_rem, ctx.abs(target - rem))
    passed = worst <= tol and worst_rem <= tol_remainder
    return _result("symplectic", passed, max(worst, worst_rem),
                   f"identity {worst:.2e}, on-locus remainder {worst_rem:.2e}")


# -- criterion 5: asymptotics --------------------------------------------------


def check_stirling(inputs=CATALOG, order=4, u_samples=(20, 40, 80), factor=3.0):
    worst_ratio_err = 0.0
    count = 0
    for inp in inputs:
        data = build_orbifold(inp)
        for h in data.elements:
            devs = stirling_check(data, h.index, u_samples, order)
            count += 1
            for i in range(len(devs) - 1):
                ratio = devs[i] / devs[i + 1] if devs[i + 1] else float("inf")
                target = 2.0 ** (order + 1)
                off = max(ratio / target, target / ratio)
                worst_ratio_err = max(worst_ratio_err, off)
    return _result("stirling-ladder", worst_ratio_err <= factor, worst_ratio_err,
                   f"{count} group-element classes, ratio-to-2^{order + 1} "
                   f"within x{worst_ratio_err:.2f}")


def check_oscillatory(inputs=EO_CATALOG, order=6, u_samples=(20, 40)):
    """Laplace-transform reconstruction: deviation from the truncated series
    shrinks at the series' asymptotic rate (factor 2^(order+1) per doubling,
    within a factor 4)."""
    worst = 0.0
    for inp in inputs:
        data = build_orbifold(inp)
        bm = BModel(data)
        chars = data.character_indices()
        for alpha in chars[:2]:
            for beta in chars[:2]:
                devs = []
                for u in u_samples:
                    recon = f_via_oscillatory(data, alpha, beta, u)
                    series = f_series_value(bm, alpha, beta, u, order)
                    devs.append(abs(complex(recon) - complex(series)))
                if devs[-1] == 0:
                    continue
                ratio = devs[0] / devs[-1]
                target = 2.0 ** (order + 1)
                worst = max(worst, max(ratio / target, target / ratio))
    return _result("oscillatory-f", worst <= 4.0, worst,
                   "reconstruction decay ratio vs truncation order")


# -- criteria 6-8: spectral-curve engine ---------------------------------------


def _curve(inp, ctx=DOUBLE):
    data = build_orbifold(inp)
    return data, eo.build_spectral_curve(data, ctx)


def check_eo_recursion(inputs=EO_CATALOG, pairs=((0, 3), (0, 4), (1, 1), (1, 2), (2, 1)),
                       ctx: Context = DOUBLE, tol=TOL_EO):
    worst = 0.0
    for inp in inputs:
        data, curve = _curve(inp, ctx)
        bm = BModel(data, ctx)
        # pants calibration
        charts3 = tuple(("P", 0) for _ in range(3))
        w3 = eo.omega_gn(curve, 0, 3, charts3)
        pants = None
        for gamma in range(curve.m):
            term = (curve.theta(gamma, 0, charts3[0], "v0")
                    * curve.theta(gamma, 0, charts3[1], "v1")
                    * curve.theta(gamma, 0, charts3[2], "v2"))
            pants = term if pants is None else pants + term
        pants = pants.scaled(-1 / (2 * curve.branches[0].h1))
        worst = max(worst, eo.series_max_dev(w3, pants, ctx))
        for (g, n) in pairs:
            for labels in _chart_samples(curve.m, n):
                charts = tuple(("P", l) for l in labels)
                w = eo.omega_gn(curve, g, n, charts)
                doss = eo.doss_omega(curve, bm, g, n, charts)
                worst = max(worst, eo.series_max_dev(w, doss, ctx))
    return _result("eo-recursion-vs-graph-sum", worst <= tol, worst)


def _chart_samples(m, n):
    """All puncture labelings when few, else a small staggered sample."""
    import itertools
    if m ** n <= 4:
        return list(itertools.product(range(m), repeat=n))
    out = {tuple((j + k) % m for k in range(n)) for j in range(m)}
    out.add(tuple(0 for _ in range(n)))
    return sorted(out)[:4]


def check_unstable(inputs=EO_CATALOG, max_winding=6, tau_degree=1,
                   ctx: Context = DOUBLE, tol=TOL_UNSTABLE):
    """Disk and annulus identities between the curve potentials and the
    descendant closed forms."""
    worst = 0.0
    for inp in inputs:
        data, curve = _curve(inp, ctx)
        am = AModel(data, ctx)
        bm = BModel(data, ctx)
        disk_b = eo.disk_potential(curve, max_winding)
        if tau_degree >= 1 and data.p:
            tau_part = bm.disk_extras(tau_degree, max_winding)
            tau_part.coeffs = {k: v for k, v in tau_part.coeffs.items()
                               if sum(k[0]) >= 1}
            disk_b = disk_b + tau_part
        disk_a = f_gn_a(data, 0, 1, tau_degree, max_winding, ctx, model=am)
        dev = disk_b.to_basis(TWISTED, ctx).max_deviation(
            disk_a.scaled(data.order), ctx)
        worst = max(worst, dev)
        ann_b = eo.annulus_potential(curve, max_winding)
        ann_a = f_gn_a(data, 0, 2, 0, max_winding, ctx, model=am)
        dev = ann_b.to_basis(TWISTED, ctx).max_deviation(
            ann_a.scaled(-data.order ** 2), ctx)
        worst = max(worst, dev)
    return _result("unstable-disk-annulus", worst <= tol, worst)


def check_kernels(inputs=EO_CATALOG, ctx: Context = DOUBLE, tol=TOL_KERNELS):
    """Lemma identities on the curve: the annulus kernel closed form, the
    theta ladder, and its antiderivative resummation."""
    worst = 0.0
    for inp in inputs:
        data, curve = _curve(inp, ctx)
        worst = max(worst, eo.c_kernel_check(curve))
        worst = max(worst, eo.xi_ladder_check(curve, max_k=1))
        worst = max(worst, eo.xi_antiderivative_check(curve, max_k=2))
    return _result("curve-kernel-lemmas", worst <= tol, worst)


# -- criterion 9: psi values ---------------------------------------------------


def check_psi(max_g=3, max_n=5):
    from itertools import combinations_with_replacement
    worst_exact = 0
    for g in range(0, max_g + 1):
        for n in range(1, max_n + 1):
            if 2 * g - 2 + n <= 0:
                continue
            dim = 3 * g - 3 + n
            if dim < 0:
                continue
            for ks in combinations_with_replacement(range(dim + 1), n):
                if sum(ks) != dim:
                    continue
                val = psi_intersection(g, ks)
                # string
                ks_str = tuple(list(ks) + [0])
                lhs = psi_intersection(g, ks_str)
                rhs = sum((psi_intersection(g, ks[:j] + (ks[j] - 1,) + ks[j + 1:])
                           for j in range(n) if ks[j] >= 1), Fraction(0))
                if lhs != rhs:
                    worst_exact += 1
                # dilaton
                ks_dil = tuple(list(ks) + [1])
                if psi_intersection(g, ks_dil) != (2 * g - 2 + n) * val:
                    worst_exact += 1
    return _result("psi-string-dilaton", worst_exact == 0, float(worst_exact),
                   "exact rational identities")


# -- criterion 10: structural counts -------------------------------------------


def check_structure(inputs=CATALOG, ctx: Context = DOUBLE):
    bad = 0
    for inp in inputs:
        data = build_orbifold(inp)
        if len(data.elements) != data.order:
            bad += 1
        if 1 + data.p + data.genus != data.order:
            bad += 1
        if data.punctures != data.p - data.genus + 3:
            bad += 1
        ages = [h.age for h in data.elements]
        if ages.count(0) != 1 or ages.count(1) != data.p or ages.count(2) != data.genus:
            bad += 1
        # character orthogonality, exact in turn fractions
        chars = data.character_indices()
        for a in chars:
            for b in chars:
                acc = {}
                for h in data.elements:
                    t = data.character_turn(a, data.inverse(h)) + data.character_turn(b, h)
                    t = t - int(t)
                    acc[t] = acc.get(t, 0) + 1
                if a == b:
                    if set(acc) != {Fraction(0)} or acc[Fraction(0)] != data.order:
                        bad += 1
                else:
                    total = sum(cnt * ctx.cis(t) for t, cnt in acc.items())
                    if ctx.abs(total) > 1e-12 * data.order:
                        bad += 1
        if eo.supports(data):
            curve = eo.build_spectral_curve(data, ctx)
            if len(curve.branches) != data.order:
                bad += 1
            if len(curve.punctures) != data.m:
                bad += 1
    return _result("structure-counts", bad == 0, float(bad))


# -- criterion 11: mirror map ---------------------------------------------------


def check_mirror_map(inputs=CATALOG, degree=4, brute_degree=6,
                     ctx: Context = DOUBLE, tol=TOL_MIRRORMAP):
    worst = 0.0
    bad_filter = 0
    for inp in inputs:
        data = build_orbifold(inp)
        if data.p == 0:
            continue
        mm = mirror_map_series(data, degree, ctx)
        for a in range(data.p):
            unit = tuple(1 if i == a else 0 for i in range(data.p))
            worst = max(worst, ctx.abs(mm.forward[a].get(unit, 0) - 1.0))
        worst = max(worst, roundtrip_deviation(mm, ctx))
        # brute-force filter equality
        h_list = [data.element(e.j, e.l) for e in data.age1]
        fast = set(constraint_indices(data, brute_degree))
        slow = set()
        for d in _multi_indices(data.p, brute_degree):
            ok = True
            for i in range(3):
                s = Fraction(0)
                for b, db in enumerate(d):
                    s += db * h_list[b].c[i]
                if s != int(s):
                    ok = False
                    break
            if ok:
                slow.add(d)
        if fast != slow:
            bad_filter += 1
    passed = worst <= tol and bad_filter == 0
    return _result("mirror-map", passed, worst,
                   f"roundtrip and unit coefficients; filter mismatches {bad_filter}")


# -- runner --------------------------------------------------------------------


ALL_CHECKS = {
    "structure": check_structure,
    "psi": check_psi,
    "bridge": check_bridge,
    "symplectic": check_symplectic,
    "edges": None,   # filled below
    "xi": None,
    "stirling": check_stirling,
    "oscillatory": check_oscillatory,
    "kernels": check_kernels,
    "eo": check_eo_recursion,
    "unstable": check_unstable,
    "graphs": check_per_graph,
    "main": check_main_identity,
    "mirrormap": check_mirror_map,
}


def check_edges(inputs=CATALOG, max_index=4, ctx: Context = DOUBLE, tol=1e-11):
    worst = 0.0
    for inp in inputs:
        data = build_orbifold(inp)
        E = AModel(data, ctx).edge_table(max_index)
        B = BModel(data, ctx).b_check_table(max_index)
        for key in E:
            for kl in E[key]:
                worst = max(worst, ctx.abs(E[key][kl] - B[key][kl]))
        # symmetry of the B side
        chars = data.character_indices()
        for a in chars:
            for b in chars:
                for k in range(max_index + 1):
                    for l in range(max_index + 1):
                        worst = max(worst, ctx.abs(
                            B[(a, b)][(k, l)] - B[(b, a)][(l, k)]))
    return _result("edge-coefficients", worst <= tol, worst)


def check_xi(inputs=CATALOG, max_winding=5, ctx: Context = DOUBLE, tol=1e-11):
    """xi-hat = sqrt(-2/(w1 w2 w3)) xi-tilde, uniformly over legs/classes."""
    from .orbifold import class_dft_inv
    worst = 0.0
    for inp in inputs:
        data = build_orbifold(inp)
        am = AModel(data, ctx)
        bm = BModel(data, ctx)
        target = ctx.sqrt_pos(ctx.real(Fraction(-2) / (data.w[0] * data.w[1] * data.w[2])))
        for beta in data.character_indices():
            xt = dict(am.xi_tilde(beta, 0, max_winding))
            xh = dict(bm.xi_hat(beta, 0, max_winding))
            for d in range(1, max_winding + 1):
                vec = [xt.get((d, c), 0) for c in range(data.m)]
                psi_vec = class_dft_inv(vec, data.m, ctx)
                for ell in range(data.m):
                    a = xh.get((d, ell), 0)
                    b = psi_vec[ell] * target
                    worst = max(worst, ctx.abs(a - b) / max(1.0, ctx.abs(a), ctx.abs(b)))
    return _result("xi-proportionality", worst <= tol, worst)


ALL_CHECKS["edges"] = check_edges
ALL_CHECKS["xi"] = check_xi


def run_checks(names=None, ctx: Context = DOUBLE, emit=print, **overrides):
    """Run the named suites (all by default); returns the report list and
    raises CheckFailure if any fails.

    When both "main" and "graphs" are requested they share one sweep.
    """
    names = list(names or ALL_CHECKS)
    reports = []
    failed = []

    def _emit_report(report):
        reports.append(report)
        status = "pass" if report["passed"] else "FAIL"
        emit(f"{report['name']:32s} {status}  max_dev={report['max_dev']:.3e}  {report['detail']}")
        if not report["passed"]:
            failed.append(report["name"])

    combined = "main" in names and "graphs" in names
    for name in names:
        if combined and name == "graphs":
            continue
        fn = ALL_CHECKS.get(name)
        if fn is None:
            raise CheckFailure(f"unknown check {name!r}")
        kwargs = dict(overrides.get(name, {}))
        if combined and name == "main":
            main, graph = sweep_graph_sums(ctx=ctx, **kwargs)
            _emit_report(main)
            _emit_report(graph)
            continue
        if "ctx" in fn.__code__.co_varnames:
            kwargs.setdefault("ctx", ctx)
        _emit_report(fn(**kwargs))
    if failed:
        raise CheckFailure("failing checks: " + ", ".join(failed))
    return reports
