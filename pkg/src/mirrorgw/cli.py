"""Deterministic command-line front end.

Exit codes: 0 success, 2 invalid input, 3 series window exhausted,
4 verification failure.  All JSON output is key-sorted with numbers
printed to 17 significant digits, so equal configurations produce
byte-identical documents.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import checks, eo
from .amodel import f_gn_a
from .bmodel import BModel, f_gn_b
from .errors import CheckFailure, TruncationError, ValidationError
from .mirrormap import mirror_map_series
from .numerics import make_context
from .orbifold import OrbifoldInput, build_orbifold
from .potentials import fmt17
from .psi import psi_intersection


def _add_orbifold_args(p):
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--s", type=int, default=0)
    p.add_argument("--f", type=int, default=1)


def _add_common(p):
    p.add_argument("--precision", choices=("double", "extended"), default="double")
    p.add_argument("--output", choices=("json", "table"), default="json")
    p.add_argument("--workers", type=int,
                   default=int(os.environ.get("MIRRORGW_WORKERS", "1")),
                   help="accepted for interface stability; evaluation is "
                        "sequential and results are identical for any value")


def _emit(doc, args):
    if args.output == "table" and "coefficients" in doc:
        for row in doc["coefficients"]:
            tau = ",".join(str(t) for t in row["tau"])
            legs = " ".join(f"(d={leg['d']},k={leg['k']})" for leg in row["legs"])
            print(f"tau[{tau}] {legs}  {row['re']} {row['im']}")
    else:
        print(json.dumps(doc, sort_keys=True))


def _provenance(args, extra=None):
    keys = ("r", "m", "s", "f", "g", "n", "tau_degree", "max_winding",
            "precision", "side", "degree")
    out = {k: getattr(args, k) for k in keys if hasattr(args, k)}
    out.update(extra or {})
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="mirrorgw",
        description="Open-closed Gromov-Witten potentials of affine toric "
                    "Calabi-Yau 3-orbifolds, two independent ways")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("describe", help="derived orbifold data as JSON")
    _add_orbifold_args(p)
    _add_common(p)

    p = sub.add_parser("psi", help="exact psi-class intersection number")
    p.add_argument("--g", type=int, required=True)
    p.add_argument("--ks", type=str, required=True,
                   help="comma-separated heights, e.g. 1,0,2")

    p = sub.add_parser("fgn", help="open potential via a graph sum")
    _add_orbifold_args(p)
    _add_common(p)
    p.add_argument("--side", choices=("a", "b"), required=True)
    p.add_argument("--g", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--tau-degree", dest="tau_degree", type=int, default=0)
    p.add_argument("--max-winding", dest="max_winding", type=int, default=3)
    p.add_argument("--heights", type=int, default=None,
                   help="optional cap on the graph-sum series order")

    p = sub.add_parser("eo", help="spectral-curve recursion")
    _add_orbifold_args(p)
    _add_common(p)
    eo_sub = p.add_subparsers(dest="eo_cmd")
    p.add_argument("--g", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--max-winding", dest="max_winding", type=int, default=3)
    pc = eo_sub.add_parser("check", help="curve-level deviation tables")
    pc.add_argument("what", choices=("pants", "doss", "c-kernel", "theta"))

    p = sub.add_parser("mirrormap", help="flat-coordinate series")
    _add_orbifold_args(p)
    _add_common(p)
    p.add_argument("--degree", type=int, default=3)

    p = sub.add_parser("check", help="verification suites")
    _add_common(p)
    p.add_argument("what", nargs="?", default="all",
                   help="all or one of: " + ", ".join(checks.ALL_CHECKS))
    return ap


def _cmd_describe(args, ctx):
    data = build_orbifold(OrbifoldInput(args.r, args.m, args.s, args.f))
    print(json.dumps(data.to_json_dict()))
    return 0


def _cmd_psi(args):
    ks = tuple(int(x) for x in args.ks.split(","))
    val = psi_intersection(args.g, ks)
    print(f"{val.numerator}/{val.denominator}" if val.denominator != 1 else str(val.numerator))
    return 0


def _cmd_fgn(args, ctx):
    data = build_orbifold(OrbifoldInput(args.r, args.m, args.s, args.f))
    fn = f_gn_a if args.side == "a" else f_gn_b
    pot = fn(data, args.g, args.n, args.tau_degree, args.max_winding, ctx)
    doc = pot.to_json_dict(ctx)
    doc["provenance"] = _provenance(args)
    _emit(doc, args)
    return 0


def _cmd_eo(args, ctx):
    data = build_orbifold(OrbifoldInput(args.r, args.m, args.s, args.f))
    if getattr(args, "eo_cmd", None) == "check":
        curve = eo.build_spectral_curve(data, ctx)
        bm = BModel(data, ctx)
        rows = []
        if args.what == "pants":
            charts = tuple(("P", 0) for _ in range(3))
            w3 = eo.omega_gn(curve, 0, 3, charts)
            pants = None
            for gamma in range(curve.m):
                term = (curve.theta(gamma, 0, charts[0], "v0")
                        * curve.theta(gamma, 0, charts[1], "v1")
                        * curve.theta(gamma, 0, charts[2], "v2"))
                pants = term if pants is None else pants + term
            pants = pants.scaled(-1 / (2 * curve.branches[0].h1))
            rows.append(("omega03-vs-pants", eo.series_max_dev(w3, pants, ctx)))
        elif args.what == "doss":
            for (g, n) in ((0, 3), (1, 1), (1, 2)):
                charts = tuple(("P", 0) for _ in range(n))
                dev = eo.series_max_dev(
                    eo.omega_gn(curve, g, n, charts),
                    eo.doss_omega(curve, bm, g, n, charts), ctx)
                rows.append((f"omega{g}{n}-vs-graph-sum", dev))
        elif args.what == "c-kernel":
            rows.append(("annulus-kernel", eo.c_kernel_check(curve)))
        else:
            rows.append(("theta-ladder", eo.xi_ladder_check(curve, 1)))
            rows.append(("theta-antiderivative", eo.xi_antiderivative_check(curve, 2)))
        for name, dev in rows:
            print(f"{name:28s} max_dev={dev:.3e}")
        return 0
    if args.g is None or args.n is None:
        raise ValidationError("eo requires --g and --n (or the check subcommand)")
    curve = eo.build_spectral_curve(data, ctx)
    pot = eo.expand_potential(curve, args.g, args.n, args.max_winding)
    doc = pot.to_json_dict(ctx)
    doc["provenance"] = _provenance(args, {"zeta_window": curve.zwin,
                                           "x_window": curve.xwin})
    _emit(doc, args)
    return 0


def _cmd_mirrormap(args, ctx):
    data = build_orbifold(OrbifoldInput(args.r, args.m, args.s, args.f))
    mm = mirror_map_series(data, args.degree, ctx)
    doc = {
        "degree": args.degree,
        "p": mm.p,
        "forward": [
            [{"q": list(k), "re": fmt17(ctx.to_complex(v).real),
              "im": fmt17(ctx.to_complex(v).imag)}
             for k, v in sorted(series.items())]
            for series in mm.forward
        ],
        "inverse": [
            [{"tau": list(k), "re": fmt17(ctx.to_complex(v).real),
              "im": fmt17(ctx.to_complex(v).imag)}
             for k, v in sorted(series.items())]
            for series in mm.inverse
        ],
        "provenance": _provenance(args),
    }
    print(json.dumps(doc, sort_keys=True))
    return 0


def _cmd_check(args, ctx):
    names = None if args.what == "all" else [args.what]
    checks.run_checks(names, ctx=ctx)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.cmd == "psi":
            return _cmd_psi(args)
        ctx = make_context(args.precision)
        if args.cmd == "describe":
            return _cmd_describe(args, ctx)
        if args.cmd == "fgn":
            return _cmd_fgn(args, ctx)
        if args.cmd == "eo":
            return _cmd_eo(args, ctx)
        if args.cmd == "mirrormap":
            return _cmd_mirrormap(args, ctx)
        if args.cmd == "check":
            return _cmd_check(args, ctx)
        raise ValidationError(f"unknown command {args.cmd!r}")
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except TruncationError as exc:
        print(f"window error: {exc}", file=sys.stderr)
        return 3
    except CheckFailure as exc:
        print(f"check failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    raise SystemExit(main())
