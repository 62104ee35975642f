"""H*_CR(B mu_m)-valued coefficient tables for the open-closed potentials.

A PotentialSeries maps (tau multi-degree, per-leg (winding, class)) to a
complex coefficient.  The class index is read in the basis named by
``basis``: "twisted" indexes the twisted-sector generators 1'_{k/m},
"psi" the idempotent basis.  Conversion between the two applies the
class DFT leg by leg.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import ValidationError
from .numerics import Context, DOUBLE
from .orbifold import class_dft, class_dft_inv

TWISTED = "twisted"
PSI = "psi"


@dataclass
class PotentialSeries:
    g: int
    n: int
    p: int
    m: int
    basis: str
    coeffs: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def key(self, tau, legs):
        tau = tuple(tau)
        legs = tuple((int(d), int(k)) for (d, k) in legs)
        if len(tau) != self.p or len(legs) != self.n:
            raise ValidationError("potential key shape mismatch")
        return (tau, legs)

    def add(self, tau, legs, value):
        k = self.key(tau, legs)
        self.coeffs[k] = self.coeffs.get(k, 0) + value

    def get(self, tau, legs):
        return self.coeffs.get(self.key(tau, legs), 0)

    def scaled(self, factor) -> "PotentialSeries":
        out = PotentialSeries(self.g, self.n, self.p, self.m, self.basis,
                              meta=dict(self.meta))
        out.coeffs = {k: v * factor for k, v in self.coeffs.items()}
        return out

    def __add__(self, other: "PotentialSeries") -> "PotentialSeries":
        if (self.g, self.n, self.p, self.m, self.basis) != (other.g, other.n, other.p, other.m, other.basis):
            raise ValidationError("incompatible potentials")
        out = PotentialSeries(self.g, self.n, self.p, self.m, self.basis,
                              meta=dict(self.meta))
        out.coeffs = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out.coeffs[k] = out.coeffs.get(k, 0) + v
        return out

    # -- basis conversion ------------------------------------------------

    def to_basis(self, basis: str, ctx: Context = DOUBLE) -> "PotentialSeries":
        if basis == self.basis:
            return self
        if {basis, self.basis} != {TWISTED, PSI}:
            raise ValidationError(f"unknown basis {basis!r}")
        transform = class_dft if basis == TWISTED else class_dft_inv
        # convert one leg at a time
        coeffs = self.coeffs
        for leg in range(self.n):
            grouped: dict = {}
            for (tau, legs), v in coeffs.items():
                d, k = legs[leg]
                rest = (tau, legs[:leg] + legs[leg + 1:], d)
                grouped.setdefault(rest, [0] * self.m)[k] += v
            out: dict = {}
            for (tau, other_legs, d), vec in grouped.items():
                new_vec = transform(vec, self.m, ctx)
                for k, v in enumerate(new_vec):
                    if v == 0:
                        continue
                    legs = other_legs[:leg] + ((d, k),) + other_legs[leg:]
                    out[(tau, legs)] = out.get((tau, legs), 0) + v
            coeffs = out
        res = PotentialSeries(self.g, self.n, self.p, self.m, basis,
                              meta=dict(self.meta))
        res.coeffs = coeffs
        return res

    # -- comparisons ------------------------------------------------------

    def max_deviation(self, other: "PotentialSeries", ctx: Context = DOUBLE) -> float:
        """max over keys of |a - b| / max(1, |a|, |b|)."""
        if self.basis != other.basis:
            raise ValidationError("compare potentials in a common basis")
        keys = set(self.coeffs) | set(other.coeffs)
        worst = 0.0
        for k in keys:
            a = self.coeffs.get(k, 0)
            b = other.coeffs.get(k, 0)
            dev = ctx.abs(a - b) / max(1.0, ctx.abs(a), ctx.abs(b))
            worst = max(worst, dev)
        return worst

    def symmetry_deviation(self, ctx: Context = DOUBLE) -> float:
        """Deviation from invariance under leg transpositions."""
        worst = 0.0
        for i in range(self.n - 1):
            for (tau, legs), v in self.coeffs.items():
                swapped = list(legs)
                swapped[i], swapped[i + 1] = swapped[i + 1], swapped[i]
                w = self.coeffs.get((tau, tuple(swapped)), 0)
                worst = max(worst, ctx.abs(v - w) / max(1.0, ctx.abs(v), ctx.abs(w)))
        return worst

    # -- emission ----------------------------------------------------------

    def to_json_dict(self, ctx: Context = DOUBLE) -> dict:
        entries = []
        for (tau, legs) in sorted(self.coeffs):
            v = ctx.to_complex(self.coeffs[(tau, legs)])
            entries.append({
                "tau": list(tau),
                "legs": [{"d": d, "k": k} for (d, k) in legs],
                "re": fmt17(v.real),
                "im": fmt17(v.imag),
            })
        return {
            "g": self.g,
            "n": self.n,
            "basis": self.basis,
            "coefficients": entries,
            "meta": {k: self.meta[k] for k in sorted(self.meta)},
        }

    def to_json(self, ctx: Context = DOUBLE) -> str:
        return json.dumps(self.to_json_dict(ctx))


def fmt17(x: float) -> str:
    """17 significant digits, deterministic."""
    return format(float(x), ".17g")
