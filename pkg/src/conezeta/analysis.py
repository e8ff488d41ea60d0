"""Abscissa, pole order and zeta-factor peeling for cone integrals.

Each ray q of the cone has weights A = <q, N(f0)> and B = <q, N(g0) + nu>;
a ray with A > 0 contributes a candidate pole (1 - B)/A of the local factor
summed over primes.  The rightmost candidate, shifted, is the abscissa.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .cone import (ComponentCounts, ConeSystem, build_cone, constant_term_from_strata,
                   counts_for, local_factor, one_minus_inverse_p_power, pieces)
from .conditions import ConeIntegralData
from .exact import BivariateRational, BivarPoly, TSeries, render_poly, series_log

SPLIT_ASSUMPTION = ("pole order counts the leading coefficient of c_(p,I) for each maximizing "
                    "ray (components assumed absolutely irreducible and split)")


class ConstantZetaError(ValueError):
    """Every ray has A = 0: the zeta function is constant in s."""


@dataclass(frozen=True)
class Edge:
    ray: tuple
    A: int
    B: int

    @property
    def in_w(self) -> bool:
        return self.A != 0

    @property
    def candidate(self) -> Fraction | None:
        return Fraction(1 - self.B, self.A) if self.A else None


@dataclass(frozen=True)
class EdgeData:
    edges: tuple

    def __iter__(self):
        return iter(self.edges)

    def __len__(self):
        return len(self.edges)

    def maximizing(self) -> list[int]:
        best = max((e.candidate for e in self.edges if e.in_w), default=None)
        return [k for k, e in enumerate(self.edges) if e.in_w and e.candidate == best]


def edge_data(cs: ConeSystem) -> EdgeData:
    return EdgeData(tuple(Edge(r, *cs.weight(r)) for r in cs.rays))


def abscissa(ed: EdgeData, shift: int = 0) -> Fraction:
    cands = [e.candidate for e in ed if e.in_w]
    if not cands:
        raise ConstantZetaError("all A_k vanish; the zeta function is constant")
    return shift + max(cands)


def pole_order(ed: EdgeData, counts: ComponentCounts | None = None) -> int:
    """Number of maximizing rays, each weighted by the leading coefficient of c_(p,I)."""
    w = 0
    for k in ed.maximizing():
        supp = frozenset(j for j, x in enumerate(ed.edges[k].ray) if x)
        if counts is None or counts.monomial:
            w += 1
            continue
        c = counts.get(supp)
        if c is None:
            raise KeyError(f"no c_(p,I) for I = {sorted(i + 1 for i in supp)}")
        w += c.leading_p_coefficient()
    if not w:
        raise ConstantZetaError("no maximizing ray")
    return int(w)


def default_depth(ed: EdgeData) -> int:
    lcm = 1
    for k in ed.maximizing():
        lcm = lcm * ed.edges[k].A // math.gcd(lcm, ed.edges[k].A)
    return min(2 * lcm, 24)


# ---------------------------------------------------------------------------
# zeta-factor peeling


@dataclass
class ZetaFactorization:
    factors: list  # (a, b, e): zeta(b s - a)^e, i.e. (1 - p^a t^b)^(-e)
    remainder: TSeries
    threshold: Fraction
    verdict: str  # "terminated" or "non-terminating-at-threshold"
    order: int
    non_integral: list = field(default_factory=list)  # (a, n, value)

    @property
    def terminated(self) -> bool:
        return self.verdict == "terminated"

    def abscissa(self) -> Fraction | None:
        """Rightmost pole (1 + a)/b among factors with net positive multiplicity."""
        net: dict[Fraction, int] = {}
        for a, b, e in self.factors:
            x = Fraction(1 + a, b)
            net[x] = net.get(x, 0) + e
        poles = [x for x, e in net.items() if e > 0]
        return max(poles) if poles else None

    def pole_order(self) -> int:
        x = self.abscissa()
        if x is None:
            return 0
        return sum(e for a, b, e in self.factors if Fraction(1 + a, b) == x)

    def __str__(self):
        return "*".join(zeta_label(a, b, e) for a, b, e in self.factors) or "1"


def zeta_label(a: int, b: int, e: int) -> str:
    arg = "s" if b == 1 else f"{b}*s"
    if a > 0:
        arg += f" - {a}"
    elif a < 0:
        arg += f" + {-a}"
    return f"zeta({arg})" + (f"^{e}" if e != 1 else "")


def peel_factors(w: TSeries, threshold=None, order: int | None = None) -> ZetaFactorization:
    """Write w = prod (1 - p^a t^b)^(-e(a,b)) up to t^order and keep the factors
    whose pole (1 + a)/b is at least ``threshold``."""
    if order is None:
        order = w.order
    w = w.prefix(order)
    if order < 1:
        raise ValueError("need truncation order >= 1")
    theta = Fraction(threshold) if threshold is not None else None
    log = series_log(w)
    e: dict[int, dict[int, Fraction]] = {}
    bad = []
    for n in range(1, order + 1):
        s_n = log.coeffs[n] * n
        for b in range(1, n):
            if n % b or not e.get(b):
                continue
            q = n // b
            s_n = s_n - BivarPoly({(a * q, 0): b * c for a, c in e[b].items()})
        row = {}
        for (a, _), c in s_n.terms.items():
            val = Fraction(c) / n
            if val.denominator != 1:
                bad.append((a, n, val))
            row[a] = val
        e[n] = row
    kept = []
    for n in range(1, order + 1):
        for a in sorted(e[n]):
            val = e[n][a]
            if theta is None or Fraction(1 + a, n) >= theta:
                kept.append((a, n, int(val) if val.denominator == 1 else val))
    rem = w
    for a, b, mult in kept:
        if isinstance(mult, Fraction):
            continue
        for _ in range(abs(mult)):
            rem = rem.mul_one_minus(a, b) if mult > 0 else rem.div_one_minus(a, b)
    late = [f for f in kept if f[1] > order / 2]
    verdict = "non-terminating-at-threshold" if late else "terminated"
    return ZetaFactorization(kept, rem, theta if theta is not None else Fraction(-10**9),
                             verdict, order, bad)


def normalized_series(r: BivariateRational, order: int) -> TSeries:
    """Series of r divided by its constant term.

    The constant term must be a monomial times a product of binomials
    (1 - p^a), and every series coefficient must be divisible by it.
    """
    from .exact import series_expand

    c = r.constant_term()
    split = _b0_factorization(c.numerator)
    if split is None:
        raise ValueError(f"constant term {c} is not a product of binomials in p")
    x, coeff, factors = split
    num = r.numerator * expand_b0(c.denominator)
    body = BivariateRational(num.mul_monomial(-x, 0) * Fraction(1, coeff),
                             tuple(f for f in r.denominator if f[1] != 0))
    ser = series_expand(body, order)
    out = []
    for n, cf in enumerate(ser.coeffs):
        for a, _, e in factors:
            for _ in range(e):
                q = cf.divide_one_minus(a, 0)
                if q is None:
                    raise ValueError(f"coefficient of t^{n} is not divisible by the constant term")
                cf = q
        out.append(cf)
    return TSeries(out, order)


def expand_b0(factors) -> BivarPoly:
    out = BivarPoly.constant(1)
    for a, b, e in factors:
        if b == 0:
            for _ in range(e):
                out = out.mul_one_minus(a, 0)
    return out


def _b0_factorization(poly: BivarPoly, span: int = 4):
    """poly = coeff * p^x * prod (1 - p^a), or None."""
    if poly.is_zero() or not poly.is_t_free():
        return None
    rest = poly
    found = []
    for a in [k for n in range(1, span + 1) for k in (-n, n)]:
        while len(rest.terms) > 1:
            q = rest.divide_one_minus(a, 0)
            if q is None:
                break
            found.append((a, 0, 1))
            rest = q
    if len(rest.terms) != 1:
        return None
    (x, _), coeff = next(iter(rest.terms.items()))
    return x, coeff, found


# ---------------------------------------------------------------------------
# constant term and further checks


@dataclass
class CheckReport:
    checks: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def __str__(self):
        lines = [f"{k}: {'pass' if v else 'FAIL'}" for k, v in self.checks.items()]
        return "\n".join(lines + self.notes)


def constant_term_checks(data: ConeIntegralData, counts: ComponentCounts | None = None,
                         d: int | None = None, z: BivariateRational | None = None,
                         primes=(2, 3, 5, 7, 11)) -> CheckReport:
    if counts is None:
        counts = counts_for(data)
    cs = build_cone(data)
    if z is None:
        z = local_factor(data, counts, cs)
    rep = CheckReport()
    a0 = z.constant_term()
    strata = constant_term_from_strata(data, counts, cs)
    rep.checks["t-free part matches stratified sum"] = a0 == strata
    if d is None:
        d = data.d
    if d is not None:
        rep.checks[f"a_p0 = (1 - 1/p)^{d}"] = a0 == BivariateRational.from_poly(
            one_minus_inverse_p_power(d))
    vals = {}
    for p in primes:
        num = a0.numerator.evaluate(p, 1)
        den = Fraction(1)
        for a, b, e in a0.denominator:
            den *= (1 - Fraction(p) ** a) ** e
        vals[p] = Fraction(num) / den
    rep.checks["0 < a_p0 <= 1"] = all(0 < v <= 1 for v in vals.values())
    rep.notes.append("a_p0 = " + str(a0))
    rep.notes.append("values: " + ", ".join(f"p={p}: {v}" for p, v in vals.items()))
    return rep


def inequality_failures(cs: ConeSystem, piece_list=None) -> list:
    """Pieces with >= 2 generators where (1 - sum B)/(sum A) is not strictly
    below the best single-generator candidate."""
    if piece_list is None:
        piece_list = pieces(cs)
    bad = []
    for pc in piece_list:
        if pc.dim < 2:
            continue
        ws = [cs.weight(cs.rays[g]) for g in pc.gens]
        sa = sum(a for a, _ in ws)
        if not sa:
            continue
        joint = Fraction(1 - sum(b for _, b in ws), sa)
        best = max(Fraction(1 - b, a) for a, b in ws if a)
        if not joint < best:
            bad.append(pc.gens)
    return bad


def denominator_failures(cs: ConeSystem, z: BivariateRational, shift: int = 0) -> list:
    """Denominator factors of z not of the form 1 - p^(-B + shift*A) t^A for a ray."""
    allowed = set()
    for r in cs.rays:
        a, b = cs.weight(r)
        allowed.add((-b + shift * a, a))
    allowed.add((-1, 0))
    return [f for f in z.denominator if (f[0], f[1]) not in allowed]


# ---------------------------------------------------------------------------
# combined report


@dataclass
class AnalysisResult:
    abscissa: Fraction
    pole_order: int
    shift: int
    factorization: ZetaFactorization | None = None
    notes: list = field(default_factory=list)

    @property
    def b(self) -> int:
        return self.pole_order - 1

    def lines(self) -> list[tuple[str, str]]:
        out = [("abscissa", str(self.abscissa)), ("pole_order", str(self.pole_order)),
               ("b", str(self.b)), ("shift", str(self.shift))]
        if self.factorization is not None:
            fz = self.factorization
            out.append(("factors", str(fz)))
            out.append(("threshold", str(fz.threshold)))
            out.append(("verdict", fz.verdict))
            preview = [render_poly(c) for c in fz.remainder.coeffs[:6]]
            out.append(("remainder", "[" + ", ".join(preview) + ", ...]"))
        for n in self.notes:
            out.append(("note", n))
        return out


def analyze(data: ConeIntegralData, counts: ComponentCounts | None = None,
            z: BivariateRational | None = None, peel_order: int | None = None,
            threshold=None) -> AnalysisResult:
    from .cone import zeta_factor

    if counts is None:
        counts = counts_for(data)
    cs = build_cone(data)
    ed = edge_data(cs)
    shift = data.d if data.d is not None else 0
    alpha = abscissa(ed, shift)
    w = pole_order(ed, counts)
    notes = []
    if not counts.monomial:
        notes.append(SPLIT_ASSUMPTION)
    fz = None
    if data.d is not None:
        zz = zeta_factor(data, z if z is not None else local_factor(data, counts, cs))
        from .exact import series_expand

        order = peel_order if peel_order is not None else max(default_depth(ed), 12)
        fz = peel_factors(series_expand(zz, order), threshold if threshold is not None else 0)
    return AnalysisResult(alpha, w, shift, fz, notes)


def abscissa_from_factors(factors) -> tuple[Fraction, int]:
    """(abscissa, pole order) of prod zeta(b s - a)^e."""
    fz = ZetaFactorization(list(factors), TSeries.one(1), Fraction(0), "terminated", 1)
    x = fz.abscissa()
    if x is None:
        raise ConstantZetaError("no pole")
    return x, fz.pole_order()
