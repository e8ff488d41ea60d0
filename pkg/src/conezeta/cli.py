"""Command-line front end.

Exit codes: 0 ok, 1 input or validation error, 2 non-monomial conditions,
3 verification mismatch, 4 oracle work budget exceeded.
"""

from __future__ import annotations

import argparse
import sys

from . import analysis, conditions, cone, dirichlet, exact, oracle, rings

EXIT_OK, EXIT_INPUT, EXIT_NONMONOMIAL, EXIT_MISMATCH, EXIT_BUDGET = 0, 1, 2, 3, 4

FIXTURE_NAMES = ("dinf", "sl2", "heisenberg")


class InputError(Exception):
    pass


class Out:
    """Collects key/value records and renders them as text or key=value lines."""

    def __init__(self, fmt: str):
        self.fmt = fmt
        self.items: list[tuple[str, str]] = []

    def add(self, key: str, value) -> None:
        self.items.append((key, str(value)))

    def block(self, text: str) -> None:
        self.items.append(("", text))

    def render(self) -> str:
        if self.fmt == "machine":
            lines = []
            for k, v in self.items:
                if k:
                    lines.append(f"{k}={v}")
                else:
                    lines.extend(v.splitlines())
            return "\n".join(lines)
        width = max((len(k) for k, _ in self.items if k), default=0)
        return "\n".join(f"{k.ljust(width)} : {v}" if k else v for k, v in self.items)

    def emit(self) -> None:
        text = self.render()
        if text:
            print(text)


# ---------------------------------------------------------------------------
# input helpers


def load_ring(args) -> rings.StructureConstants:
    if getattr(args, "builtin", None):
        try:
            sc = rings.builtin(args.builtin)
        except KeyError as exc:
            raise InputError(str(exc.args[0])) from None
    elif getattr(args, "ring", None):
        try:
            sc = rings.load(args.ring)
        except (OSError, rings.RingFormatError) as exc:
            raise InputError(f"cannot read ring file: {exc}") from None
    else:
        raise InputError("give --ring FILE or --builtin NAME")
    rep = rings.validate(sc)
    if not rep.ok:
        raise InputError("ring validation failed\n" + str(rep))
    return sc


def load_data(args):
    """(ConeIntegralData | NonMonomialReport, ring or None)."""
    if getattr(args, "cone", None):
        try:
            return conditions.load(args.cone), None
        except (OSError, conditions.ConeDataFormatError) as exc:
            raise InputError(f"cannot read cone-data file: {exc}") from None
    sc = load_ring(args)
    return conditions.ring_cone_data(sc, args.kind), sc


def add_source_args(p: argparse.ArgumentParser, cone_ok: bool = True) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--ring", metavar="FILE", help="ring file")
    g.add_argument("--builtin", metavar="NAME", help="zd(d), heisenberg, sl2 or f23")
    if cone_ok:
        g.add_argument("--cone", metavar="FILE", help="cone-data file")
    p.add_argument("--kind", choices=("subring", "ideal"), default="subring")


def parse_primes(text: str) -> list[int]:
    try:
        ps = [int(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise InputError(f"bad prime list {text!r}") from None
    from sympy import isprime

    for p in ps:
        if not isprime(p):
            raise InputError(f"{p} is not prime")
    return ps


# ---------------------------------------------------------------------------
# commands


def cmd_local(args, out: Out) -> int:
    data, sc = load_data(args)
    if isinstance(data, conditions.NonMonomialReport):
        out.add("status", "non-monomial")
        out.block(str(data))
        return EXIT_NONMONOMIAL
    z = cone.local_factor(data)
    out.add("status", "ok")
    out.add("provenance", data.provenance)
    out.add("cone_integral", z)
    out.add("constant_term", z.constant_term())
    if data.d is not None:
        zz = cone.zeta_factor(data, z)
        out.add("local_zeta", zz)
        if args.p:
            for p in parse_primes(args.p):
                out.add(f"local_zeta_p{p}", exact.specialize(zz, p))
    primes = ",".join(str(p) for p in sorted(data.exceptional_primes)) or "none"
    out.add("exceptional_primes", primes)
    return EXIT_OK


def cmd_global(args, out: Out) -> int:
    if args.fixture:
        return _global_fixture(args, out)
    data, sc = load_data(args)
    if isinstance(data, conditions.NonMonomialReport):
        out.add("status", "non-monomial")
        out.block(str(data))
        return EXIT_NONMONOMIAL
    try:
        res = analysis.analyze(data, peel_order=args.depth)
    except analysis.ConstantZetaError as exc:
        out.add("status", "constant")
        out.add("note", str(exc))
        return EXIT_INPUT
    out.add("status", "ok")
    for k, v in res.lines():
        out.add(k, v)
    return EXIT_OK


def _global_fixture(args, out: Out) -> int:
    name = args.fixture.lower()
    if name == "dinf":
        dc = dirichlet.dinf_coeffs(args.N)
        alpha = dirichlet.growth_exponent(dc)
        out.add("status", "ok")
        out.add("fixture", "2^-s zeta(s) + zeta(s - 1)")
        out.add("abscissa", alpha)
        out.add("method", f"growth of s_N up to N={args.N}")
        out.add("euler_product", "no" if not dirichlet.is_multiplicative(dc) else "yes")
        out.add("note", "coefficients are not multiplicative; no Euler product or pole order")
        return EXIT_OK
    if name in ("sl2", "heisenberg"):
        fix = rings.FIXTURES[(name, "subring")]
        alpha, w = analysis.abscissa_from_factors(fix["factors"])
        out.add("status", "ok")
        out.add("fixture", f"{name} subring closed form")
        out.add("factors", "*".join(analysis.zeta_label(*f) for f in fix["factors"]))
        out.add("abscissa", alpha)
        out.add("pole_order", w)
        out.add("b", w - 1)
        return EXIT_OK
    raise InputError(f"unknown fixture {args.fixture!r}; expected one of {', '.join(FIXTURE_NAMES)}")


def cmd_count(args, out: Out) -> int:
    sc = load_ring(args)
    (p,) = parse_primes(str(args.p))
    if args.n < 0:
        raise InputError("--n must be nonnegative")
    for n in range(args.n + 1):
        try:
            c = oracle.count_lattices(sc, p, n, args.kind, args.budget)
        except oracle.BudgetExceeded:
            out.block(f"budget-exceeded n={n}" if args.format == "text" else f"count_{n}=budget-exceeded")
            return EXIT_BUDGET
        out.block(str(c) if args.format == "text" else f"count_{n}={c}")
    return EXIT_OK


def cmd_verify(args, out: Out) -> int:
    sc = load_ring(args)
    primes = parse_primes(args.primes)
    data = conditions.ring_cone_data(sc, args.kind)
    if isinstance(data, conditions.NonMonomialReport):
        out.add("status", "non-monomial")
        out.block(str(data))
        return EXIT_NONMONOMIAL
    ser = exact.series_expand(cone.zeta_factor(data), args.n_max)
    mismatch = budget = False
    for p in primes:
        for n in range(args.n_max + 1):
            want = ser.coeffs[n].evaluate(p).get(0, 0)
            got = "-"
            if p in data.exceptional_primes:
                verdict = "skipped-exceptional"
            else:
                try:
                    got = oracle.count_lattices(sc, p, n, args.kind, args.budget)
                    verdict = "pass" if got == want else "MISMATCH"
                    mismatch |= got != want
                except oracle.BudgetExceeded:
                    verdict = "budget-exceeded"
                    budget = True
            out.add(f"a[{p}^{n}]", f"{verdict} cone {want} oracle {got}")
    out.add("status", "mismatch" if mismatch else ("budget-exceeded" if budget else "pass"))
    if mismatch:
        return EXIT_MISMATCH
    return EXIT_BUDGET if budget else EXIT_OK


def cmd_asymptotics(args, out: Out) -> int:
    data, sc = load_data(args)
    if isinstance(data, conditions.NonMonomialReport):
        out.add("status", "non-monomial")
        out.block(str(data))
        return EXIT_NONMONOMIAL
    if data.d is None:
        raise InputError("asymptotics needs a ring (the Euler product is over subring counts)")
    res = analysis.analyze(data)
    orc = dirichlet.OracleSource(sc, args.kind, args.budget)
    src = dirichlet.ConeSource(cone.zeta_factor(data), data.exceptional_primes, orc)
    dc = dirichlet.euler_product(src, args.N)
    rep = dirichlet.asymptotic_report(dc, res.abscissa, res.b)
    out.add("abscissa", res.abscissa)
    out.add("b", res.b)
    out.add("N", args.N)
    if args.format == "machine":
        for N, s, r, r2 in rep.rows:
            out.add(f"row_{N}", f"{s},{r:.10g},{'' if r2 is None else f'{r2:.10g}'}")
        out.add("stabilization", f"{rep.stabilization:.6g}")
        out.add("fitted", f"{rep.fitted:.10g}" if rep.fitted is not None else "")
    else:
        out.block(rep.table())
    if args.dump:
        with open(args.dump, "w") as fh:
            fh.write(dc.dump())
    return EXIT_OK


def cmd_conditions(args, out: Out) -> int:
    sc = load_ring(args)
    cs = conditions.derive_conditions(sc, args.kind)
    names = conditions.variable_names(sc.d)
    out.add("variables", " ".join(names))
    out.add("count", len(cs))
    for c in cs.conditions:
        out.add(c.label(), f"v({c.f.as_expr()}) <= v({c.g.as_expr()})")
    res = conditions.classify(cs)
    out.add("monomial", "no" if isinstance(res, conditions.NonMonomialReport) else "yes")
    if not isinstance(res, conditions.NonMonomialReport):
        for f, g in res.conditions:
            out.add("cone_condition", " ".join(map(str, f)) + " | " + " ".join(map(str, g)))
    F = conditions.f_polynomial(sc, args.kind)
    out.add(f"F_{args.kind}", str(F))
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="conezeta", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "machine"), default="text")
    common.add_argument("--budget", type=int, default=oracle.DEFAULT_BUDGET,
                        help="oracle work budget (number of bases tested)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("local", parents=[common], help="symbolic local zeta factor")
    add_source_args(p)
    p.add_argument("--p", help="also specialize at these primes (comma separated)")
    p.set_defaults(func=cmd_local)

    p = sub.add_parser("global", parents=[common], help="abscissa, pole order, factors")
    add_source_args(p)
    p.add_argument("--fixture", help="use a built-in closed form: " + ", ".join(FIXTURE_NAMES))
    p.add_argument("--N", type=int, default=10**5, help="coefficient bound for fixture growth")
    p.add_argument("--depth", type=int, default=None, help="peeling depth (t-degree)")
    p.set_defaults(func=cmd_global)

    p = sub.add_parser("count", parents=[common], help="oracle counts a_{p^0..p^n}")
    add_source_args(p, cone_ok=False)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("verify", parents=[common], help="cone vs oracle coefficients")
    add_source_args(p, cone_ok=False)
    p.add_argument("--primes", default="2,3,5")
    p.add_argument("--n-max", type=int, default=4)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("asymptotics", parents=[common], help="partial sums and ratio table")
    add_source_args(p)
    p.add_argument("--N", type=int, default=10**5)
    p.add_argument("--dump", metavar="FILE", help="write 'n a_n' lines")
    p.set_defaults(func=cmd_asymptotics)

    p = sub.add_parser("conditions", parents=[common], help="condition polynomials and F")
    add_source_args(p, cone_ok=False)
    p.set_defaults(func=cmd_conditions)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        # argparse uses 2 for usage errors; here 2 means non-monomial
        return EXIT_OK if exc.code in (0, None) else EXIT_INPUT
    out = Out(args.format)
    try:
        code = args.func(args, out)
    except InputError as exc:
        out.add("status", "input-error")
        out.block(str(exc))
        code = EXIT_INPUT
    except (ValueError, cone.ConeError, cone.MissingCountError) as exc:
        out.add("status", "error")
        out.block(str(exc))
        code = EXIT_INPUT
    out.emit()
    return code


if __name__ == "__main__":
    sys.exit(main())
