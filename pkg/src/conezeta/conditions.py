"""Valuation conditions cutting out subrings and ideals inside Tr_d(Z_p).

A lattice with upper triangular basis M (rows m_1..m_d) is closed under the
product iff every coordinate of the products, rewritten in the basis M, is
p-integral.  Writing M^nat for the polynomial matrix with
M M^nat = diag(d_1, ..., d_d), d_k = m_11...m_kk, this becomes a finite list
of conditions v(d_k) <= v(g) with g polynomial in the entries m_rs.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from pathlib import Path

import sympy
from sympy import ZZ
from sympy.polys.rings import ring

from .rings import StructureConstants

SUBRING, IDEAL = "subring", "ideal"


class ConeDataFormatError(ValueError):
    pass


# ---------------------------------------------------------------------------
# symbolic matrices


def variable_names(d: int) -> list[str]:
    """Names of the upper triangular entries m_rs in lexicographic order."""
    sep = "" if d < 10 else "_"
    return [f"m{r}{sep}{s}" for r in range(1, d + 1) for s in range(r, d + 1)]


def variable_index(d: int) -> dict[tuple[int, int], int]:
    """0-based (r, s) -> position of m_{r+1,s+1} in the variable list."""
    pos = {}
    for n, (r, s) in enumerate((r, s) for r in range(d) for s in range(r, d)):
        pos[(r, s)] = n
    return pos


@dataclass(frozen=True)
class SymbolicMatrix:
    R: object  # sympy PolyRing over ZZ
    rows: tuple

    @property
    def d(self) -> int:
        return len(self.rows)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __matmul__(self, other: SymbolicMatrix) -> SymbolicMatrix:
        n, k, m = len(self.rows), len(other.rows), len(other.rows[0])
        out = []
        for i in range(n):
            row = []
            for j in range(m):
                acc = self.R.zero
                for l in range(k):
                    a, b = self.rows[i][l], other.rows[l][j]
                    if a and b:
                        acc += a * b
                row.append(acc)
            out.append(tuple(row))
        return SymbolicMatrix(self.R, tuple(out))

    def is_upper_triangular(self) -> bool:
        return all(not self.rows[i][j] for i in range(self.d) for j in range(i))


def polynomial_ring(d: int):
    R, *gens = ring(",".join(variable_names(d)), ZZ)
    return R, gens


def generic_matrix(d: int, R=None) -> SymbolicMatrix:
    if R is None:
        R, _ = polynomial_ring(d)
    gens = R.gens
    pos = variable_index(d)
    rows = tuple(tuple(gens[pos[(r, s)]] if s >= r else R.zero for s in range(d)) for r in range(d))
    return SymbolicMatrix(R, rows)


def diagonal_products(M: SymbolicMatrix) -> list:
    """d_k = m_11 ... m_kk for k = 1..d."""
    out, acc = [], M.R.one
    for k in range(M.d):
        acc = acc * M[k, k]
        out.append(acc)
    return out


def natural_adjoint(d: int, R=None) -> SymbolicMatrix:
    """Polynomial matrix M^nat with M M^nat = diag(d_1, ..., d_d)."""
    M = generic_matrix(d, R)
    R = M.R
    dk = diagonal_products(M)
    cols = []
    for k in range(d):
        # back-substitution for M x = d_k e_k; every division is exact
        x = [R.zero] * d
        x[k] = dk[k - 1] if k else R.one
        for i in range(k - 1, -1, -1):
            acc = R.zero
            for j in range(i + 1, k + 1):
                if M[i, j] and x[j]:
                    acc += M[i, j] * x[j]
            x[i] = -acc.exquo(M[i, i]) if acc else R.zero
        cols.append(x)
    rows = tuple(tuple(cols[k][i] for k in range(d)) for i in range(d))
    return SymbolicMatrix(R, rows)


def structure_matrices(sc: StructureConstants, R, left: bool = False) -> list[SymbolicMatrix]:
    """C_j with rows beta(e_i, e_j); with ``left`` the rows are beta(e_j, e_i)."""
    d = sc.d
    out = []
    for j in range(d):
        if left:
            rows = tuple(tuple(R(c) for c in sc.table[j][i]) for i in range(d))
        else:
            rows = tuple(tuple(R(c) for c in sc.table[i][j]) for i in range(d))
        out.append(SymbolicMatrix(R, rows))
    return out


def _combined(Cs: list[SymbolicMatrix], M: SymbolicMatrix, j: int) -> SymbolicMatrix:
    """sum_l m_jl C_l."""
    R = M.R
    d = M.d
    acc = [[R.zero] * d for _ in range(d)]
    for l in range(j, d):
        coef = M[j, l]
        C = Cs[l]
        for a in range(d):
            for b in range(d):
                if C[a, b]:
                    acc[a][b] += coef * C[a, b]
    return SymbolicMatrix(R, tuple(tuple(r) for r in acc))


def condition_matrices(sc: StructureConstants, kind: str, R=None) -> list[tuple[str, int, SymbolicMatrix]]:
    """The matrices whose (i, k) entries are the condition polynomials g_ijk.

    ideal: M C_j M^nat; subring: M (sum_l m_jl C_l) M^nat.  For rings that
    are not antisymmetric, the left-multiplication analogues are appended.
    """
    if kind not in (SUBRING, IDEAL):
        raise ValueError(f"unknown kind {kind!r}")
    d = sc.d
    if R is None:
        R, _ = polynomial_ring(d)
    M = generic_matrix(d, R)
    Mn = natural_adjoint(d, R)
    sides = [("right", False)]
    if not sc.is_antisymmetric():
        sides.append(("left", True))
    out = []
    for side, left in sides:
        Cs = structure_matrices(sc, R, left)
        for j in range(d):
            mid = Cs[j] if kind == IDEAL else _combined(Cs, M, j)
            out.append((side, j, M @ mid @ Mn))
    return out


# ---------------------------------------------------------------------------
# condition sets


@dataclass(frozen=True)
class Condition:
    i: int
    j: int
    k: int
    f: object  # d_k, a monomial
    g: object  # polynomial
    side: str = "right"

    def label(self) -> str:
        tag = "" if self.side == "right" else "'"
        return f"g{tag}[{self.i + 1},{self.j + 1},{self.k + 1}]"


@dataclass
class ConditionSet:
    d: int
    kind: str
    ring: object
    conditions: list[Condition]
    exceptional_primes: frozenset = frozenset()

    def __len__(self):
        return len(self.conditions)

    def holds(self, values: dict, p: int) -> bool:
        """Evaluate the conjunction at an integer matrix (given by its entries)."""
        point = [values[name] for name in (str(g) for g in self.ring.gens)]
        for c in self.conditions:
            gv = c.g(*point)
            if gv == 0:
                continue
            if _vp(int(c.f(*point)), p) > _vp(int(gv), p):
                return False
        return True


def _vp(x: int, p: int) -> int:
    if x == 0:
        return 10**9
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def derive_conditions(sc: StructureConstants, kind: str) -> ConditionSet:
    R, _ = polynomial_ring(sc.d)
    M = generic_matrix(sc.d, R)
    dk = diagonal_products(M)
    conds = []
    seen = set()
    for side, j, mat in condition_matrices(sc, kind, R):
        for i in range(sc.d):
            for k in range(sc.d):
                g = mat[i, k]
                if not g:
                    continue
                expect = k + 1 if kind == IDEAL else k + 2
                if {sum(mono) for mono in g.monoms()} != {expect}:
                    raise AssertionError(f"g[{i + 1},{j + 1},{k + 1}] has unexpected degree")
                key = (k, g if g.LC > 0 else -g)
                if key in seen:
                    continue
                seen.add(key)
                conds.append(Condition(i, j, k, dk[k], g, side))
    return ConditionSet(sc.d, kind, R, conds)


# ---------------------------------------------------------------------------
# cone integral data


@dataclass
class ConeIntegralData:
    """Exponent-vector form of a cone integral.

    ``conditions`` holds pairs (N(f_i), N(g_i)) meaning v(f_i) <= v(g_i).  For
    resolution data, ``cpoly`` maps a support bitmask to c_{p,I} (a sympy
    expression in p) and ``ambient`` is the number of integration variables.
    """

    m: int
    f0: tuple
    g0: tuple
    conditions: list
    nu: tuple = None
    provenance: str = "user-supplied"
    d: int | None = None
    exceptional_primes: frozenset = frozenset()
    cpoly: dict | None = None
    ambient: int | None = None
    trivial: bool = False

    def __post_init__(self):
        if self.nu is None:
            self.nu = (1,) * self.m
        self.f0, self.g0, self.nu = tuple(self.f0), tuple(self.g0), tuple(self.nu)
        self.conditions = [(tuple(f), tuple(g)) for f, g in self.conditions]
        for name, vec in (("f0", self.f0), ("g0", self.g0), ("nu", self.nu)):
            if len(vec) != self.m:
                raise ValueError(f"{name} has length {len(vec)}, expected {self.m}")
        if any(x < 0 for x in self.f0 + self.g0):
            raise ValueError("exponents must be nonnegative")
        if any(x < 1 for x in self.nu):
            raise ValueError("nu entries must be positive")
        for f, g in self.conditions:
            if len(f) != self.m or len(g) != self.m:
                raise ValueError(f"condition vectors must have length {self.m}")
            if any(x < 0 for x in f + g):
                raise ValueError("exponents must be nonnegative")
        if not any(self.f0) and not self.trivial:
            raise ValueError("f0 is constant; set trivial=True to allow it")

    @property
    def t(self) -> int:
        return self.m

    @property
    def ambient_dim(self) -> int:
        return self.ambient if self.ambient is not None else self.m

    def is_monomial(self) -> bool:
        return self.cpoly is None

    def essential_conditions(self) -> list:
        """Conditions with common factors cancelled and vacuous ones dropped."""
        out = []
        for f, g in self.conditions:
            low = [min(a, b) for a, b in zip(f, g)]
            f2 = tuple(a - c for a, c in zip(f, low))
            g2 = tuple(b - c for b, c in zip(g, low))
            if not any(f2):
                continue
            if (f2, g2) not in out:
                out.append((f2, g2))
        return out


@dataclass
class NonMonomialReport:
    d: int
    kind: str
    offending: list  # (label, polynomial string)
    exceptional_primes: frozenset = frozenset()

    def __str__(self):
        lines = [f"non-monomial {self.kind} conditions for d={self.d}: "
                 f"{len(self.offending)} polynomial(s) are not monomials"]
        for label, poly in self.offending:
            lines.append(f"  {label} = {poly}")
        lines.append("supply resolution data as a cone-data file or use the oracle (count)")
        return "\n".join(lines)


def _prime_factors(n: int) -> set[int]:
    return set(sympy.factorint(abs(n))) if abs(n) > 1 else set()


def integrand_exponents(d: int) -> tuple[tuple, tuple]:
    """f0 = m_11...m_dd and g0 = m_11^{d-1} m_22^{d-2} ... m_{d-1,d-1}."""
    pos = variable_index(d)
    m = d * (d + 1) // 2
    f0, g0 = [0] * m, [0] * m
    for i in range(d):
        f0[pos[(i, i)]] = 1
        g0[pos[(i, i)]] = d - 1 - i
    return tuple(f0), tuple(g0)


def classify(cs: ConditionSet) -> ConeIntegralData | NonMonomialReport:
    d = cs.d
    m = d * (d + 1) // 2
    primes: set[int] = set()
    bad = []
    conds = []
    for c in cs.conditions:
        terms = c.g.terms()
        if len(terms) != 1:
            bad.append((c.label(), str(c.g.as_expr())))
            continue
        (mono, coeff), = terms
        primes |= _prime_factors(int(coeff))
        (fexp, _), = c.f.terms()
        conds.append((tuple(fexp), tuple(mono)))
    if bad:
        return NonMonomialReport(d, cs.kind, bad, frozenset(primes))
    f0, g0 = integrand_exponents(d)
    data = ConeIntegralData(m, f0, g0, conds, provenance=f"ring-derived({d})", d=d,
                            exceptional_primes=frozenset(primes))
    data.conditions = data.essential_conditions()
    return data


def ring_cone_data(sc: StructureConstants, kind: str) -> ConeIntegralData | NonMonomialReport:
    return classify(derive_conditions(sc, kind))


# ---------------------------------------------------------------------------
# the polynomial F*_L


@dataclass
class FPolynomial:
    d: int
    kind: str
    prefactor: object  # monomial in the m_ii
    factors: list  # nonzero condition-matrix entries

    def expand(self):
        return reduce(lambda a, b: a * b, self.factors, self.prefactor)

    def __str__(self):
        parts = [str(self.prefactor.as_expr())]
        parts += [f"({f.as_expr()})" for f in self.factors]
        return "*".join(parts)


def f_polynomial(sc: StructureConstants, kind: str) -> FPolynomial:
    d = sc.d
    R, _ = polynomial_ring(d)
    M = generic_matrix(d, R)
    pre = R.one
    for i in range(d):
        pre *= M[i, i] ** ((d * d + 1) * (d - i))
    factors = []
    for _, _, mat in condition_matrices(sc, kind, R):
        for row in mat.rows:
            factors.extend(x for x in row if x)
    return FPolynomial(d, kind, pre, factors)


# ---------------------------------------------------------------------------
# cone-data file format


def dumps(data: ConeIntegralData) -> str:
    def vec(v):
        return " ".join(str(x) for x in v)

    lines = [f"m {data.m}"]
    if data.ambient is not None:
        lines.append(f"ambient {data.ambient}")
    lines += [f"f0 {vec(data.f0)}", f"g0 {vec(data.g0)}", f"nu {vec(data.nu)}"]
    for f, g in data.conditions:
        lines.append(f"cond {vec(f)} | {vec(g)}")
    if data.cpoly:
        for mask in sorted(data.cpoly):
            lines.append(f"cpoly {mask} {sympy.sstr(data.cpoly[mask])}")
    return "\n".join(lines) + "\n"


def _ints(parts, lineno, n=None) -> tuple:
    try:
        out = tuple(int(x) for x in parts)
    except ValueError:
        raise ConeDataFormatError(f"line {lineno}: non-integer entry") from None
    if n is not None and len(out) != n:
        raise ConeDataFormatError(f"line {lineno}: expected {n} entries, got {len(out)}")
    return out


def loads(text: str) -> ConeIntegralData:
    m = None
    fields: dict = {}
    conds = []
    cpoly = {}
    p = sympy.Symbol("p")
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, *rest = line.split()
        if key == "m":
            (m,) = _ints(rest, lineno, 1)
            if m < 1:
                raise ConeDataFormatError(f"line {lineno}: m must be positive")
            continue
        if m is None:
            raise ConeDataFormatError(f"line {lineno}: 'm <count>' must come first")
        if key == "ambient":
            (fields["ambient"],) = _ints(rest, lineno, 1)
        elif key in ("f0", "g0", "nu"):
            fields[key] = _ints(rest, lineno, m)
        elif key == "cond":
            body = line[len("cond"):]
            if body.count("|") != 1:
                raise ConeDataFormatError(f"line {lineno}: expected 'cond <f> | <g>'")
            left, right = body.split("|")
            conds.append((_ints(left.split(), lineno, m), _ints(right.split(), lineno, m)))
        elif key == "cpoly":
            if len(rest) < 2:
                raise ConeDataFormatError(f"line {lineno}: expected 'cpoly <mask> <poly>'")
            (mask,) = _ints(rest[:1], lineno, 1)
            if not 0 <= mask < 2**m:
                raise ConeDataFormatError(f"line {lineno}: mask out of range")
            try:
                expr = sympy.sympify(" ".join(rest[1:]), locals={"p": p})
            except (sympy.SympifyError, SyntaxError, TypeError) as exc:
                raise ConeDataFormatError(f"line {lineno}: bad polynomial: {exc}") from None
            if expr.free_symbols - {p}:
                raise ConeDataFormatError(f"line {lineno}: polynomial may only involve p")
            cpoly[mask] = sympy.expand(expr)
        else:
            raise ConeDataFormatError(f"line {lineno}: unknown keyword {key!r}")
    if m is None:
        raise ConeDataFormatError("empty cone-data file")
    for key in ("f0", "g0"):
        if key not in fields:
            raise ConeDataFormatError(f"missing '{key}' line")
    provenance = "resolution-data" if cpoly else "user-supplied"
    try:
        return ConeIntegralData(m, fields["f0"], fields["g0"], conds, fields.get("nu"),
                                provenance=provenance, cpoly=cpoly or None,
                                ambient=fields.get("ambient"))
    except ValueError as exc:
        raise ConeDataFormatError(str(exc)) from None


def load(path: str | Path) -> ConeIntegralData:
    return loads(Path(path).read_text())

