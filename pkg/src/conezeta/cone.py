"""Cone integrals over the nonnegative orthant.

For monomial data the integral reduces to a weighted lattice-point sum over
the rational cone

    D = {x >= 0 : <N(f_i), x> <= <N(g_i), x> for every condition}

with weight p^{-B(x)} t^{A(x)}, A(x) = <N(f0), x>, B(x) = <N(g0) + nu, x>.
The cone is split into relatively open simplicial cones (all faces of a
triangulation); each open simplicial cone is a finite set of parallelepiped
points plus the free monoid on its generators, so its generating function
is an exact BivariateRational.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from math import gcd

import numpy as np
from sympy import ZZ, Matrix
from sympy.polys.matrices import DomainMatrix
from sympy.matrices.normalforms import smith_normal_decomp

from .conditions import ConeIntegralData
from .exact import BivariateRational, BivarPoly, sum_rationals

MAX_T = 12


class ConeError(ValueError):
    pass


# ---------------------------------------------------------------------------
# small exact linear algebra


def rank(rows) -> int:
    rows = [[Fraction(x) for x in r] for r in rows if any(r)]
    if not rows:
        return 0
    n = len(rows[0])
    rk = 0
    for col in range(n):
        piv = next((i for i in range(rk, len(rows)) if rows[i][col]), None)
        if piv is None:
            continue
        rows[rk], rows[piv] = rows[piv], rows[rk]
        pr = rows[rk]
        for i in range(rk + 1, len(rows)):
            if rows[i][col]:
                f = rows[i][col] / pr[col]
                rows[i] = [a - f * b for a, b in zip(rows[i], pr)]
        rk += 1
        if rk == len(rows):
            break
    return rk


def primitive(v) -> tuple:
    g = reduce(gcd, (abs(x) for x in v), 0)
    return tuple(x // g for x in v) if g > 1 else tuple(v)


def dot(u, v) -> int:
    return sum(a * b for a, b in zip(u, v))


def solve_coefficients(gens, x):
    """lambda with lambda . gens = x (gens linearly independent), or None."""
    k = len(gens)
    if k == 0:
        return () if not any(x) else None
    t = len(x)
    # augmented system gens^T lambda = x
    rows = [[Fraction(gens[i][j]) for i in range(k)] + [Fraction(x[j])] for j in range(t)]
    r = 0
    pivots = []
    for col in range(k):
        piv = next((i for i in range(r, t) if rows[i][col]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        pr = rows[r]
        inv = 1 / pr[col]
        rows[r] = pr = [a * inv for a in pr]
        for i in range(t):
            if i != r and rows[i][col]:
                f = rows[i][col]
                rows[i] = [a - f * b for a, b in zip(rows[i], pr)]
        pivots.append(col)
        r += 1
    if any(rows[i][k] for i in range(r, t)):
        return None
    lam = [Fraction(0)] * k
    for i, col in enumerate(pivots):
        lam[col] = rows[i][k]
    return tuple(lam)


# ---------------------------------------------------------------------------
# the cone


@dataclass(frozen=True)
class ConeSystem:
    t: int
    inequalities: tuple  # rows h with <h, x> >= 0, h = N(g_i) - N(f_i)
    rays: tuple
    f0: tuple
    g0: tuple
    nu: tuple

    @property
    def constraints(self) -> tuple:
        """All defining inequalities, orthant included."""
        unit = tuple(tuple(int(i == j) for j in range(self.t)) for i in range(self.t))
        return unit + self.inequalities

    def contains(self, x) -> bool:
        return all(v >= 0 for v in x) and all(dot(h, x) >= 0 for h in self.inequalities)

    def weight(self, x) -> tuple[int, int]:
        """(A(x), B(x))."""
        return dot(self.f0, x), sum(xj * (g + n) for xj, g, n in zip(x, self.g0, self.nu))

    def with_weights(self, f0, g0, nu=None) -> ConeSystem:
        return ConeSystem(self.t, self.inequalities, self.rays, tuple(f0), tuple(g0),
                          tuple(nu) if nu is not None else (1,) * self.t)

    def ray_support(self, k: int) -> frozenset:
        return frozenset(j for j, x in enumerate(self.rays[k]) if x)


def extreme_rays(t: int, inequalities) -> list[tuple]:
    """Extreme rays of {x >= 0 : <h, x> >= 0} by double description."""
    cons = [tuple(int(i == j) for j in range(t)) for i in range(t)]
    rays = list(cons)
    for h in inequalities:
        h = tuple(h)
        if not rays:
            break
        vals = [dot(h, r) for r in rays]
        pos = [r for r, v in zip(rays, vals) if v > 0]
        neg = [r for r, v in zip(rays, vals) if v < 0]
        new = [r for r, v in zip(rays, vals) if v >= 0]
        for rp in pos:
            for rn in neg:
                tight = [c for c in cons if dot(c, rp) == 0 and dot(c, rn) == 0]
                if rank(tight) != t - 2:
                    continue
                hp, hn = dot(h, rp), dot(h, rn)
                comb = primitive(tuple(hp * a - hn * b for a, b in zip(rn, rp)))
                if comb not in new:
                    new.append(comb)
        cons.append(h)
        rays = new
    return sorted(set(rays), key=lambda r: (sum(r), tuple(-x for x in r)))


def is_extreme(ray, constraints, t: int) -> bool:
    if not any(ray) or any(dot(c, ray) < 0 for c in constraints):
        return False
    tight = [c for c in constraints if dot(c, ray) == 0]
    return rank(tight) == t - 1


def build_cone(data: ConeIntegralData) -> ConeSystem:
    if data.m > MAX_T:
        raise ConeError(f"t = {data.m} exceeds the supported maximum {MAX_T}")
    ineqs = []
    for f, g in data.essential_conditions():
        h = tuple(b - a for a, b in zip(f, g))
        if all(x >= 0 for x in h):
            continue
        if h not in ineqs:
            ineqs.append(h)
    return cone_from_inequalities(data.m, ineqs, data.f0, data.g0, data.nu)


def cone_from_inequalities(t: int, ineqs, f0=None, g0=None, nu=None) -> ConeSystem:
    ineqs = tuple(tuple(h) for h in ineqs)
    for h in ineqs:
        if len(h) != t:
            raise ConeError("inequality rows must have length t")
    rays = extreme_rays(t, ineqs)
    cs = ConeSystem(t, ineqs, tuple(rays),
                    tuple(f0) if f0 is not None else (1,) * t,
                    tuple(g0) if g0 is not None else (0,) * t,
                    tuple(nu) if nu is not None else (1,) * t)
    for r in rays:
        if not is_extreme(r, cs.constraints, t):
            raise ConeError(f"ray {r} failed the extremality check")
    return cs


# ---------------------------------------------------------------------------
# triangulation


def faces_of(cs: ConeSystem, ray_ids: frozenset) -> list[frozenset]:
    """Facets of the face spanned by ``ray_ids``."""
    dim = rank([cs.rays[k] for k in ray_ids])
    out = []
    for c in cs.constraints:
        sub = frozenset(k for k in ray_ids if dot(c, cs.rays[k]) == 0)
        if sub == ray_ids or sub in out:
            continue
        if rank([cs.rays[k] for k in sub]) == dim - 1:
            out.append(sub)
    return out


def triangulate(cs: ConeSystem, order=None) -> list[tuple]:
    """Pulling triangulation: maximal simplices as sorted tuples of ray indices.

    ``order`` is a permutation of the ray indices fixing which ray is pulled
    first in each face.
    """
    if order is None:
        order = list(range(len(cs.rays)))
    rank_of = {k: i for i, k in enumerate(order)}
    memo: dict[frozenset, list] = {}

    def rec(ids: frozenset) -> list[frozenset]:
        if ids in memo:
            return memo[ids]
        if rank([cs.rays[k] for k in ids]) == len(ids):
            out = [ids]
        else:
            apex = min(ids, key=rank_of.__getitem__)
            out = []
            for facet in faces_of(cs, ids):
                if apex in facet:
                    continue
                out.extend(s | {apex} for s in rec(facet))
        memo[ids] = out
        return out

    if not cs.rays:
        return [()]
    simplices = rec(frozenset(range(len(cs.rays))))
    return sorted({tuple(sorted(s)) for s in simplices})


@dataclass(frozen=True)
class Piece:
    """Relatively open simplicial cone: points + N-span of generators."""

    gens: tuple  # ray indices
    points: tuple  # lattice points with all coefficients in (0, 1]
    support: frozenset

    @property
    def dim(self) -> int:
        return len(self.gens)


def parallelepiped(gen_vectors) -> list[tuple[Fraction, ...]]:
    """Coefficient vectors lambda in [0,1)^k with lambda . gens integral."""
    k = len(gen_vectors)
    if k == 0:
        return [()]
    S, U, _ = smith_normal_decomp(Matrix(gen_vectors))
    diag = [abs(int(S[i, i])) for i in range(k)]
    out = []
    for c in itertools.product(*(range(dv) for dv in diag)):
        lam = []
        for j in range(k):
            v = sum(Fraction(c[i] * int(U[i, j]), diag[i]) for i in range(k))
            lam.append(v - (v.numerator // v.denominator))
        out.append(tuple(lam))
    return out


def pieces(cs: ConeSystem, order=None) -> list[Piece]:
    """Disjoint relatively open simplicial cones covering the closed cone."""
    seen: dict[tuple, Piece] = {}
    for simplex in triangulate(cs, order):
        vecs = [cs.rays[k] for k in simplex]
        lams = parallelepiped(vecs)
        for r in range(len(simplex) + 1):
            for sub in itertools.combinations(range(len(simplex)), r):
                gens = tuple(simplex[i] for i in sub)
                if gens in seen:
                    continue
                pts = []
                for lam in lams:
                    if any(lam[i] for i in range(len(simplex)) if i not in sub):
                        continue
                    full = [lam[i] if lam[i] else Fraction(1) for i in sub]
                    x = [sum(full[a] * vecs[i][j] for a, i in enumerate(sub)) for j in range(cs.t)]
                    pts.append(tuple(int(v) for v in x))
                supp = frozenset(j for g in gens for j, x in enumerate(cs.rays[g]) if x)
                seen[gens] = Piece(gens, tuple(sorted(pts)), supp)
    return sorted(seen.values(), key=lambda pc: (pc.dim, pc.gens))


def piece_genfun(cs: ConeSystem, piece: Piece) -> BivariateRational:
    num = BivarPoly()
    for x in piece.points:
        a, b = cs.weight(x)
        num = num + BivarPoly.monomial(-b, a)
    den = []
    for g in piece.gens:
        a, b = cs.weight(cs.rays[g])
        den.append((-b, a, 1))
    return BivariateRational(num, tuple(den))


class _Solver:
    """Coordinates of points with respect to one set of independent generators.

    Works over the integers: lambda = num / den with num computed from an
    adjugate on k independent columns, then checked by substitution.
    """

    def __init__(self, gens):
        self.gens = [tuple(g) for g in gens]
        k = len(gens)
        # pivot columns of the generator matrix are independent
        self.cols = list(Matrix(self.gens).rref(pivots=True)[1]) if k else []
        cols = self.cols
        if k:
            sub = DomainMatrix([[ZZ(g[c]) for c in cols] for g in gens], (k, k), ZZ)
            adj, det = sub.adj_det()
            self.den = int(det)
            self.adj = [[int(v) for v in row] for row in adj.to_list()]
        else:
            self.den, self.adj = 1, []

    def coefficients(self, x):
        """Numerators of lambda over the positive denominator |den|, or None."""
        if not self.gens:
            return () if not any(x) else None
        k = len(self.gens)
        num = [sum(x[c] * self.adj[a][i] for a, c in enumerate(self.cols)) for i in range(k)]
        den = self.den
        for j in range(len(x)):
            if sum(n * g[j] for n, g in zip(num, self.gens)) != den * x[j]:
                return None
        if den < 0:
            num = [-n for n in num]
        return tuple(num)

    def interior_mask(self, X):
        """Rows of the integer array X with every coefficient positive."""
        if not self.gens:
            return ~X.any(axis=1)
        big = max(abs(v) for row in self.adj + self.gens for v in row) or 1
        bound = (big * max(1, int(X.max(initial=1))) * X.shape[1]) ** 2
        # float64 products are exact below 2^53; beyond that use Python integers
        dtype = np.float64 if bound < 2**50 else object
        adj = np.array(self.adj, dtype=dtype)
        G = np.array(self.gens, dtype=dtype)
        X = X.astype(dtype)
        num = X[:, self.cols] @ adj
        in_span = (num @ G == self.den * X).all(axis=1)
        sign = 1 if self.den > 0 else -1
        return in_span & (sign * num > 0).all(axis=1)


def locate(cs: ConeSystem, piece_list, x, solvers=None) -> list[int]:
    """Indices of the pieces whose relative interior contains x."""
    out = []
    for n, pc in enumerate(piece_list):
        if solvers is not None:
            lam = solvers[n].coefficients(x)
        else:
            lam = solve_coefficients([cs.rays[g] for g in pc.gens], x)
        if lam is not None and all(v > 0 for v in lam):
            out.append(n)
    return out


# ---------------------------------------------------------------------------
# strata and assembly


def _support_set(I) -> frozenset:
    return frozenset(I)


def closed_face_genfun(cs: ConeSystem, J, piece_list=None) -> BivariateRational:
    """Generating function of the lattice points of the cone with x_i = 0 off J."""
    J = _support_set(J)
    if piece_list is None:
        piece_list = pieces(cs)
    return sum_rationals([piece_genfun(cs, pc) for pc in piece_list if pc.support <= J]).normalize()


def stratum_genfun(cs: ConeSystem, I, method: str = "inclusion-exclusion",
                   piece_list=None) -> BivariateRational:
    """G_I: generating function of the lattice points with support exactly I."""
    I = _support_set(I)
    if piece_list is None:
        piece_list = pieces(cs)
    if method == "pieces":
        terms = [piece_genfun(cs, pc) for pc in piece_list if pc.support == I]
        return sum_rationals(terms).normalize()
    if method != "inclusion-exclusion":
        raise ValueError(f"unknown method {method!r}")
    items = sorted(I)
    terms = []
    for r in range(len(items) + 1):
        for J in itertools.combinations(items, r):
            sign = -1 if (len(items) - r) % 2 else 1
            for pc in piece_list:
                if pc.support <= frozenset(J):
                    terms.append(piece_genfun(cs, pc) * sign)
    return sum_rationals(terms).normalize()


def p_minus_one_power(e: int) -> BivarPoly:
    return BivarPoly({(1, 0): 1, (0, 0): -1}) ** e


def one_minus_inverse_p_power(e: int) -> BivarPoly:
    return BivarPoly({(0, 0): 1, (-1, 0): -1}) ** e


@dataclass
class ComponentCounts:
    """c_{p,I} as Laurent polynomials in p, keyed by support sets."""

    t: int
    table: dict = field(default_factory=dict)
    monomial: bool = False

    @classmethod
    def for_monomial(cls, t: int) -> ComponentCounts:
        return cls(t, {}, True)

    @classmethod
    def from_cpoly(cls, t: int, cpoly: dict) -> ComponentCounts:
        import sympy

        p = sympy.Symbol("p")
        table = {}
        for mask, expr in cpoly.items():
            I = frozenset(i for i in range(t) if mask >> i & 1)
            poly = sympy.Poly(sympy.expand(expr), p)
            table[I] = BivarPoly.from_p_coeffs({k[0]: int(c) if c.is_Integer else
                                                Fraction(int(c.p), int(c.q))
                                                for k, c in poly.terms()})
        return cls(t, table, False)

    def get(self, I) -> BivarPoly | None:
        I = frozenset(I)
        if self.monomial:
            return p_minus_one_power(self.t - len(I))
        return self.table.get(I)


class MissingCountError(KeyError):
    pass


def counts_for(data: ConeIntegralData) -> ComponentCounts:
    if data.cpoly is None:
        return ComponentCounts.for_monomial(data.t)
    return ComponentCounts.from_cpoly(data.t, data.cpoly)


def local_factor(data: ConeIntegralData, counts: ComponentCounts | None = None,
                 cs: ConeSystem | None = None, order=None) -> BivariateRational:
    """Z_D(s, p) as an exact rational function of (p, t)."""
    if counts is None:
        counts = counts_for(data)
    if cs is None:
        cs = build_cone(data)
    plist = pieces(cs, order)
    m = data.ambient_dim
    by_support: dict[frozenset, list] = {}
    for pc in plist:
        by_support.setdefault(pc.support, []).append(piece_genfun(cs, pc))
    if counts.monomial and m == cs.t:
        total = sum_rationals([g for gs in by_support.values() for g in gs])
        return (total * one_minus_inverse_p_power(m)).normalize()
    terms = []
    for I, gs in sorted(by_support.items(), key=lambda kv: (len(kv[0]), sorted(kv[0]))):
        c = counts.get(I)
        if c is None:
            raise MissingCountError(f"no c_(p,I) supplied for I = {sorted(i + 1 for i in I)}")
        coef = c.mul_monomial(-(m - len(I)), 0) * one_minus_inverse_p_power(len(I))
        terms.append(sum_rationals(gs) * coef)
    return sum_rationals(terms).normalize()


def zeta_factor(data: ConeIntegralData, z: BivariateRational | None = None, **kw) -> BivariateRational:
    """The local subring/ideal zeta factor (1 - p^-1)^-d Z_D(s - d, p)."""
    if data.d is None:
        raise ValueError("zeta_factor needs ring-derived data")
    if z is None:
        z = local_factor(data, **kw)
    d = data.d
    return BivariateRational(z.numerator, z.denominator + ((-1, 0, d),)).shift_t(d).normalize()


def constant_term_from_strata(data: ConeIntegralData, counts: ComponentCounts | None = None,
                              cs: ConeSystem | None = None) -> BivariateRational:
    """t-free part of Z_D, from the pieces spanned by rays with A = 0 only."""
    if counts is None:
        counts = counts_for(data)
    if cs is None:
        cs = build_cone(data)
    m = data.ambient_dim
    terms = []
    for pc in pieces(cs):
        if any(cs.weight(cs.rays[g])[0] for g in pc.gens):
            continue
        c = counts.get(pc.support)
        if c is None:
            raise MissingCountError(f"no c_(p,I) for I = {sorted(pc.support)}")
        coef = c.mul_monomial(-(m - len(pc.support)), 0) * one_minus_inverse_p_power(len(pc.support))
        terms.append(piece_genfun(cs, pc) * coef)
    return sum_rationals(terms).normalize()


def counts_identity(data: ConeIntegralData, counts: ComponentCounts | None = None) -> tuple[BivarPoly, BivarPoly]:
    """Both sides of sum_{I in T minus T0} c_{p,I} = p^{m-d} (p-1)^d."""
    if counts is None:
        counts = counts_for(data)
    free = [i for i in range(data.t) if data.f0[i] == 0]
    lhs = BivarPoly()
    for r in range(len(free) + 1):
        for I in itertools.combinations(free, r):
            c = counts.get(I)
            if c is not None:
                lhs = lhs + c
    d = data.d if data.d is not None else data.t - len(free)
    rhs = p_minus_one_power(d).mul_monomial(data.ambient_dim - d, 0)
    return lhs, rhs


# ---------------------------------------------------------------------------
# box checks


def box_points(cs: ConeSystem, K: int, max_sum: int | None = None):
    """Cone lattice points in [0,K]^t, optionally only those with |x|_1 <= max_sum."""
    if max_sum is None:
        cands = itertools.product(range(K + 1), repeat=cs.t)
    else:
        cands = _bounded_points(cs.t, K, max_sum)
    for x in cands:
        if cs.contains(x):
            yield x


def _bounded_points(t: int, K: int, budget: int):
    if t == 0:
        yield ()
        return
    for v in range(min(K, budget) + 1):
        for rest in _bounded_points(t - 1, K, budget - v):
            yield (v,) + rest


def _support_blocks(I, t: int, K: int, chunk: int = 1 << 18):
    """Arrays of all points of [0,K]^t with support exactly I, in chunks."""
    k = len(I)
    total = K**k
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk), dtype=np.int64)
        X = np.zeros((len(idx), t), dtype=np.int64)
        for pos, j in enumerate(I):
            X[:, j] = (idx // K**pos) % K + 1
        yield X


def disjoint_cover_failures(cs: ConeSystem, K: int, piece_list=None) -> list:
    """Lattice points of the cone in [0,K]^t that do not lie in exactly one piece.

    A point in the relative interior of a piece has the piece's support, so
    the box is swept one support at a time and only pieces of matching
    support are tried.
    """
    if piece_list is None:
        piece_list = pieces(cs)
    groups: dict[frozenset, list] = {}
    for n, pc in enumerate(piece_list):
        groups.setdefault(pc.support, []).append((n, _Solver([cs.rays[g] for g in pc.gens])))
    H = np.array(cs.inequalities, dtype=np.int64).reshape(-1, cs.t)
    bad = []
    for r in range(cs.t + 1):
        for I in itertools.combinations(range(cs.t), r):
            group = groups.get(frozenset(I), [])
            for X in _support_blocks(I, cs.t, K):
                X = X[(X @ H.T >= 0).all(axis=1)]
                if not len(X):
                    continue
                masks = [(n, solver.interior_mask(X)) for n, solver in group]
                count = sum((m.astype(np.int64) for _, m in masks), np.zeros(len(X), dtype=np.int64))
                for row in np.nonzero(count != 1)[0]:
                    bad.append((tuple(int(v) for v in X[row]), [n for n, m in masks if m[row]]))
    return bad


def box_genfun_failures(cs: ConeSystem, K: int, piece_list=None) -> list:
    """Compare the per-support generating functions with enumeration.

    The grading A(x) = |x|_1 and B(x) = sum x_j (K+1)^j encode each point of
    the box uniquely, so coefficient equality up to t^K is equality of point
    sets with |x|_1 <= K.
    """
    from .exact import series_expand

    base = K + 1
    g0 = tuple(base**j - 1 for j in range(cs.t))
    graded = cs.with_weights((1,) * cs.t, g0, (1,) * cs.t)
    if piece_list is None:
        piece_list = pieces(cs)
    expected: dict[frozenset, dict] = {}
    for x in box_points(cs, K, max_sum=K):
        supp = frozenset(j for j, v in enumerate(x) if v)
        a, b = graded.weight(x)
        expected.setdefault(supp, {})
        expected[supp][(-b, a)] = expected[supp].get((-b, a), 0) + 1
    supports = {pc.support for pc in piece_list} | set(expected)
    bad = []
    for I in sorted(supports, key=lambda s: (len(s), sorted(s))):
        g = sum_rationals([piece_genfun(graded, pc) for pc in piece_list if pc.support == I])
        ser = series_expand(g, K)
        got = BivarPoly({(a, n): c for n, coeff in enumerate(ser.coeffs) for (a, _), c in coeff.terms.items()})
        want = BivarPoly(expected.get(I, {}))
        if got != want:
            bad.append(I)
    return bad

