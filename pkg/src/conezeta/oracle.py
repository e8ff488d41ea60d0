"""Brute-force subring and ideal counts by Hermite-normal-form enumeration.

A sublattice of index p^n in Z_p^d has a unique basis given by an upper
triangular matrix with diagonal p^{a_1}, ..., p^{a_d} (sum a_i = n) whose
entry (i, j), i < j, is reduced modulo p^{a_j}.  The lattice is a subring
(ideal) when the products of its basis rows (with the standard basis) lie
in its row span.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from .rings import LatticeBasis, StructureConstants

SUBRING, IDEAL = "subring", "ideal"
DEFAULT_BUDGET = 20_000_000


class BudgetExceeded(RuntimeError):
    pass


def membership(M, v, p: int) -> bool:
    """Whether v lies in the Z_p-row span of the upper triangular basis M.

    Back-substitution solves y M = v exactly over Q; v is in the span iff
    no y_k has p in its denominator.
    """
    rows = M.entries if isinstance(M, LatticeBasis) else M
    d = len(rows)
    rem = list(v)
    for k in range(d):
        pivot = rows[k][k]
        if pivot == 0:
            raise ValueError("zero diagonal entry")
        x = rem[k]
        if x == 0:
            continue
        if isinstance(x, int) and x % pivot == 0:
            y = x // pivot
        else:
            y = Fraction(x) / pivot
            if y.denominator % p == 0:
                return False
        row = rows[k]
        for j in range(k + 1, d):
            if row[j]:
                rem[j] -= y * row[j]
    return True


def closure_holds(sc: StructureConstants, rows, p: int, kind: str) -> bool:
    d = sc.d
    if kind == SUBRING:
        anti = sc.kind == "lie"
        for i in range(d):
            for j in range(d):
                if anti and j <= i:
                    continue
                if not membership(rows, sc.beta(rows[i], rows[j]), p):
                    return False
        return True
    if kind == IDEAL:
        for i in range(d):
            for j in range(d):
                e = [0] * d
                e[j] = 1
                if not membership(rows, sc.beta(rows[i], e), p):
                    return False
                if not membership(rows, sc.beta(e, rows[i]), p):
                    return False
        return True
    raise ValueError(f"unknown kind {kind!r}")


def compositions(n: int, parts: int):
    """Tuples of ``parts`` nonnegative integers summing to n."""
    if parts == 0:
        if n == 0:
            yield ()
        return
    if parts == 1:
        yield (n,)
        return
    for first in range(n + 1):
        for rest in compositions(n - first, parts - 1):
            yield (first,) + rest


def hnf_bases(d: int, p: int, n: int):
    """All HNF bases (as row tuples) of sublattices of index p^n in Z_p^d."""
    for exps in compositions(n, d):
        yield from _hnf_with_diagonal(d, p, exps)


def _hnf_with_diagonal(d: int, p: int, exps):
    diag = [p**a for a in exps]
    slots = [(i, j) for j in range(d) for i in range(j)]
    ranges = [range(diag[j]) for (_, j) in slots]
    for values in itertools.product(*ranges):
        m = [[0] * d for _ in range(d)]
        for i in range(d):
            m[i][i] = diag[i]
        for (i, j), x in zip(slots, values):
            m[i][j] = x
        yield tuple(tuple(r) for r in m)


def hnf_count(d: int, p: int, n: int) -> int:
    """Number of sublattices of index p^n in Z_p^d (no enumeration)."""
    total = 0
    for exps in compositions(n, d):
        total += p ** sum(a * j for j, a in enumerate(exps))
    return total


def central_split(sc: StructureConstants) -> int:
    """Smallest k such that span(e_{k+1}, ..., e_d) is central and contains beta(L, L).

    Returns d when no proper tail qualifies.  When k < d, closure of a
    lattice does not depend on the entries of rows 1..k in columns k+1..d.
    """
    d = sc.d
    for k in range(d + 1):
        ok = True
        for i in range(d):
            for j in range(d):
                vec = sc.table[i][j]
                if any(vec[:k]):
                    ok = False
                elif (i >= k or j >= k) and any(vec):
                    ok = False
                if not ok:
                    break
            if not ok:
                break
        if ok:
            return k
    return d


def count_lattices(sc: StructureConstants, p: int, n: int, kind: str,
                   budget: int = DEFAULT_BUDGET, use_split: bool = True,
                   closed_form: bool = True) -> int:
    """Number of subrings or ideals of index p^n in L tensor Z_p.

    ``use_split`` exploits a central tail containing all products (see
    central_split); ``closed_form`` counts all sublattices directly when the
    product is identically zero.  Both can be switched off for a plain
    enumeration.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if kind not in (SUBRING, IDEAL):
        raise ValueError(f"unknown kind {kind!r}")
    d = sc.d
    if n == 0:
        return 1
    if closed_form and sc.is_zero():
        return hnf_count(d, p, n)
    k = central_split(sc) if use_split else d
    work = 0
    total = 0
    for exps in compositions(n, d):
        top, bottom = exps[:k], exps[k:]
        free = p ** (k * sum(bottom))
        top_bases = list(_hnf_with_diagonal(k, p, top)) if k else [()]
        for bot in _hnf_with_diagonal(d - k, p, bottom):
            for tb in top_bases:
                work += 1
                if work > budget:
                    raise BudgetExceeded(f"more than {budget} bases at p={p}, n={n}")
                rows = tuple(tuple(r) + (0,) * (d - k) for r in tb) + \
                    tuple((0,) * k + tuple(r) for r in bot)
                if closure_holds(sc, rows, p, kind):
                    total += free
    return total


def dirichlet_prefix(sc: StructureConstants, p: int, n_max: int, kind: str,
                     budget: int = DEFAULT_BUDGET) -> list[int]:
    return [count_lattices(sc, p, n, kind, budget) for n in range(n_max + 1)]
