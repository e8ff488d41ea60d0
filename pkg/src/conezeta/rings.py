"""Rings additively isomorphic to Z^d, given by structure constants.

Multiplication is the bilinear map ``beta(e_i, e_j) = sum_k table[i][j][k] e_k``.
Indices are 0-based in code and 1-based in the ring file format::

    d 3 lie
    1 2 3 1
    2 1 3 -1

means beta(e_1, e_2) = e_3 and beta(e_2, e_1) = -e_3 in a rank-3 Lie ring.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from pathlib import Path

KINDS = ("lie", "associative", "plain")


class RingFormatError(ValueError):
    pass


@dataclass(frozen=True)
class StructureConstants:
    d: int
    table: tuple  # table[i][j] = tuple of d ints, the coordinates of beta(e_i, e_j)
    kind: str = "lie"
    name: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise RingFormatError(f"unknown ring kind {self.kind!r}")
        if self.d < 1:
            raise RingFormatError("rank must be positive")
        if len(self.table) != self.d or any(len(row) != self.d for row in self.table):
            raise RingFormatError(f"table must be {self.d} x {self.d}")
        for row in self.table:
            for vec in row:
                if len(vec) != self.d:
                    raise RingFormatError(f"table entries must have length {self.d}")
                if any(not isinstance(x, int) for x in vec):
                    raise RingFormatError("structure constants must be integers")

    @classmethod
    def from_brackets(cls, d: int, brackets: dict, kind: str = "lie", name: str = "",
                      antisymmetric: bool | None = None) -> StructureConstants:
        """Build from {(i, j): {k: c}} with 0-based indices.

        For Lie rings the entry (j, i) is filled in as the negative of (i, j).
        """
        if antisymmetric is None:
            antisymmetric = kind == "lie"
        tab = [[[0] * d for _ in range(d)] for _ in range(d)]
        for (i, j), vec in brackets.items():
            for k, c in vec.items():
                tab[i][j][k] += c
                if antisymmetric:
                    tab[j][i][k] -= c
        return cls(d, _freeze(tab), kind, name)

    def beta(self, u, v) -> list[int]:
        """Bilinear product of two coordinate vectors."""
        d = self.d
        out = [0] * d
        for i, ui in enumerate(u):
            if not ui:
                continue
            row = self.table[i]
            for j, vj in enumerate(v):
                if not vj:
                    continue
                c = ui * vj
                for k, x in enumerate(row[j]):
                    if x:
                        out[k] += c * x
        return out

    def is_zero(self) -> bool:
        return all(not any(vec) for row in self.table for vec in row)

    def structure_matrix(self, j: int) -> list[list[int]]:
        """C_j: the matrix whose i-th row is beta(e_i, e_j)."""
        return [list(self.table[i][j]) for i in range(self.d)]

    def is_antisymmetric(self) -> bool:
        d = self.d
        return all(
            all(x == -y for x, y in zip(self.table[i][j], self.table[j][i]))
            for i in range(d) for j in range(d)
        )


def _freeze(tab) -> tuple:
    return tuple(tuple(tuple(vec) for vec in row) for row in tab)


@dataclass
class ValidationReport:
    kind: str
    checks: dict[str, bool] = field(default_factory=dict)
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def __str__(self):
        lines = [f"{name}: {'pass' if ok else 'FAIL'}" for name, ok in self.checks.items()]
        return "\n".join(lines + [f"  {f}" for f in self.failures[:10]])


def validate(sc: StructureConstants) -> ValidationReport:
    rep = ValidationReport(sc.kind)
    d = sc.d
    basis = [[int(i == k) for k in range(d)] for i in range(d)]
    if sc.kind == "lie":
        ok = True
        for i in range(d):
            if any(sc.table[i][i]):
                ok = False
                rep.failures.append(f"beta(e{i + 1}, e{i + 1}) != 0")
        for i, j in itertools.combinations(range(d), 2):
            if any(x != -y for x, y in zip(sc.table[i][j], sc.table[j][i])):
                ok = False
                rep.failures.append(f"beta(e{i + 1}, e{j + 1}) != -beta(e{j + 1}, e{i + 1})")
        rep.checks["antisymmetry"] = ok
        ok = True
        for i, j, k in itertools.combinations(range(d), 3):
            x, y, z = basis[i], basis[j], basis[k]
            s = [a + b + c for a, b, c in zip(sc.beta(x, sc.beta(y, z)),
                                              sc.beta(y, sc.beta(z, x)),
                                              sc.beta(z, sc.beta(x, y)))]
            if any(s):
                ok = False
                rep.failures.append(f"Jacobi fails on (e{i + 1}, e{j + 1}, e{k + 1})")
        rep.checks["jacobi"] = ok
    elif sc.kind == "associative":
        ok = True
        for i, j, k in itertools.product(range(d), repeat=3):
            x, y, z = basis[i], basis[j], basis[k]
            if sc.beta(sc.beta(x, y), z) != sc.beta(x, sc.beta(y, z)):
                ok = False
                rep.failures.append(f"associativity fails on (e{i + 1}, e{j + 1}, e{k + 1})")
        rep.checks["associativity"] = ok
    else:
        rep.checks["bilinear"] = True
    return rep


# ---------------------------------------------------------------------------
# sublattice bases


@dataclass(frozen=True)
class LatticeBasis:
    p: int
    entries: tuple  # d x d upper triangular integer rows

    @property
    def d(self) -> int:
        return len(self.entries)

    @property
    def exponents(self) -> tuple[int, ...]:
        return tuple(_valuation(self.entries[i][i], self.p) for i in range(self.d))

    @property
    def index(self) -> int:
        out = 1
        for i in range(self.d):
            out *= self.entries[i][i]
        return out

    def reduced(self) -> LatticeBasis:
        """Hermite normal form of the row span (over Z_p)."""
        return LatticeBasis(self.p, hermite_reduce(self.entries, self.p))


def _valuation(x: int, p: int) -> int:
    if x == 0:
        raise ValueError("zero has infinite valuation")
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def hermite_reduce(rows, p: int) -> tuple:
    """HNF representative (over Z_p) of the row span of an upper triangular basis."""
    d = len(rows)
    m = [list(r) for r in rows]
    exps = []
    for i in range(d):
        if m[i][i] == 0:
            raise ValueError("zero diagonal entry")
        exps.append(_valuation(m[i][i], p))
    # the lattice contains p^n Z_p^d, so entries only matter modulo p^n
    mod = p ** sum(exps)
    for i in range(d):
        unit = m[i][i] // p ** exps[i]
        inv = pow(unit, -1, mod * p) if unit != 1 else 1
        m[i] = [(c * inv) % mod for c in m[i]]
        m[i][i] = p ** exps[i]
    for j in range(1, d):
        pivot = m[j][j]
        for i in range(j):
            q = m[i][j] // pivot
            if q:
                m[i] = [a - q * b for a, b in zip(m[i], m[j])]
    return tuple(tuple(r) for r in m)



# ---------------------------------------------------------------------------
# built-in examples


def zd(d: int) -> StructureConstants:
    return StructureConstants.from_brackets(d, {}, "lie", f"zd({d})")


def heisenberg() -> StructureConstants:
    return StructureConstants.from_brackets(3, {(0, 1): {2: 1}}, "lie", "heisenberg")


def sl2() -> StructureConstants:
    # basis (e, f, h): [e, f] = h, [h, e] = 2e, [h, f] = -2f
    return StructureConstants.from_brackets(
        3, {(0, 1): {2: 1}, (2, 0): {0: 2}, (2, 1): {1: -2}}, "lie", "sl2")


def f23() -> StructureConstants:
    # basis x1, x2, x3, y12, y13, y23 with [x_i, x_j] = y_ij central
    return StructureConstants.from_brackets(
        6, {(0, 1): {3: 1}, (0, 2): {4: 1}, (1, 2): {5: 1}}, "lie", "f23")


_ZD = re.compile(r"^zd\(?(\d+)\)?$")


def builtin(name: str) -> StructureConstants:
    name = name.strip().lower()
    m = _ZD.match(name)
    if m:
        return zd(int(m.group(1)))
    table = {"heisenberg": heisenberg, "sl2": sl2, "f23": f23}
    if name not in table:
        raise KeyError(f"unknown built-in ring {name!r}; expected zd(d), heisenberg, sl2 or f23")
    return table[name]()


# Closed forms stated for the built-ins, kept as test fixtures only: lists of
# (a, b, e) meaning prod zeta(b s - a)^e, plus exceptional local corrections
# given as (numerator coefficients, denominator (c, b, e) triples) in t = p^-s.
FIXTURES = {
    ("heisenberg", "subring"): {
        "factors": [(0, 1, 1), (1, 1, 1), (2, 2, 1), (3, 2, 1), (3, 3, -1)],
        "corrections": {},
    },
    ("sl2", "subring"): {
        "factors": [(0, 1, 1), (1, 1, 1), (2, 2, 1), (1, 2, 1), (1, 3, -1)],
        "corrections": {2: ((1, 0, 6, -8), ((2, 3, 1),))},
    },
}


def zd_fixture(d: int) -> dict:
    return {"factors": [(i, 1, 1) for i in range(d)], "corrections": {}}


def fixture_for(sc: StructureConstants, kind: str) -> dict | None:
    m = _ZD.match(sc.name)
    if m:
        return zd_fixture(int(m.group(1)))
    return FIXTURES.get((sc.name, kind))


# ---------------------------------------------------------------------------
# ring file format


def dumps(sc: StructureConstants) -> str:
    lines = [f"d {sc.d} {sc.kind}"]
    for i in range(sc.d):
        for j in range(sc.d):
            for k, c in enumerate(sc.table[i][j]):
                if c:
                    lines.append(f"{i + 1} {j + 1} {k + 1} {c}")
    return "\n".join(lines) + "\n"


def loads(text: str, name: str = "") -> StructureConstants:
    header = None
    entries = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if header is None:
            if len(parts) != 3 or parts[0] != "d":
                raise RingFormatError(f"line {lineno}: expected 'd <rank> <kind>'")
            try:
                d = int(parts[1])
            except ValueError:
                raise RingFormatError(f"line {lineno}: bad rank {parts[1]!r}") from None
            header = (d, parts[2])
            continue
        if len(parts) != 4:
            raise RingFormatError(f"line {lineno}: expected '<i> <j> <k> <coeff>'")
        try:
            i, j, k, c = (int(x) for x in parts)
        except ValueError:
            raise RingFormatError(f"line {lineno}: non-integer entry") from None
        entries.append((lineno, i, j, k, c))
    if header is None:
        raise RingFormatError("empty ring file")
    d, kind = header
    if d < 1:
        raise RingFormatError("rank must be positive")
    tab = [[[0] * d for _ in range(d)] for _ in range(d)]
    for lineno, i, j, k, c in entries:
        if not (1 <= i <= d and 1 <= j <= d and 1 <= k <= d):
            raise RingFormatError(f"line {lineno}: index out of range 1..{d}")
        tab[i - 1][j - 1][k - 1] += c
    return StructureConstants(d, _freeze(tab), kind, name)


def load(path: str | Path) -> StructureConstants:
    path = Path(path)
    return loads(path.read_text(), name=path.stem)
