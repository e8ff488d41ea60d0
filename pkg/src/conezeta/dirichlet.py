"""Euler products: local coefficients, global Dirichlet coefficients, partial sums.

Only the asymptotic ratio tables use floating point; the coefficients and
the partial sums s_N are exact integers (or Fractions).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .exact import BivariateRational, TSeries, UniRational, series_expand, specialize
from .oracle import DEFAULT_BUDGET, count_lattices
from .rings import StructureConstants


class SourceMismatch(AssertionError):
    """Cone-derived and oracle local coefficients disagree."""


class MissingPrime(KeyError):
    pass


# ---------------------------------------------------------------------------
# local sources


@dataclass
class ConeSource:
    """Symbolic local factor; coefficients come from one series expansion."""

    factor: BivariateRational
    exceptional: frozenset = frozenset()
    oracle: OracleSource | None = None
    check_primes: tuple = (2, 3, 5, 7)
    check_depth: int = 4
    name: str = "cone"
    _series: TSeries | None = field(default=None, repr=False)

    def series(self, order: int) -> TSeries:
        if self._series is None or self._series.order < order:
            self._series = series_expand(self.factor, max(order, 1))
        return self._series

    def coeffs(self, p: int, n_max: int) -> list:
        if p in self.exceptional and self.oracle is not None:
            return self.oracle.coeffs(p, n_max)
        ser = self.series(n_max)
        out = [_as_int(ser.coeffs[n].evaluate(p).get(0, 0)) for n in range(n_max + 1)]
        if self.oracle is not None and p in self.check_primes:
            depth = min(n_max, self.check_depth)
            ref = self.oracle.coeffs(p, depth)
            if out[: depth + 1] != ref:
                raise SourceMismatch(f"p={p}: cone {out[:depth + 1]} vs oracle {ref}")
        return out


@dataclass
class OracleSource:
    sc: StructureConstants
    kind: str
    budget: int = DEFAULT_BUDGET
    name: str = "oracle"
    _cache: dict = field(default_factory=dict, repr=False)

    def coeffs(self, p: int, n_max: int) -> list:
        out = []
        for n in range(n_max + 1):
            key = (p, n)
            if key not in self._cache:
                self._cache[key] = count_lattices(self.sc, p, n, self.kind, self.budget)
            out.append(self._cache[key])
        return out


@dataclass
class FixtureSource:
    """prod zeta(b s - a)^e with optional exceptional local corrections.

    ``corrections`` maps p to (numerator coefficients in t, denominator
    triples (c, b, e) meaning (1 - c t^b)^e); the generic Euler factor at p
    is multiplied by it.
    """

    factors: list
    corrections: dict = field(default_factory=dict)
    name: str = "fixture"
    _series: TSeries | None = field(default=None, repr=False)

    @classmethod
    def from_fixture(cls, fix: dict) -> FixtureSource:
        return cls(list(fix["factors"]), dict(fix.get("corrections", {})))

    def local(self, p: int) -> UniRational:
        r = specialize(BivariateRational.zeta_product(self.factors), p)
        if p in self.corrections:
            num, den = self.corrections[p]
            r = r * UniRational(tuple(num), tuple(den))
        return r

    def coeffs(self, p: int, n_max: int) -> list:
        if p in self.corrections:
            return [_as_int(v) for v in self.local(p).series(n_max)]
        if self._series is None or self._series.order < n_max:
            self._series = series_expand(BivariateRational.zeta_product(self.factors), max(n_max, 1))
        return [_as_int(self._series.coeffs[n].evaluate(p).get(0, 0)) for n in range(n_max + 1)]


def _as_int(v):
    v = Fraction(v)
    return v.numerator if v.denominator == 1 else v


def local_coeffs(source, p: int, n_max: int) -> list:
    """a_{p^0}, ..., a_{p^n_max} from a cone, oracle or fixture source."""
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    return source.coeffs(p, n_max)[: n_max + 1]


# ---------------------------------------------------------------------------
# global coefficients


def primes_up_to(n: int) -> list[int]:
    if n < 2:
        return []
    sieve = bytearray([1]) * (n + 1)
    sieve[0] = sieve[1] = 0
    for i in range(2, math.isqrt(n) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(range(i * i, n + 1, i)))
    return [i for i in range(n + 1) if sieve[i]]


def smallest_prime_factors(n: int) -> list[int]:
    spf = list(range(n + 1))
    for i in range(2, math.isqrt(n) + 1):
        if spf[i] == i:
            for j in range(i * i, n + 1, i):
                if spf[j] == j:
                    spf[j] = i
    return spf


def prime_power_depth(p: int, N: int) -> int:
    k, q = 0, p
    while q <= N:
        k += 1
        q *= p
    return k


@dataclass
class DirichletCoeffs:
    N: int
    a: list  # a[0] unused, a[n] for 1 <= n <= N
    provenance: list = field(default_factory=list)  # (p, source name)

    def __getitem__(self, n: int):
        return self.a[n]

    def is_multiplicative_on(self, pairs) -> bool:
        return all(self.a[m * n] == self.a[m] * self.a[n] for m, n in pairs
                   if math.gcd(m, n) == 1 and m * n <= self.N)

    def dump(self) -> str:
        return "".join(f"{n} {self.a[n]}\n" for n in range(1, self.N + 1))


def global_coeffs(local: dict, N: int, provenance=None) -> DirichletCoeffs:
    """Assemble a_n = prod a_{p^v} from local lists {p: [a_1, a_p, a_p^2, ...]}."""
    for p in primes_up_to(N):
        if p not in local:
            raise MissingPrime(p)
        if len(local[p]) <= prime_power_depth(p, N):
            raise MissingPrime(f"local data at p={p} too short")
    spf = smallest_prime_factors(N)
    a = [0] * (N + 1)
    if N >= 1:
        a[1] = 1
    for n in range(2, N + 1):
        p = spf[n]
        m, v = n, 0
        while m % p == 0:
            m //= p
            v += 1
        a[n] = a[m] * local[p][v]
    return DirichletCoeffs(N, a, list(provenance or []))


def euler_product(source, N: int) -> DirichletCoeffs:
    local = {}
    prov = []
    for p in primes_up_to(N):
        local[p] = local_coeffs(source, p, prime_power_depth(p, N))
        prov.append((p, getattr(source, "name", type(source).__name__)))
    return global_coeffs(local, N, prov)


# ---------------------------------------------------------------------------
# partial sums and asymptotics


def geometric_checkpoints(N: int, start: int = 10) -> list[int]:
    out = []
    x = start
    while x <= N:
        out.append(x)
        x *= 10
    if not out or out[-1] != N:
        out.append(N)
    return out


@dataclass
class PartialSums:
    checkpoints: list
    s: list  # exact
    s_alpha: list  # floating


def partial_sums(dc: DirichletCoeffs, alpha=0, checkpoints=None) -> PartialSums:
    """s_N = sum a_n and s_N^alpha = sum a_n / n^alpha at the checkpoints."""
    if checkpoints is None:
        checkpoints = geometric_checkpoints(dc.N)
    alpha_f = float(alpha)
    marks = set(checkpoints)
    s, sa = 0, 0.0
    comp = 0.0  # Kahan compensation
    out_s, out_sa = [], []
    for n in range(1, max(checkpoints) + 1):
        an = dc.a[n]
        s += an
        term = float(an) / n**alpha_f if alpha_f else float(an)
        y = term - comp
        tot = sa + y
        comp = (tot - sa) - y
        sa = tot
        if n in marks:
            out_s.append(s)
            out_sa.append(sa)
    return PartialSums(list(checkpoints), out_s, out_sa)


@dataclass
class AsymptoticReport:
    alpha: Fraction
    b: int
    rows: list  # (N, s_N, r_N, r'_N)
    stabilization: float
    fitted: float | None
    monotone_tail: bool

    def table(self) -> str:
        head = f"{'N':>10} {'s_N':>22} {'r_N':>14} {'r2_N':>14}"
        lines = [head]
        for N, s, r, r2 in self.rows:
            r2s = f"{r2:14.8f}" if r2 is not None else f"{'-':>14}"
            lines.append(f"{N:>10} {s:>22} {r:14.8f} {r2s}")
        lines.append(f"stabilization (max rel. change, last 3): {self.stabilization:.3e}")
        if self.fitted is not None:
            lines.append(f"fitted constant (c + c'/log N): {self.fitted:.8f}")
        return "\n".join(lines)

    def last_ratio(self) -> float:
        return self.rows[-1][2]


def asymptotic_report(dc: DirichletCoeffs, alpha, b: int, checkpoints=None) -> AsymptoticReport:
    """Ratios r_N = s_N/(N^alpha (log N)^b) and r'_N = s_N^alpha/(log N)^(b+1)."""
    ps = partial_sums(dc, alpha, checkpoints)
    rows = []
    for N, s, sa in zip(ps.checkpoints, ps.s, ps.s_alpha):
        L = math.log(N)
        r = s / (N ** float(alpha) * L**b)
        r2 = sa / L ** (b + 1) if N > 1 else None
        rows.append((N, s, r, r2))
    tail = [r for _, _, r, _ in rows[-3:]]
    stab = max((abs(tail[i + 1] - tail[i]) / abs(tail[i]) for i in range(len(tail) - 1)),
               default=0.0)
    mono = len(tail) >= 3 and (all(x < y for x, y in zip(tail, tail[1:])) or
                               all(x > y for x, y in zip(tail, tail[1:])))
    fitted = None
    if len(rows) >= 2:
        (n1, _, r1, _), (n2, _, r2_, _) = rows[-2], rows[-1]
        x1, x2 = 1 / math.log(n1), 1 / math.log(n2)
        fitted = r2_ - (r1 - r2_) / (x1 - x2) * x2
    return AsymptoticReport(Fraction(alpha), b, rows, stab, fitted, mono)


# ---------------------------------------------------------------------------
# a non-Euler example: 2^{-s} zeta(s) + zeta(s - 1)


def dinf_coeffs(N: int) -> DirichletCoeffs:
    a = [0] + [n + (1 if n % 2 == 0 else 0) for n in range(1, N + 1)]
    return DirichletCoeffs(N, a, [(0, "fixture")])


def growth_exponent(dc: DirichletCoeffs, max_den: int = 6) -> Fraction:
    """Slope of log s_N against log N between the two largest decades."""
    cps = geometric_checkpoints(dc.N)
    if len(cps) < 2:
        raise ValueError("need at least two checkpoints")
    ps = partial_sums(dc, 0, cps[-2:])
    (n1, n2), (s1, s2) = ps.checkpoints, ps.s
    slope = math.log(s2 / s1) / math.log(n2 / n1)
    return Fraction(slope).limit_denominator(max_den)


def is_multiplicative(dc: DirichletCoeffs, limit: int = 50) -> bool:
    pairs = [(m, n) for m in range(2, limit) for n in range(m + 1, limit)]
    return dc.is_multiplicative_on(pairs)
