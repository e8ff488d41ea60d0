"""Exact arithmetic in two variables (p, t).

``t`` always stands for ``p^{-s}``.  Local zeta factors are rational
functions whose denominators are products of binomials ``1 - p^a t^b``;
:class:`BivariateRational` keeps them in that factored shape.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence


def _clean(c):
    if isinstance(c, Fraction) and c.denominator == 1:
        return c.numerator
    return c


def _pow(p, a):
    """p**a as an exact int or Fraction (a may be negative)."""
    return p**a if a >= 0 else Fraction(1, p ** (-a))


class BivarPoly:
    """Finite sum of terms c * p^a * t^b with a in Z and b >= 0."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Mapping[tuple[int, int], object] | None = None):
        clean = {}
        if terms:
            for key, c in terms.items():
                if c:
                    if key[1] < 0:
                        raise ValueError(f"negative t-exponent in {key}")
                    clean[key] = _clean(c)
        self.terms = clean
        self._hash = None

    # -- constructors -----------------------------------------------------
    @classmethod
    def monomial(cls, a: int = 0, b: int = 0, c=1) -> BivarPoly:
        return cls({(a, b): c})

    @classmethod
    def constant(cls, c) -> BivarPoly:
        return cls({(0, 0): c})

    @classmethod
    def one_minus(cls, a: int, b: int) -> BivarPoly:
        """The binomial 1 - p^a t^b."""
        return cls({(0, 0): 1}) - cls({(a, b): 1})

    @classmethod
    def from_p_coeffs(cls, coeffs: Mapping[int, object]) -> BivarPoly:
        return cls({(a, 0): c for a, c in coeffs.items()})

    # -- basic protocol ---------------------------------------------------
    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def is_one(self) -> bool:
        return self.terms == {(0, 0): 1}

    def __eq__(self, other):
        if isinstance(other, BivarPoly):
            return self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self.terms == BivarPoly.constant(other).terms
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __repr__(self):
        return f"BivarPoly({render_poly(self)})"

    def __str__(self):
        return render_poly(self)

    def sorted_terms(self) -> list[tuple[tuple[int, int], object]]:
        """Terms in canonical order: by t-exponent, then p-exponent."""
        return sorted(self.terms.items(), key=lambda kv: (kv[0][1], kv[0][0]))

    # -- arithmetic -------------------------------------------------------
    @staticmethod
    def _coerce(other):
        if isinstance(other, BivarPoly):
            return other
        if isinstance(other, (int, Fraction)):
            return BivarPoly.constant(other)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0) + c
        return BivarPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return BivarPoly({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return BivarPoly({k: c * other for k, c in self.terms.items()})
        if not isinstance(other, BivarPoly):
            return NotImplemented
        out: dict[tuple[int, int], object] = defaultdict(int)
        for (a1, b1), c1 in self.terms.items():
            for (a2, b2), c2 in other.terms.items():
                out[(a1 + a2, b1 + b2)] += c1 * c2
        return BivarPoly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power of a polynomial")
        result = BivarPoly.constant(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def mul_monomial(self, a: int, b: int, c=1) -> BivarPoly:
        return BivarPoly({(x + a, y + b): v * c for (x, y), v in self.terms.items()})

    def mul_one_minus(self, a: int, b: int) -> BivarPoly:
        return self - self.mul_monomial(a, b)

    # -- structure --------------------------------------------------------
    def t_degree(self) -> int:
        return max((b for _, b in self.terms), default=-1)

    def is_t_free(self) -> bool:
        return all(b == 0 for _, b in self.terms)

    def t_coefficient(self, n: int) -> BivarPoly:
        """Coefficient of t^n, a Laurent polynomial in p alone."""
        return BivarPoly({(a, 0): c for (a, b), c in self.terms.items() if b == n})

    def truncate(self, order: int) -> BivarPoly:
        return BivarPoly({k: c for k, c in self.terms.items() if k[1] <= order})

    def shift_t(self, d: int) -> BivarPoly:
        """Substitute t -> p^d t (i.e. s -> s - d)."""
        return BivarPoly({(a + d * b, b): c for (a, b), c in self.terms.items()})

    def p_coeffs(self) -> dict[int, object]:
        if not self.is_t_free():
            raise ValueError("polynomial involves t")
        return {a: c for (a, _), c in self.terms.items()}

    def leading_p_coefficient(self):
        if not self.terms:
            return 0
        top = max(a for a, _ in self.terms)
        return sum(c for (a, _), c in self.terms.items() if a == top)

    def evaluate(self, p, t=None):
        """Exact value at integer p (and t if given; else a t-polynomial dict)."""
        if t is None:
            out: dict[int, object] = defaultdict(int)
            for (a, b), c in self.terms.items():
                out[b] += c * _pow(p, a)
            return {b: _clean(Fraction(v)) for b, v in out.items() if v}
        total = 0
        for (a, b), c in self.terms.items():
            total += c * _pow(p, a) * t**b
        return _clean(Fraction(total))

    def divide_one_minus(self, a: int, b: int) -> BivarPoly | None:
        """Exact quotient by 1 - p^a t^b, or None if it does not divide."""
        if a == 0 and b == 0:
            raise ValueError("1 - p^0 t^0 is zero")
        if not self.terms:
            return BivarPoly()
        # grade terms so that multiplication by p^a t^b strictly raises the grade
        if b > 0:
            grade = lambda key: key[1]  # noqa: E731
        elif a > 0:
            grade = lambda key: key[0]  # noqa: E731
        else:
            grade = lambda key: -key[0]  # noqa: E731
        top = max(grade(k) for k in self.terms)
        rem = dict(self.terms)
        quot: dict[tuple[int, int], object] = {}
        while rem:
            low = min(grade(k) for k in rem)
            if low > top:
                return None
            for key in [k for k in rem if grade(k) == low]:
                c = rem.pop(key)
                quot[key] = quot.get(key, 0) + c
                nk = (key[0] + a, key[1] + b)
                v = rem.get(nk, 0) + c
                if v:
                    rem[nk] = v
                else:
                    rem.pop(nk, None)
        return BivarPoly(quot)


def p_poly(coeffs: Mapping[int, object]) -> BivarPoly:
    return BivarPoly.from_p_coeffs(coeffs)


P = BivarPoly.monomial(1, 0)
T = BivarPoly.monomial(0, 1)
ONE = BivarPoly.constant(1)


# ---------------------------------------------------------------------------
# rational functions with binomial denominators


Factor = tuple[int, int, int]  # (a, b, multiplicity) meaning (1 - p^a t^b)^mult


def _merge_factors(factors: Iterable[Factor]) -> tuple[Factor, ...]:
    acc: dict[tuple[int, int], int] = defaultdict(int)
    for a, b, e in factors:
        if a == 0 and b == 0:
            raise ValueError("denominator factor 1 - p^0 t^0 vanishes")
        if b < 0:
            raise ValueError("negative t-exponent in denominator factor")
        acc[(a, b)] += e
    for (a, b), e in acc.items():
        if e < 0:
            raise ValueError(f"negative multiplicity for factor ({a}, {b})")
    return tuple(sorted(((a, b, e) for (a, b), e in acc.items() if e), key=lambda f: (f[1], f[0])))


def expand_factors(factors: Iterable[Factor]) -> BivarPoly:
    out = ONE
    for a, b, e in factors:
        for _ in range(e):
            out = out.mul_one_minus(a, b)
    return out


@dataclass(frozen=True, eq=False)
class BivariateRational:
    numerator: BivarPoly
    denominator: tuple[Factor, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "denominator", _merge_factors(self.denominator))

    @classmethod
    def from_poly(cls, poly: BivarPoly | int) -> BivariateRational:
        if not isinstance(poly, BivarPoly):
            poly = BivarPoly.constant(poly)
        return cls(poly, ())

    @classmethod
    def zeta_product(cls, factors: Iterable[Factor]) -> BivariateRational:
        """Local factor of prod zeta(b s - a)^e, i.e. prod (1 - p^a t^b)^(-e)."""
        num = ONE
        den = []
        for a, b, e in factors:
            if e > 0:
                den.append((a, b, e))
            elif e < 0:
                for _ in range(-e):
                    num = num.mul_one_minus(a, b)
        return cls(num, tuple(den)).normalize()

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other: BivariateRational) -> BivariateRational:
        if isinstance(other, (BivarPoly, int, Fraction)):
            other = BivariateRational.from_poly(other)
        return sum_rationals([self, other])

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            other = BivarPoly.constant(other)
        if isinstance(other, BivarPoly):
            return BivariateRational(self.numerator * other, self.denominator)
        if isinstance(other, BivariateRational):
            return BivariateRational(self.numerator * other.numerator,
                                     self.denominator + other.denominator)
        return NotImplemented

    __rmul__ = __mul__

    def divide_by_factors(self, factors: Iterable[Factor]) -> BivariateRational:
        return BivariateRational(self.numerator, self.denominator + tuple(factors))

    def shift_t(self, d: int) -> BivariateRational:
        """Substitute t -> p^d t."""
        return BivariateRational(self.numerator.shift_t(d),
                                 tuple((a + d * b, b, e) for a, b, e in self.denominator))

    def normalize(self) -> BivariateRational:
        return rational_normalize(self)

    def constant_term(self) -> BivariateRational:
        """Value at t = 0; t-free rational function of p."""
        num = self.numerator.t_coefficient(0)
        return BivariateRational(num, tuple(f for f in self.denominator if f[1] == 0)).normalize()

    def cross_equal(self, other: BivariateRational) -> bool:
        lhs = self.numerator * expand_factors(other.denominator)
        rhs = other.numerator * expand_factors(self.denominator)
        return lhs == rhs

    def __eq__(self, other):
        if isinstance(other, (BivarPoly, int, Fraction)):
            other = BivariateRational.from_poly(other)
        if not isinstance(other, BivariateRational):
            return NotImplemented
        return self.cross_equal(other)

    __hash__ = None  # equality is semantic

    def is_polynomial(self) -> bool:
        return not self.denominator

    def __str__(self):
        return render_rational(self)

    def __repr__(self):
        return f"BivariateRational({render_rational(self)})"


def sum_rationals(items: Sequence[BivariateRational]) -> BivariateRational:
    """Exact sum over the least common multiple of the factored denominators."""
    items = [r for r in items if not r.numerator.is_zero()]
    if not items:
        return BivariateRational(BivarPoly())
    lcm: dict[tuple[int, int], int] = {}
    for r in items:
        for a, b, e in r.denominator:
            lcm[(a, b)] = max(lcm.get((a, b), 0), e)
    total = BivarPoly()
    for r in items:
        have = {(a, b): e for a, b, e in r.denominator}
        missing = [(a, b, e - have.get((a, b), 0)) for (a, b), e in lcm.items()]
        total = total + r.numerator * expand_factors(f for f in missing if f[2])
    return BivariateRational(total, tuple((a, b, e) for (a, b), e in lcm.items()))


def rational_normalize(r: BivariateRational) -> BivariateRational:
    """Cancel every denominator binomial that divides the numerator exactly."""
    num = r.numerator
    if num.is_zero():
        return BivariateRational(BivarPoly())
    den = []
    for a, b, e in r.denominator:
        left = e
        while left:
            q = num.divide_one_minus(a, b)
            if q is None:
                break
            num = q
            left -= 1
        if left:
            den.append((a, b, left))
    return BivariateRational(num, tuple(den))


# ---------------------------------------------------------------------------
# truncated power series in t with Laurent-polynomial-in-p coefficients


class TSeries:
    """Power series sum_{n <= order} c_n(p) t^n, truncated at ``order``."""

    __slots__ = ("order", "coeffs")

    def __init__(self, coeffs: Sequence[BivarPoly], order: int | None = None):
        coeffs = [c if isinstance(c, BivarPoly) else BivarPoly.constant(c) for c in coeffs]
        if order is None:
            order = len(coeffs) - 1
        if order < 0:
            raise ValueError("truncation order must be nonnegative")
        for c in coeffs:
            if not c.is_t_free():
                raise ValueError("series coefficients must be free of t")
        coeffs = list(coeffs[: order + 1])
        coeffs += [BivarPoly()] * (order + 1 - len(coeffs))
        self.order = order
        self.coeffs = coeffs

    def __len__(self):
        return self.order + 1

    def __getitem__(self, n):
        return self.coeffs[n]

    def __iter__(self) -> Iterator[BivarPoly]:
        return iter(self.coeffs)

    def __eq__(self, other):
        if not isinstance(other, TSeries):
            return NotImplemented
        return self.order == other.order and self.coeffs == other.coeffs

    def __repr__(self):
        return "TSeries([" + ", ".join(render_poly(c) for c in self.coeffs) + "])"

    @classmethod
    def one(cls, order: int) -> TSeries:
        return cls([ONE], order)

    def prefix(self, order: int) -> TSeries:
        return TSeries(self.coeffs[: order + 1], order)

    def __mul__(self, other: TSeries) -> TSeries:
        n = min(self.order, other.order)
        out = [BivarPoly() for _ in range(n + 1)]
        for i, a in enumerate(self.coeffs[: n + 1]):
            if a.is_zero():
                continue
            for j, b in enumerate(other.coeffs[: n + 1 - i]):
                if not b.is_zero():
                    out[i + j] = out[i + j] + a * b
        return TSeries(out, n)

    def mul_one_minus(self, a: int, b: int) -> TSeries:
        """Multiply by 1 - p^a t^b."""
        out = list(self.coeffs)
        for n in range(self.order, b - 1, -1):
            out[n] = out[n] - self.coeffs[n - b].mul_monomial(a, 0)
        return TSeries(out, self.order)

    def div_one_minus(self, a: int, b: int) -> TSeries:
        """Divide by 1 - p^a t^b (geometric expansion); requires b > 0."""
        if b <= 0:
            raise ValueError("cannot expand 1/(1 - p^a) as a power series in t")
        out = list(self.coeffs)
        for n in range(b, self.order + 1):
            out[n] = out[n] + out[n - b].mul_monomial(a, 0)
        return TSeries(out, self.order)

    def evaluate(self, p: int) -> list:
        out = []
        for c in self.coeffs:
            v = c.evaluate(p).get(0, 0)
            out.append(v)
        return out


def series_expand(r: BivariateRational, order: int) -> TSeries:
    if order < 0:
        raise ValueError("order must be nonnegative")
    for a, b, _ in r.denominator:
        if b == 0:
            raise ValueError(f"constant denominator factor (1 - p^{a}) has no t-expansion; "
                             "normalize or divide it out first")
    num = r.numerator.truncate(order)
    s = TSeries([num.t_coefficient(n) for n in range(order + 1)], order)
    for a, b, e in r.denominator:
        for _ in range(e):
            s = s.div_one_minus(a, b)
    return s


def series_log(w: TSeries) -> TSeries:
    if w.coeffs[0] != ONE:
        raise ValueError("series_log needs constant coefficient 1")
    n_max = w.order
    log = [BivarPoly() for _ in range(n_max + 1)]
    for n in range(1, n_max + 1):
        acc = w.coeffs[n] * n
        for k in range(1, n):
            if not log[k].is_zero() and not w.coeffs[n - k].is_zero():
                acc = acc - (log[k] * w.coeffs[n - k]) * k
        log[n] = acc * Fraction(1, n)
    return TSeries(log, n_max)


def series_exp(l: TSeries) -> TSeries:
    if not l.coeffs[0].is_zero():
        raise ValueError("series_exp needs zero constant coefficient")
    n_max = l.order
    out = [ONE] + [BivarPoly() for _ in range(n_max)]
    for n in range(1, n_max + 1):
        acc = BivarPoly()
        for k in range(1, n + 1):
            if not l.coeffs[k].is_zero() and not out[n - k].is_zero():
                acc = acc + (l.coeffs[k] * out[n - k]) * k
        out[n] = acc * Fraction(1, n)
    return TSeries(out, n_max)


# ---------------------------------------------------------------------------
# univariate specialisation at a fixed prime


@dataclass(frozen=True)
class UniRational:
    """Rational function of t with rational coefficients.

    ``numerator[n]`` is the coefficient of t^n; each denominator entry
    ``(c, b, e)`` stands for (1 - c t^b)^e with b > 0.
    """

    numerator: tuple
    denominator: tuple = ()

    def series(self, order: int) -> list:
        out = [Fraction(0)] * (order + 1)
        for n, c in enumerate(self.numerator[: order + 1]):
            out[n] = Fraction(c)
        for c, b, e in self.denominator:
            for _ in range(e):
                for n in range(b, order + 1):
                    out[n] += c * out[n - b]
        return [_clean(v) for v in out]

    def __mul__(self, other: UniRational) -> UniRational:
        num = [Fraction(0)] * (len(self.numerator) + len(other.numerator) - 1)
        for i, a in enumerate(self.numerator):
            for j, b in enumerate(other.numerator):
                num[i + j] += Fraction(a) * b
        return UniRational(tuple(_clean(v) for v in num), self.denominator + other.denominator)

    def __str__(self):
        terms = []
        for n, c in enumerate(self.numerator):
            if c:
                terms.append(_render_term(c, {"t": n}))
        num = _join_terms(terms)
        if not self.denominator:
            return num
        den = "*".join(
            "(1 - " + _render_term(c, {"t": b}) + ")" + (f"^{e}" if e > 1 else "")
            for c, b, e in self.denominator)
        return f"({num}) / ({den})"


def specialize(r: BivariateRational, p: int) -> UniRational:
    """Substitute a numeric prime for p."""
    scale = Fraction(1)
    den = []
    for a, b, e in r.denominator:
        c = Fraction(_pow(p, a))
        if b == 0:
            scale /= (1 - c) ** e
        else:
            den.append((_clean(c), b, e))
    coeffs = r.numerator.evaluate(p)
    top = max(coeffs, default=0)
    num = tuple(_clean(Fraction(coeffs.get(n, 0)) * scale) for n in range(top + 1))
    den.sort(key=lambda f: (f[1], f[0]))
    return UniRational(num or (0,), tuple(den))


# ---------------------------------------------------------------------------
# canonical text rendering


def _render_term(c, powers: Mapping[str, int]) -> str:
    c = _clean(c)
    factors = []
    for var, e in powers.items():
        if e == 0:
            continue
        factors.append(var if e == 1 else f"{var}^{e}")
    if not factors:
        return str(c)
    if c == 1:
        return "*".join(factors)
    if c == -1:
        return "-" + "*".join(factors)
    return f"{c}*" + "*".join(factors)


def _join_terms(terms: list[str]) -> str:
    if not terms:
        return "0"
    out = terms[0]
    for t in terms[1:]:
        out += " - " + t[1:] if t.startswith("-") else " + " + t
    return out


def render_poly(poly: BivarPoly) -> str:
    return _join_terms([_render_term(c, {"p": a, "t": b}) for (a, b), c in poly.sorted_terms()])


def render_factor(a: int, b: int, e: int = 1) -> str:
    body = "(1 - " + _render_term(1, {"p": a, "t": b}) + ")"
    return body + (f"^{e}" if e != 1 else "")


def render_rational(r: BivariateRational) -> str:
    num = render_poly(r.numerator)
    if not r.denominator:
        return num
    den = "*".join(render_factor(a, b, e) for a, b, e in r.denominator)
    return f"({num}) / ({den})"
