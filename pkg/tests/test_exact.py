from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conezeta.exact import (
    ONE,
    P,
    T,
    BivarPoly,
    BivariateRational,
    TSeries,
    UniRational,
    rational_normalize,
    render_rational,
    series_exp,
    series_expand,
    series_log,
    specialize,
    sum_rationals,
)


def pc(coeffs):
    """Laurent polynomial in p from {exponent: coefficient}."""
    return BivarPoly.from_p_coeffs(coeffs)


polys = st.dictionaries(
    st.tuples(st.integers(-2, 2), st.integers(0, 3)),
    st.integers(-3, 3),
    max_size=4,
).map(BivarPoly)

factors = st.lists(
    st.tuples(st.integers(-2, 3), st.integers(1, 3), st.integers(1, 2)), max_size=3)


def rationals():
    return st.builds(BivariateRational, polys, factors.map(tuple))


# -- BivarPoly ----------------------------------------------------------------


def test_zero_terms_are_dropped():
    q = BivarPoly({(1, 0): 2, (0, 1): 0})
    assert q.terms == {(1, 0): 2}
    assert (q - q).is_zero()


def test_negative_t_exponent_rejected():
    with pytest.raises(ValueError):
        BivarPoly({(0, -1): 1})


@given(polys, polys, polys)
def test_ring_axioms(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a + b == b + a
    assert a * b == b * a


@given(polys, st.integers(-2, 3), st.integers(1, 3))
def test_divide_one_minus_roundtrip(a, x, y):
    prod = a.mul_one_minus(x, y)
    assert prod.divide_one_minus(x, y) == a


def test_evaluate_laurent():
    q = P * P + BivarPoly.monomial(-1, 0, 3)
    assert q.evaluate(2) == {0: Fraction(4) + Fraction(3, 2)}


# -- normalization --------------------------------------------------------------


def test_normalize_cancels_identical_factor():
    r = BivariateRational(BivarPoly.one_minus(1, 1), ((1, 1, 1),))
    n = rational_normalize(r)
    assert n.numerator == ONE
    assert n.denominator == ()


def test_normalize_partial_cancellation():
    r = BivariateRational(BivarPoly.one_minus(2, 2), ((1, 1, 1),))
    n = rational_normalize(r)
    assert n.denominator == ()
    assert n.numerator == ONE + BivarPoly.monomial(1, 1)


def test_zeta_z2_factor_already_canonical():
    r = BivariateRational(ONE, ((0, 1, 1), (1, 1, 1)))
    n = rational_normalize(r)
    assert n.numerator == ONE
    assert n.denominator == ((0, 1, 1), (1, 1, 1))


def test_denominator_sorted_by_b_then_a():
    r = BivariateRational(ONE, ((3, 2, 1), (1, 1, 1), (0, 2, 1)))
    assert r.denominator == ((1, 1, 1), (0, 2, 1), (3, 2, 1))


def test_vanishing_factor_rejected():
    with pytest.raises(ValueError):
        BivariateRational(ONE, ((0, 0, 1),))


@settings(max_examples=60, deadline=None)
@given(rationals())
def test_normalize_idempotent_and_series_preserving(r):
    n = rational_normalize(r)
    assert rational_normalize(n) == n
    assert series_expand(n, 5) == series_expand(r, 5)


@settings(max_examples=40, deadline=None)
@given(rationals(), rationals())
def test_sum_matches_series(r1, r2):
    s = sum_rationals([r1, r2])
    a, b = series_expand(r1, 4), series_expand(r2, 4)
    assert list(series_expand(s, 4)) == [x + y for x, y in zip(a, b)]


def test_cross_equal_detects_equal_functions():
    r1 = BivariateRational(ONE + BivarPoly.monomial(1, 1), ())
    r2 = BivariateRational(BivarPoly.one_minus(2, 2), ((1, 1, 1),))
    assert r1.cross_equal(r2)
    assert r1 == r2


# -- series ---------------------------------------------------------------------


def test_geometric_series():
    s = series_expand(BivariateRational(ONE, ((1, 1, 1),)), 2)
    assert list(s) == [ONE, P, P * P]


def test_z2_series_matches_sigma():
    s = series_expand(BivariateRational(ONE, ((0, 1, 1), (1, 1, 1))), 2)
    assert list(s) == [ONE, ONE + P, ONE + P + P * P]
    # sigma(p^n) at p = 3
    assert s.evaluate(3) == [1, 4, 13]


def test_no_low_order_terms():
    s = series_expand(BivariateRational(ONE, ((3, 3, 1),)), 2)
    assert list(s) == [ONE, BivarPoly(), BivarPoly()]


def test_series_length_and_truncation():
    s = series_expand(BivariateRational(ONE, ((0, 1, 1),)), 4)
    assert len(s) == 5
    assert s.order == 4


@settings(max_examples=50, deadline=None)
@given(rationals(), st.integers(0, 3), st.integers(0, 4))
def test_series_prefix_property(r, n, extra):
    m = n + extra
    assert series_expand(r, n) == series_expand(r, m).prefix(n)


def test_log_mercator():
    w = TSeries([ONE, ONE], 3)
    assert list(series_log(w)) == [BivarPoly(), ONE, pc({0: Fraction(-1, 2)}), pc({0: Fraction(1, 3)})]


def test_log_of_geometric():
    w = series_expand(BivariateRational(ONE, ((1, 1, 1),)), 2)
    assert list(series_log(w)) == [BivarPoly(), P, pc({2: Fraction(1, 2)})]


def test_log_boundary_example():
    # 1 + p^-1 t + p^-1 t^2
    w = TSeries([ONE, pc({-1: 1}), pc({-1: 1})], 2)
    got = series_log(w)
    assert got[1] == pc({-1: 1})
    assert got[2] == pc({-1: 1, -2: Fraction(-1, 2)})


def test_log_needs_unit():
    with pytest.raises(ValueError):
        series_log(TSeries([pc({0: 2}), ONE], 2))


@settings(max_examples=40, deadline=None)
@given(st.lists(polys.map(lambda q: q.truncate(0)), min_size=1, max_size=4))
def test_exp_log_roundtrip(tail):
    w = TSeries([ONE] + tail)
    assert series_exp(series_log(w)) == w


# -- specialization and rendering --------------------------------------------------


def test_specialize_z2():
    u = specialize(BivariateRational(ONE, ((0, 1, 1), (1, 1, 1))), 2)
    assert u.numerator == (1,)
    assert u.denominator == ((1, 1, 1), (2, 1, 1))


def test_specialize_heisenberg():
    z = BivariateRational.zeta_product([(0, 1, 1), (1, 1, 1), (2, 2, 1), (3, 2, 1), (3, 3, -1)])
    u = specialize(z, 2)
    want = UniRational((1, 0, 0, -8), ((1, 1, 1), (2, 1, 1), (4, 2, 1), (8, 2, 1)))
    assert u.series(8) == want.series(8)


def test_specialize_constant():
    assert specialize(BivariateRational.from_poly(1), 5).series(3) == [1, 0, 0, 0]


@settings(max_examples=30, deadline=None)
@given(rationals(), st.sampled_from([2, 3, 5]))
def test_specialize_commutes_with_series(r, p):
    assert specialize(r, p).series(4) == series_expand(r, 4).evaluate(p)


def test_render_is_deterministic():
    r = BivariateRational(ONE + BivarPoly.monomial(1, 1) + BivarPoly.monomial(2, 2),
                          ((2, 2, 1), (0, 1, 1), (3, 2, 1)))
    text = render_rational(r)
    assert text == "(1 + p*t + p^2*t^2) / ((1 - t)*(1 - p^2*t^2)*(1 - p^3*t^2))"
    assert render_rational(BivariateRational(r.numerator, tuple(reversed(r.denominator)))) == text


def test_t_is_the_generator():
    assert T.terms == {(0, 1): 1}
