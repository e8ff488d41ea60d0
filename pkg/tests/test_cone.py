import itertools
import math
import random
from fractions import Fraction

import pytest
import sympy
from conftest import builtin_cones, random_cones

from conezeta import rings
from conezeta.conditions import ConeIntegralData, ring_cone_data
from conezeta.cone import (
    MAX_T,
    ComponentCounts,
    ConeError,
    MissingCountError,
    box_genfun_failures,
    box_points,
    build_cone,
    closed_face_genfun,
    cone_from_inequalities,
    constant_term_from_strata,
    counts_identity,
    disjoint_cover_failures,
    local_factor,
    parallelepiped,
    pieces,
    primitive,
    stratum_genfun,
    triangulate,
    zeta_factor,
)
from conezeta.exact import BivarPoly, BivariateRational, series_expand
from conezeta.oracle import count_lattices

RANDOM = random_cones()
BUILTIN = builtin_cones()


def naive_rays(cs):
    """Extreme rays by solving every (t-1)-subset of tight constraints."""
    t = cs.t
    cons = [list(c) for c in cs.constraints]
    found = set()
    for sub in itertools.combinations(cons, t - 1):
        null = sympy.Matrix(sub).nullspace() if sub else [sympy.Matrix([1])]
        if len(null) != 1:
            continue
        v = null[0]
        den = math.lcm(*[int(x.q) for x in v])
        v = [int(x * den) for x in v]
        for sign in (1, -1):
            w = [sign * x for x in v]
            if any(w) and all(sum(a * b for a, b in zip(c, w)) >= 0 for c in cons):
                found.add(primitive(w))
    return found


def heis():
    return ring_cone_data(rings.heisenberg(), "subring")


# -- rays -------------------------------------------------------------------------------


def test_orthant_rays():
    cs = cone_from_inequalities(2, [])
    assert set(cs.rays) == {(1, 0), (0, 1)}


def test_heisenberg_rays():
    cs = build_cone(heis())
    assert cs.inequalities == ((1, 0, 0, 1, 0, -1),)
    e = [tuple(int(i == j) for j in range(6)) for i in range(6)]
    want = {e[0], e[1], e[2], e[3], e[4],
            tuple(a + b for a, b in zip(e[0], e[5])), tuple(a + b for a, b in zip(e[3], e[5]))}
    assert set(cs.rays) == want


def test_vacuous_condition_gives_orthant():
    data = ConeIntegralData(1, (1,), (0,), [((1,), (1,))])
    cs = build_cone(data)
    assert cs.inequalities == () and cs.rays == ((1,),)


def test_too_many_variables():
    data = ConeIntegralData(MAX_T + 1, (1,) * (MAX_T + 1), (0,) * (MAX_T + 1), [])
    with pytest.raises(ConeError):
        build_cone(data)


def test_only_origin():
    cs = cone_from_inequalities(2, [(-1, 0), (0, -1)])
    assert cs.rays == ()
    assert triangulate(cs) == [()]
    z = stratum_genfun(cs, ())
    assert z.numerator == BivarPoly.constant(1)


@pytest.mark.parametrize("cs", RANDOM + [c for _, _, c in BUILTIN if c.t <= 6])
def test_rays_match_naive_enumeration(cs):
    assert set(cs.rays) == naive_rays(cs)


def test_rays_primitive_and_inside():
    for cs in RANDOM:
        for r in cs.rays:
            assert cs.contains(r)
            assert primitive(r) == tuple(r)
        assert len(set(cs.rays)) == len(cs.rays)


# -- pieces -----------------------------------------------------------------------------


def test_parallelepiped_unimodular():
    assert parallelepiped([(1, 0), (0, 1)]) == [(Fraction(0), Fraction(0))]


def test_parallelepiped_index_two():
    pts = parallelepiped([(1, 1), (1, -1)])
    assert sorted(pts) == [(0, 0), (Fraction(1, 2), Fraction(1, 2))]


def test_simplex_dimensions():
    cs = build_cone(heis())
    simplices = triangulate(cs)
    assert all(len(s) == 6 for s in simplices)
    assert len(simplices) == 2


@pytest.mark.parametrize("name,data,cs", BUILTIN, ids=[b[0] for b in BUILTIN])
def test_builtin_box_checks(name, data, cs):
    plist = pieces(cs)
    assert disjoint_cover_failures(cs, 5, plist) == []
    assert box_genfun_failures(cs, 5, plist) == []


@pytest.mark.parametrize("n", range(len(RANDOM)))
def test_random_box_checks(n):
    cs = RANDOM[n]
    plist = pieces(cs)
    assert disjoint_cover_failures(cs, 5, plist) == []
    assert box_genfun_failures(cs, 5, plist) == []


def test_box_checks_catch_broken_covers():
    cs = build_cone(heis())
    plist = pieces(cs)
    doubled = disjoint_cover_failures(cs, 2, plist + plist)
    assert doubled and all(len(hits) == 2 for _, hits in doubled)
    # drop a one-ray piece so the gap is visible inside the box
    gone = next(n for n, pc in enumerate(plist) if pc.dim == 1)
    missing = plist[:gone] + plist[gone + 1:]
    assert any(hits == [] for _, hits in disjoint_cover_failures(cs, 2, missing))
    assert plist[gone].support in box_genfun_failures(cs, 2, missing)


def test_box_points_bounded():
    cs = build_cone(heis())
    full = [x for x in box_points(cs, 3) if sum(x) <= 3]
    assert sorted(box_points(cs, 3, max_sum=3)) == sorted(full)


def orders(cs, count=3, seed=7):
    rng = random.Random(seed)
    base = list(range(len(cs.rays)))
    out = [base, base[::-1]]
    for _ in range(count):
        o = base[:]
        rng.shuffle(o)
        out.append(o)
    return out


@pytest.mark.parametrize("n", range(len(RANDOM)))
def test_random_order_independence(n):
    cs = RANDOM[n]
    data = ConeIntegralData(cs.t, cs.f0, cs.g0, [], trivial=True)
    values = [local_factor(data, cs=cs, order=o) for o in orders(cs)]
    assert all(v == values[0] for v in values)


def test_heisenberg_order_independence():
    data = heis()
    cs = build_cone(data)
    first = local_factor(data, cs=cs)
    for o in orders(cs):
        assert local_factor(data, cs=cs, order=o) == first
        # each stratum on its own as well
        plist = pieces(cs, o)
        assert stratum_genfun(cs, {3, 5}, piece_list=plist) == stratum_genfun(cs, {3, 5})


@pytest.mark.parametrize("n", range(0, len(RANDOM), 3))
def test_inclusion_exclusion_matches_pieces(n):
    cs = RANDOM[n]
    plist = pieces(cs)
    for r in range(cs.t + 1):
        for I in itertools.combinations(range(cs.t), r):
            a = stratum_genfun(cs, I, piece_list=plist)
            b = stratum_genfun(cs, I, method="pieces", piece_list=plist)
            assert a == b


# -- generating functions ---------------------------------------------------------------


def test_single_variable_stratum():
    cs = cone_from_inequalities(1, [], f0=(1,), g0=(0,))
    g = stratum_genfun(cs, {0})
    want = BivariateRational(BivarPoly.monomial(-1, 1), ((-1, 1, 1),))
    assert g == want
    assert stratum_genfun(cs, ()) == BivariateRational.from_poly(1)


def test_heisenberg_face_box():
    cs = build_cone(heis())
    I = {3, 5}  # x4 and x6
    got = series_expand(stratum_genfun(cs, I), 6)
    want = [BivarPoly() for _ in range(7)]
    for x in itertools.product(range(7), repeat=6):
        if {j for j, v in enumerate(x) if v} != I or not cs.contains(x):
            continue
        a, b = cs.weight(x)
        if a <= 6:
            want[a] = want[a] + BivarPoly.monomial(-b, 0)
    assert list(got) == want


def test_closed_face_sums_strata():
    cs = build_cone(heis())
    J = {0, 3, 5}
    parts = [stratum_genfun(cs, I) for r in range(4) for I in itertools.combinations(sorted(J), r)]
    total = parts[0]
    for q in parts[1:]:
        total = total + q
    assert total == closed_face_genfun(cs, J)


# -- local factors ----------------------------------------------------------------------


@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_zd_local_factor(d):
    z = zeta_factor(ring_cone_data(rings.zd(d), "subring"))
    assert z == BivariateRational.zeta_product([(i, 1, 1) for i in range(d)])


def test_heisenberg_local_factor():
    z = zeta_factor(heis())
    want = BivariateRational(BivarPoly.one_minus(3, 3), ((0, 1, 1), (1, 1, 1), (2, 2, 1), (3, 2, 1)))
    assert z == want


def test_heisenberg_ideal_local_factor():
    z = zeta_factor(ring_cone_data(rings.heisenberg(), "ideal"))
    assert z == BivariateRational.zeta_product([(0, 1, 1), (1, 1, 1), (2, 3, 1)])


def test_single_variable_integral():
    data = ConeIntegralData(1, (1,), (0,), [])
    z = local_factor(data)
    want = BivariateRational(BivarPoly({(0, 0): 1, (-1, 0): -1}), ((-1, 1, 1),))
    assert z == want


@pytest.mark.parametrize("name,kind", [("zd(3)", "subring"), ("heisenberg", "subring"),
                                       ("heisenberg", "ideal")])
@pytest.mark.parametrize("p", [2, 3])
def test_series_matches_oracle(name, kind, p):
    sc = rings.builtin(name)
    ser = series_expand(zeta_factor(ring_cone_data(sc, kind)), 3)
    assert ser.evaluate(p) == [count_lattices(sc, p, n, kind) for n in range(4)]


@pytest.mark.parametrize("name,data,cs", BUILTIN, ids=[b[0] for b in BUILTIN])
def test_constant_term(name, data, cs):
    z = local_factor(data, cs=cs)
    want = BivariateRational.from_poly(BivarPoly({(0, 0): 1, (-1, 0): -1}) ** data.d)
    assert z.constant_term() == want
    assert constant_term_from_strata(data, cs=cs) == want


@pytest.mark.parametrize("name,data,cs", BUILTIN, ids=[b[0] for b in BUILTIN])
def test_component_count_identity(name, data, cs):
    lhs, rhs = counts_identity(data)
    assert lhs == rhs


def test_resolution_data_matches_monomial():
    # the same integral with c_(p,I) written out explicitly and one extra ambient variable
    mono = ConeIntegralData(2, (1, 1), (0, 1), [((1, 0), (0, 1))])
    p = sympy.Symbol("p")
    cpoly = {mask: (p - 1) ** (2 - bin(mask).count("1")) for mask in range(4)}
    res = ConeIntegralData(2, (1, 1), (0, 1), [((1, 0), (0, 1))], cpoly=cpoly)
    assert local_factor(res) == local_factor(mono)
    # an extra variable that never enters contributes a factor p^-1 * p = 1 after counting
    cpoly3 = {mask: c * p for mask, c in cpoly.items()}
    res3 = ConeIntegralData(2, (1, 1), (0, 1), [((1, 0), (0, 1))], cpoly=cpoly3, ambient=3)
    assert local_factor(res3) == local_factor(mono)


def test_missing_component_count():
    p = sympy.Symbol("p")
    data = ConeIntegralData(1, (1,), (0,), [], cpoly={0: p - 1})
    with pytest.raises(MissingCountError):
        local_factor(data)


def test_component_counts_from_polynomials():
    p = sympy.Symbol("p")
    cc = ComponentCounts.from_cpoly(2, {0: p**2 - 2 * p + 1, 3: sympy.Integer(1)})
    assert cc.get(()) == BivarPoly({(2, 0): 1, (1, 0): -2, (0, 0): 1})
    assert cc.get((0, 1)) == BivarPoly.constant(1)
    assert cc.get((0,)) is None
