import itertools
import json
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wpspine.trees import CuspMask, enumerate_anti, enumerate_delaunay, from_code
from wpspine.wp_poly import (
    WPPolynomial,
    anti_polytope_volume,
    anti_tree_weight,
    delaunay_polytope_volume,
    gamma_coefficient,
    times_coefficient,
    wp_volume,
)

P = WPPolynomial


def L2(n, i, k=1):
    return P.length2(n, i, k)


def sym(n, f):
    return sum((f(i) for i in range(1, n + 1)), P.zero(n))


def test_four_point_volume():
    want = 2 * P.pi2(3) + sym(3, lambda i: L2(3, i)) / 2
    assert wp_volume(3) == want
    assert wp_volume(3, route="ie") == want


def test_five_point_volume():
    n = 4
    pairs = sum((L2(n, i) * L2(n, j) for i, j in itertools.combinations(range(1, 5), 2)), P.zero(n))
    want = (
        10 * P.pi2(n, 2)
        + 3 * P.pi2(n) * sym(n, lambda i: L2(n, i))
        + sym(n, lambda i: L2(n, i, 2)) / 8
        + pairs / 2
    )
    assert wp_volume(4) == want


@pytest.mark.parametrize("n, numer, denom", [(3, 2, 1), (4, 10, 1), (5, 244, 3), (6, 2758, 3)])
def test_cusped_volumes_match_known_values(n, numer, denom):
    v = wp_volume(n, CuspMask((True,) * n))
    assert v == P(n, {(n - 2,) + (0,) * n: Fraction(numer, denom)})


def test_cusps_equal_setting_lengths_to_zero():
    for n in (3, 4, 5):
        full = wp_volume(n)
        for bits in itertools.product((False, True), repeat=n):
            zeros = [i + 1 for i, f in enumerate(bits) if f]
            assert wp_volume(n, CuspMask(bits)) == full.set_zero(zeros)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_routes_agree_and_are_homogeneous(n):
    for bits in itertools.product((False, True), repeat=n):
        a = wp_volume(n, bits, "anti")
        b = wp_volume(n, bits, "inclusion_exclusion")
        assert a == b
        assert a.is_homogeneous(n - 2)


def test_unknown_route():
    with pytest.raises(ValueError):
        wp_volume(3, route="bogus")


def test_per_tree_volumes_for_three_boundaries_with_two_cusps():
    lengths = [0, 0, 2.0]
    vals = sorted(float(delaunay_polytope_volume(t).evaluate(lengths)) for t in enumerate_delaunay(3, CuspMask.from_bits("110")))
    pi2 = float(mpmath.pi**2)
    assert vals == pytest.approx(sorted([pi2, pi2, 2.0]))


@pytest.mark.parametrize("n", [3, 4, 5])
def test_component_formula_matches_explicit_contraction(n):
    for t in enumerate_delaunay(n)[::7]:
        assert delaunay_polytope_volume(t) == delaunay_polytope_volume(t, via_contraction=True)


def test_anti_weight_of_the_star():
    t = from_code("b1(r(b2()b3()))")
    # one inner vertex of degree 3: 2/2! * gamma_2 = pi^2
    assert anti_tree_weight(t) == P.pi2(3)
    assert anti_polytope_volume(t) == P.pi2(3)


def test_weight_coefficients():
    assert gamma_coefficient(1) == -1
    assert gamma_coefficient(2) == 1
    assert gamma_coefficient(3) == Fraction(-1, 2)
    assert times_coefficient(1) == Fraction(1, 2)
    assert times_coefficient(2) == Fraction(1, 16)


def test_arithmetic():
    x = P.pi2(2) + L2(2, 1)
    y = P.pi2(2) - L2(2, 1)
    assert x * y == P.pi2(2, 2) - L2(2, 1, 2)
    assert x**2 == P.pi2(2, 2) + 2 * P.pi2(2) * L2(2, 1) + L2(2, 1, 2)
    assert (x - x) == 0 and not (x - x)
    assert x / 2 * 2 == x
    assert 1 + x == x + 1
    assert x.coefficient(1) == 1 and x.coefficient(0, [1]) == 1
    with pytest.raises(ValueError):
        x + P.pi2(3)


def test_evaluate():
    v = wp_volume(3)
    assert v.evaluate([1, 2, 3]) == pytest.approx(2 * mpmath.pi**2 + 7)
    sym_val = v.evaluate([Fraction(1), Fraction(2), Fraction(3)], "symbolic")
    assert sym_val == 2 * P.pi2(0) + 7
    assert v(1, 2, 3) == v.evaluate([1, 2, 3])
    with pytest.raises(ValueError):
        v.evaluate([1, 2])
    with pytest.raises(ValueError):
        v.evaluate([1, 2, 3], "other")


def test_json_round_trip_and_text():
    v = wp_volume(4)
    data = json.loads(json.dumps(v.to_json()))
    assert P.from_json(data) == v
    assert str(wp_volume(3)) == "2*pi^2 + 1/2*L1^2 + 1/2*L2^2 + 1/2*L3^2"


def test_sum_of_anti_weights_is_the_volume():
    total = sum((anti_tree_weight(t) for t in enumerate_anti(4)), P.zero(4))
    assert total == wp_volume(4)


small_polys = st.dictionaries(
    st.tuples(*[st.integers(0, 3)] * 3),
    st.fractions(min_value=-5, max_value=5, max_denominator=7),
    max_size=5,
).map(lambda terms: P(2, terms))


@given(small_polys, small_polys, small_polys)
@settings(max_examples=60, deadline=None)
def test_ring_laws(a, b, c):
    assert a * (b + c) == a * b + a * c
    assert (a * b) * c == a * (b * c)
    assert a - b == -(b - a)
    assert P.from_json(a.to_json()) == a
