import math
from fractions import Fraction

import mpmath
import pytest

from wpspine import series
from wpspine.acceptance import xhat1_closed
from wpspine.series import (
    EXACT,
    REAL,
    AtomicWeight,
    SeriesError,
    TruncatedSeries,
    Z_series,
    bessel_coefficient,
    parse_number,
    polarize,
    solve_string,
    times,
    xhat,
)
from wpspine.trees import CuspMask
from wpspine.wp_poly import WPPolynomial, wp_volume


def pi_power(q, k):
    return WPPolynomial(0, {(k,): Fraction(q)})


def test_cusp_weight_solution():
    R = solve_string(AtomicWeight.parse("1:0"), 4)
    assert list(R) == [pi_power(0, 0), pi_power(1, 0), pi_power(1, 1), pi_power(Fraction(5, 3), 2), pi_power(Fraction(61, 18), 3)]


@pytest.mark.parametrize("k", [1, 2, 3, 4, 5])
def test_cusp_weight_solution_counts_trees(k):
    R = solve_string(AtomicWeight.parse("1:0"), k)
    V = wp_volume(k + 1, CuspMask((True,) * (k + 1)))
    assert R[k] * math.factorial(k) == V.evaluate([0] * (k + 1), "symbolic")


@pytest.mark.parametrize("n", [1, 2, 3])
def test_multilinear_solution_is_the_volume(n):
    for L in ([Fraction(j + 1, 2) for j in range(n)], [Fraction(3)] * n):
        got = polarize(lambda mu: solve_string(mu, n), L)
        assert got == wp_volume(n + 1).evaluate([0, *L], "symbolic")


def test_residual_vanishes():
    mu = AtomicWeight.parse("1/2:3, 2:1/3")
    assert all(EXACT.is_zero(c) for c in Z_series(solve_string(mu, 8), mu))
    with mpmath.workdps(series.REAL_DPS):
        mu = AtomicWeight(((mpmath.mpf("0.5"), mpmath.mpf(3)), (mpmath.mpf(2), mpmath.sqrt(2))))
        assert mu.ring() is REAL
        z = Z_series(solve_string(mu, 8), mu)
        assert max(abs(c) for c in z) < mpmath.mpf(10) ** -45


def test_residual_needs_zero_constant_term():
    mu = AtomicWeight.parse("1:0")
    with pytest.raises(SeriesError):
        Z_series(TruncatedSeries([1, 1]), mu)
    with pytest.raises(SeriesError):
        solve_string(mu, 0)


def test_bessel_coefficients_against_taylor():
    with mpmath.workdps(30):
        f = lambda r: mpmath.sqrt(r) / (mpmath.sqrt(2) * mpmath.pi) * mpmath.besselj(1, 2 * mpmath.pi * mpmath.sqrt(2 * r))
        coeffs = mpmath.taylor(f, 0, 5, method="quad", radius=0.5)
        for d in range(1, 6):
            q = bessel_coefficient(d)
            want = mpmath.mpf(q.numerator) / q.denominator * mpmath.pi ** (2 * d - 2)
            assert abs(coeffs[d] - want) < 1e-20 * abs(want)


def test_times():
    mu = AtomicWeight.parse("2:3")
    assert times(mu, 0) == 4
    assert times(mu, 2) == Fraction(81, 8)


def test_weight_parsing():
    mu = AtomicWeight.parse("1/3:2, 0.5:1")
    # decimal literals are exact too
    assert mu.atoms == ((Fraction(1, 3), Fraction(2)), (Fraction(1, 2), Fraction(1)))
    assert mu.is_rational
    assert not AtomicWeight(((mpmath.mpf(1), 0),)).is_rational
    assert AtomicWeight.parse("4").atoms == ((Fraction(4), Fraction(0)),)
    assert parse_number("2/6") == Fraction(1, 3)
    assert parse_number("1e-3") == Fraction(1, 1000)
    with pytest.raises(ValueError):
        AtomicWeight.parse("-1:2")
    assert mu.scaled(2).total_mass() == 2 * mu.total_mass()


def test_series_algebra():
    with mpmath.workdps(30):
        x = TruncatedSeries.variable(6)
        y = x + x * x
        inv = y.reversion()
        # the compositional inverse of x + x^2 has signed Catalan coefficients
        assert [int(c) for c in inv] == [0, 1, -1, 2, -5, 14, -42]
        assert all(abs(a - b) < 1e-25 for a, b in zip(y.compose(inv), x))
        one = (1 - x) * (1 - x).reciprocal()
        assert [int(c) for c in one] == [1, 0, 0, 0, 0, 0, 0]
        assert [int(c) for c in (x**3).derivative()] == [0, 0, 3, 0, 0, 0]
        assert (1 + x).evaluate(mpmath.mpf("0.5")) == 1.5


@pytest.mark.parametrize("u", [0.15, 0.35])
@pytest.mark.parametrize("L", [0, 2])
def test_first_order_against_closed_form(u, L):
    with mpmath.workdps(series.REAL_DPS):
        X = xhat(mpmath.mpf(u), AtomicWeight(((mpmath.mpf(1), mpmath.mpf(L)),)), 1, REAL)
        assert abs(X[0] - 1) < 1e-40
        assert abs(X[1] / xhat1_closed(u, L) - 1) < 1e-30


def test_u_dependence_needs_real_ring():
    with pytest.raises(SeriesError):
        xhat(Fraction(1, 10), AtomicWeight.parse("1:0"), 2, EXACT)


def test_exact_u_zero_is_the_volume():
    L = [Fraction(1), Fraction(2)]
    got = polarize(lambda mu: xhat(0, mu, 2), L)
    assert got == wp_volume(4).evaluate([0, 0, *L], "symbolic")
