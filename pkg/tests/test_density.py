import math

import mpmath
import numpy as np
import pytest
from scipy import integrate

from wpspine.density import X1Distribution, tail_cut, x1_density, x1_laplace, x1_total_mass
from wpspine.wp_poly import wp_volume


def test_density_formula():
    x, L = 0.7, 1.3
    want = 2 * math.log((math.cosh(x) + math.cosh(L / 2)) / (math.cosh(x) - 1))
    assert x1_density(x, L) == pytest.approx(want, rel=1e-14)
    assert x1_density(0.0, L) == math.inf
    arr = x1_density(np.array([0.5, 1.0]), L)
    assert arr.shape == (2,)
    assert float(x1_density(mpmath.mpf("0.7"), L)) == pytest.approx(want, rel=1e-14)


@pytest.mark.parametrize("L", [0, 1, 3])
def test_mass_is_the_four_point_volume(L):
    assert abs(x1_total_mass(L) / wp_volume(3).evaluate([0, 0, L]) - 1) < 1e-20


def test_laplace_against_scipy():
    u, L = 0.2, 1.0
    f = lambda x: 2 * math.cosh(2 * u * x) * x1_density(x, L)
    want = sum(integrate.quad(f, a, b, limit=200)[0] for a, b in [(0, 1), (1, 10), (10, 60)])
    assert float(x1_laplace(u, L)) == pytest.approx(want, rel=1e-9)


def test_tail_cut_bounds_the_tail():
    for L, u in [(0, 0), (3, 0.3)]:
        cut = tail_cut(L, 1e-10, u)
        tail = integrate.quad(lambda x: math.exp(2 * u * x) * x1_density(x, L), cut, cut + 80)[0]
        assert tail < 1e-10


def test_distribution_cdf():
    dist = X1Distribution(1.0)
    assert dist.cdf(0.0) == 0.5
    assert dist.cdf(-50.0) == pytest.approx(0.0, abs=1e-12)
    assert dist.cdf(50.0) == pytest.approx(1.0, abs=1e-12)
    xs = np.linspace(-5, 5, 11)
    assert np.allclose(dist.cdf(xs) + dist.cdf(-xs), 1.0)
    assert dist.mass == pytest.approx(float(x1_total_mass(1.0)), rel=1e-10)
