import mpmath
import pytest
from scipy.special import jn_zeros

from wpspine.bessel import BesselRangeError, bessel, j0_first_zero


@pytest.mark.parametrize("x", ["0", "0.3", "2.5", "7", "19.5", "-4"])
@pytest.mark.parametrize("p", [0, 1, 3])
def test_series_against_mpmath(x, p):
    with mpmath.workdps(30):
        x = mpmath.mpf(x)
        assert abs(bessel("J", p, x) - mpmath.besselj(p, x)) < mpmath.mpf(10) ** -27
        assert abs(bessel("I", p, x) - mpmath.besseli(p, x)) < mpmath.mpf(10) ** -27 * mpmath.besseli(p, abs(x) + 1)


def test_kind_aliases():
    assert bessel("J0", 5, 1.5) == bessel("J", 0, 1.5)
    assert bessel("J1", 0, 1.5) == bessel("J", 1, 1.5)
    assert bessel("I0", 2, 1.5) == bessel("I", 0, 1.5)


def test_tail_tolerance_is_honoured():
    rough = bessel("J", 0, 3, tol=1e-4)
    assert abs(rough - mpmath.besselj(0, 3)) < 1e-4


def test_rejects_bad_input():
    with pytest.raises(BesselRangeError):
        bessel("J", 0, 60)
    with pytest.raises(ValueError):
        bessel("K", 0, 1)
    with pytest.raises(ValueError):
        bessel("J", -1, 1)
    with pytest.raises(ValueError):
        bessel("J", 1.5, 1)


def test_first_zero():
    z = j0_first_zero(40)
    assert abs(float(z) - jn_zeros(0, 1)[0]) < 1e-14
    with mpmath.workdps(40):
        assert abs(z - mpmath.besseljzero(0, 1)) < mpmath.mpf(10) ** -35
