"""Bessel functions from their ascending series, with a tail bound."""

from __future__ import annotations

import mpmath

MAX_ARGUMENT = 50


class BesselRangeError(ValueError):
    pass


def bessel(kind: str, p: int, x, tol=None):
    """Evaluate ``J_p(x)`` (kind ``"J"``, ``"J0"``, ``"J1"``, ``"Jp"``) or ``I_p(x)``.

    The series is summed at raised precision until the geometric bound on the
    remaining terms drops below ``tol`` (default: the working epsilon).
    """
    if kind in ("J0", "I0"):
        p = 0
    elif kind == "J1":
        p = 1
    if kind not in ("J", "J0", "J1", "Jp", "I", "I0"):
        raise ValueError(f"unknown Bessel kind {kind!r}")
    if p < 0 or int(p) != p:
        raise ValueError("order must be a non-negative integer")
    x = mpmath.mpf(x)
    if abs(x) > MAX_ARGUMENT:
        raise BesselRangeError(f"|x| = {float(abs(x)):.3g} exceeds {MAX_ARGUMENT}")
    sign = -1 if kind[0] == "J" else 1
    tol = mpmath.eps if tol is None else mpmath.mpf(tol)
    # terms peak near exp(|x|); carry enough guard digits to absorb cancellation
    extra = int(float(abs(x)) / 2.3) + 10
    with mpmath.extradps(extra):
        q = (x / 2) ** 2
        term = (x / 2) ** p / mpmath.factorial(p)
        total = term
        m = 0
        while True:
            ratio = q / ((m + 1) * (m + 1 + p))
            term = term * ratio * sign
            total += term
            m += 1
            nxt = q / ((m + 1) * (m + 1 + p))
            if nxt < 1 and abs(term) * nxt / (1 - nxt) < tol:
                break
    return +total


def j0_first_zero(dps: int = 40):
    """First positive zero of J_0, by bisection on [2, 3] then Newton."""
    with mpmath.workdps(dps):
        lo, hi = mpmath.mpf(2), mpmath.mpf(3)
        for _ in range(20):
            mid = (lo + hi) / 2
            if bessel("J0", 0, mid) > 0:
                lo = mid
            else:
                hi = mid
        x = (lo + hi) / 2
        for _ in range(50):
            step = bessel("J0", 0, x) / -bessel("J1", 1, x)
            x -= step
            if abs(step) < mpmath.mpf(10) ** (-dps + 3):
                break
        return +x
