"""Variance of the distance difference for surfaces with many cusps.

For the weight ``x * delta(0)`` everything scales out of pi: with
``y = pi^2 x`` and ``rho(y) = pi^2 R``, the string equation becomes
``y = g(rho)`` where ``g'(rho) = J_0(2 sqrt(2 rho))``.  Writing
``A = g'(rho(y))`` and ``B = g''(rho(y))`` the Bessel equation gives the
triangular system

    A rho' = 1,    A A' = B,    rho A B' = -(B + 2A),

solved here coefficient by coefficient in exact rationals.  Then
``M_0(x) = A(y)`` and ``M_1(x) = pi^2 B(y)``, and

    Var_n = -(pi^2 / 6) * ([y^n] B/A^2 / [y^n] 1/A + 2).
"""

from __future__ import annotations

from fractions import Fraction
from typing import NamedTuple

import mpmath

from .bessel import j0_first_zero


class BesselFlow(NamedTuple):
    rho: list[Fraction]
    A: list[Fraction]
    B: list[Fraction]


def bessel_flow(N: int) -> BesselFlow:
    """Coefficients 0..N of ``rho``, ``A`` and ``B`` in ``y``."""
    rho = [Fraction(0)] * (N + 2)
    A = [Fraction(0)] * (N + 2)
    B = [Fraction(0)] * (N + 1)
    C = [Fraction(0)] * (N + 1)  # rho * A
    A[0], B[0] = Fraction(1), Fraction(-2)
    A[1], rho[1] = B[0], Fraction(1)
    for k in range(1, N + 1):
        C[k] = sum((rho[i] * A[k - i] for i in range(1, k + 1)), Fraction(0))
        acc = -2 * A[k]
        for i in range(2, k + 1):
            acc -= C[i] * (k - i + 1) * B[k - i + 1]
        B[k] = acc / (k + 1)
        acc = B[k]
        for i in range(1, k + 1):
            acc -= A[i] * (k - i + 1) * A[k - i + 1]
        A[k + 1] = acc / (k + 1)
        acc = Fraction(0)
        for i in range(1, k + 1):
            acc -= A[i] * (k - i + 1) * rho[k - i + 1]
        rho[k + 1] = acc / (k + 1)
    return BesselFlow(rho[: N + 1], A[: N + 1], B[: N + 1])


def _mul(a, b, N):
    return [sum((a[i] * b[k - i] for i in range(k + 1)), Fraction(0)) for k in range(N + 1)]


def _inv(a, N):
    out = [1 / a[0]]
    for k in range(1, N + 1):
        out.append(-sum((a[i] * out[k - i] for i in range(1, k + 1)), Fraction(0)) / a[0])
    return out


def variance_coefficients(n_max: int) -> list[Fraction]:
    """``Q_n`` with ``Var D(S_n) = pi^2 * Q_n``, exact, for ``n = 0..n_max``."""
    flow = bessel_flow(n_max)
    inv_a = _inv(flow.A, n_max)
    b_over_a2 = _mul(flow.B, _mul(inv_a, inv_a, n_max), n_max)
    return [-(Fraction(1, 6)) * (b_over_a2[n] / inv_a[n] + 2) for n in range(n_max + 1)]


def c_wp(dps: int = 40):
    """``2 pi / sqrt(3 c_0)`` with ``c_0`` the first zero of ``J_0``."""
    with mpmath.workdps(dps):
        return 2 * mpmath.pi / mpmath.sqrt(3 * j0_first_zero(dps))


def variance_pipeline(n_max: int, dps: int = 40) -> list[tuple[int, object, object]]:
    """Rows ``(n, Var D(S_n), Var / (c_WP^2 sqrt(pi n / 8)))`` for ``n = 0..n_max``.

    The ratio is ``None`` at ``n = 0``.
    """
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    q = variance_coefficients(n_max)
    with mpmath.workdps(dps):
        scale = c_wp(dps) ** 2 * mpmath.sqrt(mpmath.pi / 8)
        rows = []
        for n, qn in enumerate(q):
            var = mpmath.pi**2 * mpmath.mpf(qn.numerator) / qn.denominator
            ratio = var / (scale * mpmath.sqrt(n)) if n else None
            rows.append((n, var, ratio))
        return rows
