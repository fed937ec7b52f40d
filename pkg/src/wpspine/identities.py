"""Integral and summation identities behind the three-point function.

Each identity comes as a pair of independent evaluations: a closed or
reduced form, and a brute-force quadrature of the defining integral.
"""

from __future__ import annotations

import math
from fractions import Fraction
from math import comb, factorial
from typing import Sequence

import mpmath
import numpy as np

DPS = 30


def _check_range(k: int, l: int, u) -> None:
    if not 2 <= l <= k:
        raise ValueError(f"need 2 <= l <= k, got k={k}, l={l}")
    if abs(u) >= 0.5:
        raise ValueError("need |u| < 1/2")


def simplex_exp_integral(k: int, l: int, u, L, tol=None):
    """Integral of ``exp(2u (v_1 + ... + v_(l-1)))`` over the simplex of size ``L/2`` in ``k`` parts.

    Summed as a power series in ``u``.  Term ratios are bounded by
    ``|u| L / (m + 1)``, so once that bound is below 1/2 the remainder is at
    most the last term.
    """
    if not 1 <= l <= k:
        raise ValueError(f"need 1 <= l <= k, got k={k}, l={l}")
    u, L = mpmath.mpf(u), mpmath.mpf(L)
    tol = mpmath.mpf(tol) if tol is not None else mpmath.eps
    if L == 0:
        return mpmath.mpf(0) if k > 1 else mpmath.mpf(1)
    total = mpmath.mpf(0)
    m = 0
    while True:
        term = u**m * L ** (k + m - 1) * mpmath.mpf(2) ** (1 - k) / mpmath.factorial(k + m - 1) * comb(l + m - 2, m)
        total += term
        bound = abs(u) * L / (m + 1)
        if bound < 0.5 and abs(term) <= tol * abs(total):
            return total
        m += 1


def quad_E(k: int, l: int, L, u):
    """Integral of ``exp(2u (d_1 - d_l))`` across a boundary vertex of degree ``k``.

    The two simplex integrals separate; the one over the ``w`` side equals
    ``(2 pi u / sin 2 pi u)`` times the ``v`` integral at ``-u``.
    """
    _check_range(k, l, u)
    with mpmath.workdps(DPS):
        u = mpmath.mpf(u)
        reflect = 1 / mpmath.sincpi(2 * u)
        return 2 ** (k - 1) * simplex_exp_integral(k, l, u, L) * reflect * simplex_exp_integral(k, l, -u, L)


def quad_E_direct(L, u):
    """Two-dimensional quadrature of the ``k = l = 2`` case.

    Uses the passage increment ``d_2 - d_1 = v_1 - log(e^(w_1) - 1) + log(1 - e^(-w_2))``
    with ``w_1 + w_2 = v_1 + v_2 = L/2``.  The integrand is singular at
    ``w_2 = 0`` for ``u > 0`` and at ``w_1 = 0`` for ``u < 0``; the singular
    variable is the one integrated so that its endpoint is resolved exactly.
    Reliable to about 1e-9 for ``|u| <= 0.3``; stronger singularities need
    more quadrature levels than the default.
    """
    _check_range(2, 2, u)
    with mpmath.workdps(20):
        u, half = mpmath.mpf(u), mpmath.mpf(L) / 2

        def integrand(x, v1):
            w1, w2 = (half - x, x) if u > 0 else (x, half - x)
            step = v1 - mpmath.log(mpmath.expm1(w1)) + mpmath.log(-mpmath.expm1(-w2))
            return mpmath.exp(-2 * u * step)

        return 2 * mpmath.quad(integrand, [0, half], [0, half])


def boundary_sum(k: int, L, u):
    """``sum_l I_{k,l}(u) I_{k,l}(-u)`` evaluated term by term."""
    with mpmath.workdps(DPS):
        return mpmath.fsum(simplex_exp_integral(k, l, u, L) * simplex_exp_integral(k, l, -u, L) for l in range(2, k + 1))


def boundary_sum_closed(k: int, L, u, terms: int = 60):
    """The same sum from its collapsed power series in ``u L``."""
    with mpmath.workdps(DPS):
        u, L = mpmath.mpf(u), mpmath.mpf(L)
        s = mpmath.fsum(
            (u * L) ** (2 * p) / u**2 * mpmath.mpf(2 * factorial(p)) / (factorial(2 * p) * factorial(k - 2) * factorial(k + p - 2))
            for p in range(1, terms)
        )
        return mpmath.mpf(4) ** (1 - k) * L ** (2 * k - 4) * s


def double_binomial_sides(p: int, k: int) -> tuple[Fraction, Fraction]:
    """Both sides of the double binomial sum identity, as exact rationals."""
    if p < 1 or k < 2:
        raise ValueError("need p >= 1, k >= 2")
    lhs = Fraction(0)
    for l in range(2, k + 1):
        for m in range(2 * p - 1):
            num = (-1) ** m * comb(l + m - 2, m) * comb(l + 2 * p - m - 4, 2 * p - m - 2)
            lhs += Fraction(num, factorial(k + m - 1) * factorial(k + 2 * p - m - 3))
    rhs = Fraction(2 * factorial(p), factorial(2 * p) * factorial(k - 2) * factorial(p + k - 2))
    return lhs, rhs


def sine_ratio_average(alphas: Sequence[float], betas: Sequence[float], u):
    """``(1/pi) int_0^pi prod (sin(a_i - g) / sin(b_i - g))^(2u)`` over ``g`` outside every ``[a_i, b_i]``."""
    with mpmath.workdps(DPS):
        a = [mpmath.mpf(x) for x in alphas]
        b = [mpmath.mpf(x) for x in betas]
        u = mpmath.mpf(u)

        def g(x):
            return mpmath.exp(2 * u * mpmath.fsum(mpmath.log(mpmath.sin(ai - x) / mpmath.sin(bi - x)) for ai, bi in zip(a, b)))

        gaps = [(mpmath.mpf(0), a[0])] + [(b[i], a[i + 1]) for i in range(len(a) - 1)] + [(b[-1], mpmath.pi)]
        total = mpmath.fsum(mpmath.quad(g, [lo, hi]) for lo, hi in gaps if hi > lo)
        return total / mpmath.pi


def sine_ratio_average_closed(alphas: Sequence[float], betas: Sequence[float], u):
    with mpmath.workdps(DPS):
        gap = mpmath.pi - mpmath.fsum(mpmath.mpf(b) - mpmath.mpf(a) for a, b in zip(alphas, betas))
        return mpmath.sin(2 * u * gap) / mpmath.sin(2 * mpmath.pi * u)


def nested_intervals(rng: np.random.Generator, p: int) -> tuple[list[float], list[float]]:
    pts = np.sort(rng.uniform(0, math.pi, 2 * p))
    return list(pts[0::2]), list(pts[1::2])


def _tanh_sinh(h: float = 0.125, tmax: float = 4.0):
    """Tanh-sinh nodes on (0, 1) with their complements and weights."""
    t = np.arange(-tmax, tmax + h / 2, h)
    y = 0.5 * math.pi * np.sinh(t)
    x = 1 / (1 + np.exp(-2 * y))
    xc = 1 / (1 + np.exp(2 * y))
    w = h * 0.25 * math.pi * np.cosh(t) / np.cosh(y) ** 2
    return x, xc, w


def ordered_angle_integral(p: int, u: float, powers: Sequence[int] | None = None, h: float = 0.125) -> float:
    """``int prod (sin a_i / sin b_i)^(2u) (b_i - a_i)^(k_i)`` over ``0 < a_1 < b_1 < ... < b_p < pi``.

    The powers ``k_i`` default to 1.

    Tensor tanh-sinh rule after writing ``t_2p = pi s_2p`` and
    ``t_j = t_(j+1) s_j``, which maps the ordered region onto the unit cube.
    The outermost coordinate is looped over; the rest is one numpy array.
    """
    if p < 1:
        raise ValueError("p must be positive")
    powers = tuple(powers) if powers is not None else (1,) * p
    if len(powers) != p:
        raise ValueError("need one power per pair")
    x, xc, w = _tanh_sinh(h)
    dims = 2 * p
    n = len(x)
    axes = dims - 1

    def along(arr, j):
        shape = [1] * axes
        shape[j] = n
        return arr.reshape(shape)

    total = math.fsum(
        w[i] * math.pi * _ordered_slice(powers, u, math.pi * x[i], math.pi * xc[i], along, x, xc, w)
        for i in range(n)
    )
    return total


def _ordered_slice(powers, u, top, top_gap, along, x, xc, w):
    dims = 2 * len(powers)
    t = [None] * dims
    width = [None] * dims  # t[j + 1] - t[j]
    t[-1] = top
    jac = 1.0
    weight = 1.0
    for j in range(dims - 2, -1, -1):
        s, sc = along(x, j), along(xc, j)
        t[j] = t[j + 1] * s
        width[j] = t[j + 1] * sc
        jac = jac * t[j + 1]
        weight = weight * along(w, j)
    log_ratio = 0.0
    lengths = 1.0
    for i in range(dims // 2):
        a, b = 2 * i, 2 * i + 1
        sin_b = math.sin(top_gap) if b == dims - 1 else np.sin(t[b])
        log_ratio = log_ratio + np.log(np.sin(t[a])) - np.log(sin_b)
        lengths = lengths * width[a] ** powers[i]
    return float(np.sum(weight * jac * lengths * np.exp(2 * u * log_ratio)))


def _dirichlet_polynomial(factor: dict[int, object], p: int) -> dict[int, object]:
    """Integrate ``prod_i f(theta_i)`` over ``theta_1 + ... + theta_p = s``.

    ``factor`` maps a power ``a`` to the coefficient of ``theta^a`` in ``f``.
    The result maps ``N`` to the coefficient of ``s^N``.
    """
    moments = {a: c * factorial(a) for a, c in factor.items()}
    prod = {0: 1}
    for _ in range(p):
        nxt: dict[int, object] = {}
        for a, c in prod.items():
            for b, d in moments.items():
                nxt[a + b] = nxt.get(a + b, 0) + c * d
        prod = nxt
    return {a + p - 1: c / mpmath.factorial(a + p - 1) for a, c in prod.items()}


def simplex_form(p: int, u, factor: dict[int, object]):
    """``int_0^pi sinc(2 u s0) / sinc(2 pi u) s0^p / p! G(pi - s0) ds0`` for polynomial ``f``.

    ``G`` is the convolution of ``p`` copies of ``f``.
    """
    with mpmath.workdps(DPS):
        u = mpmath.mpf(u)
        conv = _dirichlet_polynomial(factor, p)
        norm = mpmath.sinc(2 * mpmath.pi * u)

        def integrand(s0):
            rest = mpmath.pi - s0
            g = mpmath.fsum(c * rest**N for N, c in conv.items())
            return mpmath.sinc(2 * u * s0) * s0**p / mpmath.factorial(p) * g

        return mpmath.quad(integrand, [0, mpmath.pi]) / norm


def _f_coefficient(m: int):
    """Coefficient of ``r^m`` in ``f(theta) = -4 F(r, theta)``; a multiple of ``theta^(2m - 2)``."""
    return -4 * mpmath.mpf(-1) ** (m - 1) * mpmath.mpf(2) ** (m - 1) / (mpmath.factorial(m - 1) * mpmath.factorial(m))


def inner_vertex_terms(p: int, u, order: int = 3) -> list:
    """``[r^m]`` of ``-Z_p[f]`` for ``m = 1..order``, from the simplex form.

    Each of the ``p`` factors of ``f`` carries at least one power of ``r``.
    """
    out = []
    for m in range(1, order + 1):
        total = mpmath.fsum(
            mpmath.fprod(_f_coefficient(q) for q in parts) * _composition_integral(p, u, [2 * q - 2 for q in parts])
            for parts in _compositions(m, p)
        )
        out.append(-total)
    return out


def _compositions(m: int, p: int):
    if p == 1:
        if m >= 1:
            yield (m,)
        return
    for first in range(1, m - p + 2):
        for rest in _compositions(m - first, p - 1):
            yield (first,) + rest


def _composition_integral(p: int, u, powers: Sequence[int]):
    """``simplex_form`` for ``prod_i theta_i^(a_i)`` with the given powers."""
    with mpmath.workdps(DPS):
        u = mpmath.mpf(u)
        N = sum(powers) + p - 1
        dirichlet = mpmath.fprod(mpmath.factorial(a) for a in powers) / mpmath.factorial(N)
        norm = mpmath.sinc(2 * mpmath.pi * u)

        def integrand(s0):
            return mpmath.sinc(2 * u * s0) * s0**p / mpmath.factorial(p) * (mpmath.pi - s0) ** N

        return dirichlet * mpmath.quad(integrand, [0, mpmath.pi]) / norm


def inner_vertex_first_term(u, order: int = 3) -> list:
    """``[r^m]`` of ``int int 4 F(r, b - a) (sin a / sin b)^(2u)`` over ``0 < a < b < pi`` by 2-D quadrature."""
    return [-_f_coefficient(m) * ordered_angle_integral(1, float(u), [2 * m - 2]) for m in range(1, order + 1)]


def inner_vertex_closed(u, order: int = 3, terms: int = 40) -> list:
    """``[r^m]`` of the closed form of the inner-vertex series, ``m = 1..order``."""
    with mpmath.workdps(DPS):
        u = mpmath.mpf(u)
        pre = 1 / mpmath.sinc(2 * mpmath.pi * u)
        two_pi2 = 2 * mpmath.pi**2
        out = []
        for m in range(1, order + 1):
            s = mpmath.fsum(
                u ** (2 * p) / mpmath.fac2(2 * p + 1) * (-1) ** (m + p) * two_pi2 ** (m + p) / (mpmath.factorial(m + p) * mpmath.factorial(m))
                for p in range(terms)
            )
            out.append(-pre * s)
        return out
