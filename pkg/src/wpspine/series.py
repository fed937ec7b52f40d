"""Truncated power series for the string equation and the three-point function.

All series are in a bookkeeping variable ``s`` that rescales the weight,
``mu -> s*mu``.  Coefficients live in one of two rings:

* :data:`EXACT`: polynomials in pi^2 with rational coefficients
  (``WPPolynomial`` with no length variables), used when the weight has
  rational masses and lengths and no real parameter enters;
* :data:`REAL`: mpmath numbers at :data:`REAL_DPS` significant digits.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from numbers import Rational
from typing import Callable, Iterable, Sequence

import mpmath

from .wp_poly import WPPolynomial

REAL_DPS = 60


class SeriesError(ValueError):
    pass


class ExactRing:
    name = "exact"

    def const(self, q) -> WPPolynomial:
        return WPPolynomial.constant(0, Fraction(q))

    def pi2(self, k: int) -> WPPolynomial:
        return WPPolynomial.pi2(0, k)

    def inverse(self, c: WPPolynomial) -> WPPolynomial:
        if set(c.terms) - {(0,)} or not c:
            raise SeriesError("only nonzero rational constants are invertible here")
        return self.const(1 / c.terms[(0,)])

    def is_zero(self, c) -> bool:
        return not c

    def to_mpf(self, c: WPPolynomial):
        return c.evaluate([], "numeric")


class RealRing:
    name = "real"

    def const(self, q):
        if isinstance(q, Rational):
            q = Fraction(q)
            return mpmath.mpf(q.numerator) / q.denominator
        return mpmath.mpf(q)

    def pi2(self, k: int):
        return mpmath.pi ** (2 * k)

    def inverse(self, c):
        if c == 0:
            raise SeriesError("division by zero")
        return 1 / c

    def is_zero(self, c) -> bool:
        return c == 0

    def to_mpf(self, c):
        return c


EXACT = ExactRing()
REAL = RealRing()


class TruncatedSeries:
    """``sum_k coeffs[k] s^k + O(s^(order+1))``."""

    __slots__ = ("coeffs", "ring")

    def __init__(self, coeffs: Sequence, ring=REAL):
        self.coeffs = list(coeffs)
        self.ring = ring
        if not self.coeffs:
            raise SeriesError("a series needs at least the constant term")

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @classmethod
    def constant(cls, c, order: int, ring=REAL) -> "TruncatedSeries":
        zero = ring.const(0)
        return cls([c] + [zero] * order, ring)

    @classmethod
    def variable(cls, order: int, ring=REAL) -> "TruncatedSeries":
        zero, one = ring.const(0), ring.const(1)
        return cls([zero, one] + [zero] * (order - 1), ring)

    def __getitem__(self, k):
        return self.coeffs[k]

    def __len__(self):
        return len(self.coeffs)

    def __iter__(self):
        return iter(self.coeffs)

    def _match(self, other) -> "TruncatedSeries":
        if isinstance(other, TruncatedSeries):
            return other
        return TruncatedSeries.constant(self._scalar(other), self.order, self.ring)

    def _scalar(self, c):
        if isinstance(c, (int, Rational)):
            return self.ring.const(c)
        return c

    def __add__(self, other):
        other = self._match(other)
        n = min(self.order, other.order)
        return TruncatedSeries([a + b for a, b in zip(self.coeffs[: n + 1], other.coeffs)], self.ring)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries([-a for a in self.coeffs], self.ring)

    def __sub__(self, other):
        return self + (-self._match(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, TruncatedSeries):
            c = self._scalar(other)
            return TruncatedSeries([a * c for a in self.coeffs], self.ring)
        n = min(self.order, other.order)
        out = []
        for k in range(n + 1):
            acc = self.coeffs[0] * other.coeffs[k]
            for i in range(1, k + 1):
                acc = acc + self.coeffs[i] * other.coeffs[k - i]
            out.append(acc)
        return TruncatedSeries(out, self.ring)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = TruncatedSeries.constant(self.ring.const(1), self.order, self.ring)
        for _ in range(k):
            out = out * self
        return out

    def truncate(self, order: int) -> "TruncatedSeries":
        return TruncatedSeries(self.coeffs[: order + 1], self.ring)

    def derivative(self) -> "TruncatedSeries":
        zero = self.ring.const(0)
        return TruncatedSeries([self.coeffs[k] * k for k in range(1, len(self.coeffs))] or [zero], self.ring)

    def reciprocal(self) -> "TruncatedSeries":
        c0 = self.coeffs[0]
        if self.ring.is_zero(c0):
            raise SeriesError("reciprocal of a series with zero constant term")
        inv0 = self.ring.inverse(c0)
        out = [inv0]
        for k in range(1, len(self.coeffs)):
            acc = self.coeffs[1] * out[k - 1]
            for i in range(2, k + 1):
                acc = acc + self.coeffs[i] * out[k - i]
            out.append(-acc * inv0)
        return TruncatedSeries(out, self.ring)

    def __truediv__(self, other):
        if isinstance(other, TruncatedSeries):
            return self * other.reciprocal()
        return self * self.ring.inverse(self._scalar(other))

    def compose(self, inner: "TruncatedSeries") -> "TruncatedSeries":
        """``self(inner(s))``; ``inner`` must have zero constant term."""
        if not inner.ring.is_zero(inner.coeffs[0]):
            raise SeriesError("inner series must have zero constant term")
        n = min(self.order, inner.order)
        inner = inner.truncate(n)
        out = TruncatedSeries.constant(self.coeffs[n], n, self.ring)
        for c in reversed(self.coeffs[:n]):
            out = out * inner + c
        return out

    def reversion(self) -> "TruncatedSeries":
        """The compositional inverse of a series ``a1 s + a2 s^2 + ...`` with ``a1`` invertible."""
        if not self.ring.is_zero(self.coeffs[0]):
            raise SeriesError("reversion needs zero constant term")
        inv1 = self.ring.inverse(self.coeffs[1])
        n = self.order
        s = TruncatedSeries.variable(n, self.ring)
        higher = TruncatedSeries([self.ring.const(0)] * 2 + self.coeffs[2:], self.ring)
        g = s * inv1
        for _ in range(n):
            g = (s - higher.compose(g)) * inv1
        return g

    def evaluate(self, x):
        total = self.coeffs[-1]
        for c in reversed(self.coeffs[:-1]):
            total = total * x + c
        return total

    def to_mpf(self) -> list:
        return [self.ring.to_mpf(c) for c in self.coeffs]

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __repr__(self):
        return f"TruncatedSeries({self.ring.name}, {self.coeffs!r})"


# ---------------------------------------------------------------------------
# weights and times


@dataclass(frozen=True)
class AtomicWeight:
    """A finite weight ``sum_j mass_j * delta(length_j)``."""

    atoms: tuple[tuple[object, object], ...]

    def __post_init__(self):
        atoms = tuple((m, K) for m, K in self.atoms)
        for m, K in atoms:
            if m < 0 or K < 0:
                raise ValueError("masses and lengths must be non-negative")
        object.__setattr__(self, "atoms", atoms)

    @classmethod
    def parse(cls, text: str) -> "AtomicWeight":
        """Parse ``"x1:K1,x2:K2"``; rational literals such as ``1/3`` stay exact."""
        atoms = []
        for part in filter(None, (p.strip() for p in text.split(","))):
            m, _, K = part.partition(":")
            atoms.append((parse_number(m), parse_number(K or "0")))
        return cls(tuple(atoms))

    @property
    def is_rational(self) -> bool:
        return all(isinstance(v, (int, Rational)) for atom in self.atoms for v in atom)

    def total_mass(self):
        return sum(m for m, _ in self.atoms)

    def ring(self):
        return EXACT if self.is_rational else REAL

    def scaled(self, factor) -> "AtomicWeight":
        return AtomicWeight(tuple((factor * m, K) for m, K in self.atoms))


def parse_number(text: str):
    text = text.strip()
    try:
        return Fraction(text)
    except ValueError:
        return mpmath.mpf(text)


def times(mu: AtomicWeight, k: int, ring=None):
    """``t_k[mu] = sum_j x_j (2/k!) (K_j/2)^(2k)``."""
    ring = ring or mu.ring()
    total = ring.const(0)
    for m, K in mu.atoms:
        total = total + ring.const(m) * ring.const(2) * ring.const(K) ** (2 * k) * ring.const(Fraction(1, factorial(k) * 4**k))
    return total


def _weight_coefficient(mu: AtomicWeight, d: int, ring):
    """``a_d`` in ``int I_0(L sqrt(2r)) dmu = sum_d a_d r^d``."""
    acc = ring.const(0)
    for m, K in mu.atoms:
        acc = acc + ring.const(m) * (ring.const(K) ** 2 / 2) ** d * ring.const(Fraction(1, factorial(d) ** 2))
    return acc


def _weight_coefficients(mu: AtomicWeight, upto: int, ring) -> list:
    return [_weight_coefficient(mu, d, ring) for d in range(upto + 1)]


def bessel_coefficient(d: int) -> Fraction:
    """Rational part of the r^d coefficient of sqrt(r)/(sqrt2 pi) J_1(2 pi sqrt(2r)).

    The full coefficient is this number times pi^(2d-2).
    """
    return Fraction((-1) ** (d - 1) * 2 ** (d - 1), factorial(d) * factorial(d - 1))


def _bessel_term(d: int, ring):
    return ring.const(bessel_coefficient(d)) * ring.pi2(d - 1)


def solve_string(mu: AtomicWeight, N: int, ring=None) -> TruncatedSeries:
    """Solve the string equation order by order in ``s``.

    The equation is ``R = sum_d a_d s R^d + sum_{d>=2} b_d R^d`` where
    ``b_d`` are the (negated) higher Bessel coefficients; the ``s^N`` term of
    the right side only involves lower-order coefficients of ``R``.
    """
    if N < 1:
        raise SeriesError("order must be at least 1")
    ring = ring or mu.ring()
    zero = ring.const(0)
    a = _weight_coefficients(mu, N, ring)
    b = [zero, zero] + [-_bessel_term(d, ring) for d in range(2, N + 1)]
    R = [zero] * (N + 1)
    # powers[d][k] = [s^k] R^d, filled lazily
    powers = [[ring.const(1)] + [zero] * N] + [[zero] * (N + 1) for _ in range(N)]
    for k in range(1, N + 1):
        for d in range(2, k + 1):
            acc = zero
            for i in range(1, k - d + 2):
                acc = acc + R[i] * powers[d - 1][k - i]
            powers[d][k] = acc
        val = zero
        for d in range(0, k):
            val = val + a[d] * powers[d][k - 1]
        for d in range(2, k + 1):
            val = val + b[d] * powers[d][k]
        R[k] = val
        powers[1][k] = val
    return TruncatedSeries(R, ring)


def Z_series(r_series: TruncatedSeries, mu: AtomicWeight) -> TruncatedSeries:
    """``Z(r(s); s*mu]`` with the Bessel expansion of ``Z`` in ``r``."""
    ring = r_series.ring
    if not ring.is_zero(r_series[0]):
        raise SeriesError("r_series must have zero constant term")
    N = r_series.order
    bessel_part = TruncatedSeries([ring.const(0)] + [_bessel_term(d, ring) for d in range(1, N + 1)], ring)
    weight_part = TruncatedSeries(_weight_coefficients(mu, N, ring), ring)
    shift = TruncatedSeries.variable(N, ring)
    return bessel_part.compose(r_series) - shift * weight_part.compose(r_series)


def _double_factorial_odd(p: int) -> int:
    out = 1
    for k in range(3, 2 * p + 2, 2):
        out *= k
    return out


def _u_sum(term: Callable[[int], object], u, ring, start: int = 0):
    """``sum_p u^(2p)/(2p+1)!! term(p)``, summed until it stops changing."""
    if ring is EXACT:
        if u != 0:
            raise SeriesError("u-dependent series need the real ring")
        return term(0)
    u2 = mpmath.mpf(u) ** 2
    total = mpmath.mpf(0)
    weight = mpmath.mpf(1)
    small = 0
    p = 0
    while True:
        contrib = weight * term(p)
        total += contrib
        if abs(contrib) <= mpmath.eps * abs(total):
            small += 1
            if small >= 3:
                return total
        else:
            small = 0
        p += 1
        weight = weight * u2 / (2 * p + 1)
        if p > 4000:
            raise SeriesError("u-sum did not converge")


def _falling(n: int, k: int) -> int:
    # n! / (n-k)!
    out = 1
    for i in range(n - k + 1, n + 1):
        out *= i
    return out


def eta(u, mu: AtomicWeight, N: int, ring=None) -> TruncatedSeries:
    """``sum_p u^(2p)/(2p+1)!! d^(p+1)Z/dr^(p+1)(R[s mu]; s mu]`` to order ``N``."""
    if ring is None:
        ring = mu.ring() if u == 0 else REAL
    with mpmath.workdps(REAL_DPS):
        R = solve_string(mu, N, ring)
        zero = ring.const(0)
        one = TruncatedSeries.constant(ring.const(1), N, ring)
        powers = [one]
        for _ in range(N):
            powers.append(powers[-1] * R)

        out = [zero] * (N + 1)
        for j in range(N + 1):
            # r^j coefficient of the (p+1)-th derivative of the Bessel part
            H = _u_sum(lambda p: _bessel_term(j + p + 1, ring) * _falling(j + p + 1, p + 1), u, ring)
            for k in range(j, N + 1):
                out[k] = out[k] + powers[j][k] * H
        for i in range(N):
            K = _u_sum(lambda p: _weight_coefficient(mu, i + p + 1, ring) * _falling(i + p + 1, p + 1), u, ring)
            for k in range(i, N):
                out[k + 1] = out[k + 1] - powers[i][k] * K
        return TruncatedSeries(out, ring)


def sinc2pi(u, ring=REAL):
    """``sin(2 pi u) / (2 pi u)`` with the value 1 at 0."""
    if u == 0:
        return ring.const(1)
    x = 2 * mpmath.pi * mpmath.mpf(u)
    return mpmath.sin(x) / x


def xhat(u, mu: AtomicWeight, N: int, ring=None) -> TruncatedSeries:
    """``sin(2 pi u) / (2 pi u eta(u; s mu])`` to order ``N``."""
    with mpmath.workdps(REAL_DPS):
        e = eta(u, mu, N, ring)
        if e.ring.is_zero(e[0]):
            raise SeriesError("sin(2 pi u) vanishes")
        return e.reciprocal() * sinc2pi(u, e.ring)


def polarize(values: Callable[[AtomicWeight], TruncatedSeries], lengths: Sequence, ring_hint=None):
    """Multilinear coefficient of ``x_1 ... x_n`` for the weight ``sum x_j delta(K_j)``.

    ``values(mu)`` returns a series in ``s``; the ``s^n`` coefficient is a
    symmetric form of degree ``n`` in ``mu``, and inclusion-exclusion over
    sub-weights recovers its value on distinct atoms.
    """
    n = len(lengths)
    total = None
    for bits in range(1, 1 << n):
        subset = [lengths[j] for j in range(n) if bits >> j & 1]
        mu = AtomicWeight(tuple((1, K) for K in subset))
        term = values(mu)[n]
        sign = -1 if (n - len(subset)) % 2 else 1
        term = term if sign > 0 else -term
        total = term if total is None else total + term
    return total
