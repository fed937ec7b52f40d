"""Exact polynomials in pi^2 and L_i^2, and volumes of tree polytopes.

A :class:`WPPolynomial` stores ``{(a, b_1, ..., b_n): c}`` for the sum of
``c * pi^(2a) * prod L_i^(2 b_i)`` with rational ``c``.  Both pi^2 and every
L_i^2 count as degree one.

Total volumes are computed two ways:

* ``anti``: one monomial weight per anti-Delaunay tree;
* ``inclusion_exclusion``: per Delaunay tree, an alternating sum over sets of
  inner-inner edges of volumes of product polytopes.
"""

from __future__ import annotations

from collections import defaultdict
from fractions import Fraction
from functools import lru_cache
from math import factorial
from numbers import Rational
from typing import Iterable, Mapping, Sequence

import mpmath

from .trees import (
    CuspMask,
    PlaneTree,
    TreeError,
    _as_mask,
    contract_edges,
    enumerate_anti,
    enumerate_delaunay,
)

Exponent = tuple[int, ...]


class WPPolynomial:
    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: Mapping[Exponent, Fraction | int] | None = None):
        self.n = n
        clean: dict[Exponent, Fraction] = {}
        for key, c in (terms or {}).items():
            key = tuple(key)
            if len(key) != n + 1:
                raise ValueError(f"exponent {key} does not fit n={n}")
            if any(k < 0 for k in key):
                raise ValueError(f"negative exponent {key}")
            c = Fraction(c)
            if c:
                clean[key] = clean.get(key, 0) + c
                if not clean[key]:
                    del clean[key]
        self.terms = clean

    # constructors -----------------------------------------------------------

    @classmethod
    def zero(cls, n: int) -> "WPPolynomial":
        return cls(n)

    @classmethod
    def constant(cls, n: int, c) -> "WPPolynomial":
        return cls(n, {(0,) * (n + 1): c})

    @classmethod
    def pi2(cls, n: int, power: int = 1) -> "WPPolynomial":
        return cls(n, {(power,) + (0,) * n: 1})

    @classmethod
    def length2(cls, n: int, i: int, power: int = 1) -> "WPPolynomial":
        """``L_i^(2*power)`` with 1-based ``i``."""
        key = [0] * (n + 1)
        key[i] = power
        return cls(n, {tuple(key): 1})

    # arithmetic -------------------------------------------------------------

    def _coerce(self, other) -> "WPPolynomial":
        if isinstance(other, WPPolynomial):
            if other.n != self.n:
                raise ValueError("polynomials in different numbers of lengths")
            return other
        if isinstance(other, (int, Rational)):
            return WPPolynomial.constant(self.n, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0) + c
        return WPPolynomial(self.n, out)

    __radd__ = __add__

    def __neg__(self):
        return WPPolynomial(self.n, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Rational)):
            return WPPolynomial(self.n, {k: c * other for k, c in self.terms.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out: dict[Exponent, Fraction] = defaultdict(Fraction)
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                out[tuple(a + b for a, b in zip(k1, k2))] += c1 * c2
        return WPPolynomial(self.n, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = WPPolynomial.constant(self.n, 1)
        for _ in range(k):
            out = out * self
        return out

    def __truediv__(self, q):
        if not isinstance(q, (int, Rational)):
            return NotImplemented
        return self * (1 / Fraction(q))

    def __eq__(self, other):
        if isinstance(other, (int, Rational)):
            other = WPPolynomial.constant(self.n, other)
        if not isinstance(other, WPPolynomial):
            return NotImplemented
        return self.n == other.n and self.terms == other.terms

    def __hash__(self):
        return hash((self.n, frozenset(self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    # inspection -------------------------------------------------------------

    def degrees(self) -> set[int]:
        return {sum(k) for k in self.terms}

    def is_homogeneous(self, degree: int | None = None) -> bool:
        degs = self.degrees()
        if not degs:
            return True
        return len(degs) == 1 and (degree is None or degs == {degree})

    def coefficient(self, pi2: int, lengths2: Sequence[int] = ()) -> Fraction:
        key = (pi2,) + tuple(lengths2) + (0,) * (self.n - len(lengths2))
        return self.terms.get(key, Fraction(0))

    def set_zero(self, indices: Iterable[int]) -> "WPPolynomial":
        """Substitute ``L_i = 0`` for the given 1-based indices."""
        idx = set(indices)
        return WPPolynomial(
            self.n, {k: c for k, c in self.terms.items() if all(k[i] == 0 for i in idx)}
        )

    # evaluation -------------------------------------------------------------

    def evaluate(self, lengths: Sequence, pi_mode: str = "numeric"):
        """Substitute the lengths.

        ``pi_mode="symbolic"`` needs rational lengths and returns a
        polynomial in pi^2 alone (``n == 0``); ``"numeric"`` returns an mpmath
        number at the current working precision.
        """
        if len(lengths) != self.n:
            raise ValueError(f"expected {self.n} lengths, got {len(lengths)}")
        if pi_mode == "symbolic":
            sq = [Fraction(x) ** 2 for x in lengths]
            out: dict[Exponent, Fraction] = defaultdict(Fraction)
            for k, c in self.terms.items():
                val = c
                for s, b in zip(sq, k[1:]):
                    val *= s**b
                out[(k[0],)] += val
            return WPPolynomial(0, out)
        if pi_mode != "numeric":
            raise ValueError(f"unknown pi_mode {pi_mode!r}")
        pi2 = mpmath.pi**2
        sq = [_to_mpf(x) ** 2 for x in lengths]
        total = mpmath.mpf(0)
        for k, c in self.terms.items():
            val = mpmath.mpf(c.numerator) / c.denominator * pi2 ** k[0]
            for s, b in zip(sq, k[1:]):
                val *= s**b
            total += val
        return total

    def __call__(self, *lengths):
        return self.evaluate(lengths)

    # serialization ----------------------------------------------------------

    def sorted_terms(self) -> list[tuple[Exponent, Fraction]]:
        return sorted(self.terms.items(), key=lambda kc: (-sum(kc[0]), tuple(-x for x in kc[0])))

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "terms": [
                {"pi2": k[0], "L2": list(k[1:]), "num": str(c.numerator), "den": str(c.denominator)}
                for k, c in self.sorted_terms()
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "WPPolynomial":
        n = data["n"]
        return cls(
            n,
            {
                (t["pi2"],) + tuple(t["L2"]): Fraction(int(t["num"]), int(t["den"]))
                for t in data["terms"]
            },
        )

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for k, c in self.sorted_terms():
            factors = []
            if k[0]:
                factors.append("pi^%d" % (2 * k[0]))
            factors += [f"L{i}^{2 * b}" for i, b in enumerate(k[1:], 1) if b]
            mono = "*".join(factors)
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self):
        return f"WPPolynomial({self.n}, {self})"


def _to_mpf(x):
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


# ---------------------------------------------------------------------------
# per-tree weights


def gamma_coefficient(k: int) -> Fraction:
    """Rational part of gamma_k = (-1)^k pi^(2k-2) / (k-1)!."""
    return Fraction((-1) ** k, factorial(k - 1))


def times_coefficient(k: int) -> Fraction:
    """Rational part of t_k(L) = (2/k!) (L/2)^(2k), as a multiple of L^(2k)."""
    return Fraction(2, factorial(k) * 4**k)


def _monomial(n: int, coeff: Fraction, pi_power: int, boundary_degrees: Sequence[int]):
    key = (pi_power,) + tuple(d - 1 for d in boundary_degrees)
    return key, coeff


def _anti_weight_term(t: PlaneTree) -> tuple[Exponent, Fraction]:
    coeff = Fraction(1)
    pi_power = 0
    for v in t.inner_vertices:
        d = t.deg(v)
        if d < 3:
            raise TreeError(f"inner vertex of degree {d}")
        coeff *= Fraction(2) ** (d - 2) / factorial(d - 1) * gamma_coefficient(d - 1)
        pi_power += d - 2
    degs = [t.deg(b) for b in t.boundary_vertices]
    for d in degs:
        coeff *= Fraction(2) ** (d - 2) / factorial(d - 1) * times_coefficient(d - 1)
    return _monomial(t.n, coeff, pi_power, degs)


def anti_tree_weight(t: PlaneTree) -> WPPolynomial:
    """Monomial weight of an anti-Delaunay tree in the volume sum."""
    key, c = _anti_weight_term(t)
    return WPPolynomial(t.n, {key: c})


def _boundary_factor(degs: Sequence[int]) -> Fraction:
    out = Fraction(1)
    for d in degs:
        out *= Fraction(1, 4 ** (d - 1) * factorial(d - 1) ** 2)
    return out


def anti_polytope_volume(t: PlaneTree, edges: Iterable[int] = ()) -> WPPolynomial:
    """Volume of the product polytope of ``t`` with the edges ``edges`` anti-Delaunay."""
    tt = contract_edges(t, edges).tree
    coeff = Fraction(2) ** (t.n - 2)
    pi_power = 0
    for v in tt.inner_vertices:
        d = tt.deg(v)
        coeff /= factorial(2 * d - 4)
        pi_power += d - 2
    degs = [tt.deg(b) for b in tt.boundary_vertices]
    coeff *= _boundary_factor(degs)
    key, c = _monomial(t.n, coeff, pi_power, degs)
    return WPPolynomial(t.n, {key: c})


def _inner_forest(t: PlaneTree) -> tuple[int, list[tuple[int, int]]]:
    inner = list(t.inner_vertices)
    idx = {v: i for i, v in enumerate(inner)}
    edges = [(idx[a], idx[b]) for a, b in (t.edge_ends(e) for e in t.inner_edges())]
    return len(inner), edges


@lru_cache(maxsize=None)
def _alternating_component_sum(nv: int, edges: tuple[tuple[int, int], ...]) -> Fraction:
    """Sum over subsets A of edges of (-1)^|A| prod_C 1/(2|C|)! over components C."""
    total = Fraction(0)
    m = len(edges)
    for bits in range(1 << m):
        root = list(range(nv))

        def find(x):
            while root[x] != x:
                root[x] = root[root[x]]
                x = root[x]
            return x

        size = 0
        for j in range(m):
            if bits >> j & 1:
                a, b = edges[j]
                root[find(a)] = find(b)
                size += 1
        comp: dict[int, int] = defaultdict(int)
        for x in range(nv):
            comp[find(x)] += 1
        term = Fraction(1)
        for c in comp.values():
            term /= factorial(2 * c)
        total += -term if size % 2 else term
    return total


def _delaunay_volume_term(t: PlaneTree) -> tuple[Exponent, Fraction]:
    nv, edges = _inner_forest(t)
    # contracting a component of c trivalent vertices leaves degree c + 2,
    # i.e. a factor pi^(2c) / (2c)!; boundary degrees never change
    coeff = Fraction(2) ** (t.n - 2) * _alternating_component_sum(nv, tuple(sorted(edges)))
    degs = [t.deg(b) for b in t.boundary_vertices]
    coeff *= _boundary_factor(degs)
    return _monomial(t.n, coeff, nv, degs)


def delaunay_polytope_volume(t: PlaneTree, via_contraction: bool = False) -> WPPolynomial:
    """Volume of the Delaunay polytope of ``t`` by inclusion-exclusion.

    ``via_contraction=True`` contracts every subset explicitly instead of
    using component sizes.
    """
    if via_contraction:
        from .trees import inner_edge_subsets

        out = WPPolynomial.zero(t.n)
        for A in inner_edge_subsets(t):
            vol = anti_polytope_volume(t, A)
            out = out - vol if len(A) % 2 else out + vol
        return out
    key, c = _delaunay_volume_term(t)
    return WPPolynomial(t.n, {key: c})


ROUTES = ("anti", "inclusion_exclusion")


@lru_cache(maxsize=32)
def _route_terms(n: int, route: str) -> tuple[tuple[tuple[int, ...], Exponent, Fraction], ...]:
    # per-tree terms do not depend on which lengths vanish, so they are
    # computed once on the all-positive class and filtered per mask
    if route == "anti":
        trees, term = enumerate_anti(n), _anti_weight_term
    else:
        trees, term = enumerate_delaunay(n), _delaunay_volume_term
    return tuple((tuple(t.deg(b) for b in t.boundary_vertices),) + term(t) for t in trees)


def wp_volume(n: int, mask: CuspMask | Sequence[bool] | None = None, route: str = "anti") -> WPPolynomial:
    """Volume of the moduli space with one origin cusp and n boundaries.

    Lengths flagged in ``mask`` are set to zero.
    """
    mask = _as_mask(n, mask)
    if route == "ie":
        route = "inclusion_exclusion"
    if route not in ROUTES:
        raise ValueError(f"unknown route {route!r}")
    cusps = [b for b, f in enumerate(mask.flags) if f]
    acc: dict[Exponent, Fraction] = defaultdict(Fraction)
    for degs, key, c in _route_terms(n, route):
        if all(degs[b] == 1 for b in cusps):
            acc[key] += c
    return WPPolynomial(n, acc)
