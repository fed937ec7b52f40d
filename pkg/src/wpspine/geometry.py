"""Decorations of plane trees, shear coordinates and distance differences.

A decoration of a tree stores

* ``angles[h]`` for every half-edge ``h`` (zero when ``h`` leaves a boundary vertex);
* ``w[b]`` and ``v[b]`` for every boundary vertex ``b``, indexed like ``ccw[b]``.
  ``v[b][j]`` belongs to the corner between ``ccw[b][j]`` and ``ccw[b][j+1]``.
  A cusp has ``w[b] == (1,)`` and empty ``v[b]``.

Array fields may carry leading batch axes; every formula here acts on the last
axis so that the sampler can evaluate many decorations at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import mpmath
import numpy as np

from .trees import PlaneTree, boundary_path

MIN_W = 1e-12
SUM_TOL = 1e-9
# calibrated on small trees: corner shears at a boundary of length L sum to
# CORNER_SUM_SIGN * L, and origin_sum() adds every arc with a plus sign
CORNER_SUM_SIGN = -1


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class Decoration:
    angles: np.ndarray
    w: tuple[np.ndarray, ...]
    v: tuple[np.ndarray, ...]

    def to_json(self) -> dict:
        return {
            "angles": self.angles.tolist(),
            "boundary_w": [x.tolist() for x in self.w],
            "boundary_v": [x.tolist() for x in self.v],
        }

    @classmethod
    def from_json(cls, data: dict) -> "Decoration":
        return cls(
            np.asarray(data["angles"], dtype=float),
            tuple(np.asarray(x, dtype=float) for x in data["boundary_w"]),
            tuple(np.asarray(x, dtype=float) for x in data["boundary_v"]),
        )

    def row(self, i: int) -> "Decoration":
        """One decoration out of a batch."""
        return Decoration(self.angles[i], tuple(x[i] for x in self.w), tuple(x[i] for x in self.v))


def make_decoration(t: PlaneTree, angles: dict[int, float] | Sequence[float], w, v) -> Decoration:
    """Build a decoration from plain Python data, filling boundary angles with 0."""
    ang = np.zeros(2 * t.num_edges)
    if isinstance(angles, dict):
        for h, a in angles.items():
            ang[h] = a
    else:
        ang[:] = angles
    return Decoration(ang, tuple(np.asarray(x, dtype=float) for x in w), tuple(np.asarray(x, dtype=float) for x in v))


@dataclass(frozen=True)
class Validation:
    ok: bool
    message: str = "ok"

    def __bool__(self):
        return self.ok


def validate(
    t: PlaneTree,
    d: Decoration,
    lengths: Sequence[float],
    mode: str = "delaunay",
    anti_edges: Iterable[int] = (),
) -> Validation:
    """Check membership of a single decoration in the tree's polytope.

    In ``mode="anti"`` the edges in ``anti_edges`` must violate the Delaunay
    inequality and all other edges are unconstrained.
    """
    if len(lengths) != t.n:
        raise GeometryError(f"expected {t.n} lengths")
    if d.angles.shape != (2 * t.num_edges,) or len(d.w) != t.n or len(d.v) != t.n:
        raise GeometryError("decoration shape does not match the tree")
    ang = d.angles
    for h in range(2 * t.num_edges):
        inner = t.is_inner(t.tail[h])
        if not inner and ang[h] != 0:
            return Validation(False, f"half-edge {h} leaves a boundary vertex but has angle {ang[h]}")
        if inner and not 0 < ang[h] < math.pi:
            return Validation(False, f"angle of half-edge {h} is {ang[h]}, outside (0, pi)")
    for v in t.inner_vertices:
        total = sum(ang[h] for h in t.ccw[v])
        if abs(total - math.pi) > SUM_TOL:
            return Validation(False, f"angles at inner vertex {v} sum to {total}")
    A = set(anti_edges)
    if mode not in ("delaunay", "anti"):
        raise GeometryError(f"unknown mode {mode!r}")
    for e in range(t.num_edges):
        s = ang[2 * e] + ang[2 * e + 1]
        if mode == "delaunay" and s >= math.pi:
            return Validation(False, f"Delaunay inequality fails on edge {e}: {s} >= pi")
        if mode == "anti" and e in A and s <= math.pi:
            return Validation(False, f"anti-Delaunay inequality fails on edge {e}: {s} <= pi")
    for b in t.boundary_vertices:
        k = t.deg(b)
        w, v, L = d.w[b], d.v[b], lengths[b]
        if len(w) != k:
            return Validation(False, f"boundary {b + 1} has {len(w)} w-entries for degree {k}")
        if L == 0:
            if len(v) != 0:
                return Validation(False, f"cusp {b + 1} carries v-entries")
            if abs(sum(w) - 1) > SUM_TOL or np.any(w <= 0):
                return Validation(False, f"cusp {b + 1} has w = {list(w)}, expected entries summing to 1")
            continue
        if len(v) != k:
            return Validation(False, f"boundary {b + 1} has {len(v)} v-entries for degree {k}")
        if np.any(w <= 0) or np.any(v <= 0):
            return Validation(False, f"boundary {b + 1} has non-positive simplex entries")
        for name, x in (("w", w), ("v", v)):
            if abs(sum(x) - L / 2) > SUM_TOL * max(1.0, L):
                return Validation(False, f"sum of {name} at boundary {b + 1} is {sum(x)}, expected {L / 2}")
    return Validation(True)


# ---------------------------------------------------------------------------
# shears


def _log_one_minus_exp_neg(w):
    # log(1 - e^-w)
    return np.log(-np.expm1(-w))


def _log_exp_minus_one(w):
    # log(e^w - 1)
    return np.log(np.expm1(w))


def _check_w(w):
    if np.any(np.asarray(w) < MIN_W):
        raise GeometryError(f"w-entry below {MIN_W}: logarithmic singularity")


@dataclass(frozen=True)
class ShearAssignment:
    half: np.ndarray  # per half-edge
    edge: np.ndarray  # per edge, half[2e] + half[2e+1]
    corner: dict[tuple[int, int], float] = field(default_factory=dict)

    def corner_sum(self, b: int) -> float:
        return math.fsum(z for (bb, _), z in self.corner.items() if bb == b)

    def origin_sum(self) -> float:
        """Shears of the arcs at the origin, edge arcs counted twice."""
        return 2 * math.fsum(self.edge) + math.fsum(self.corner.values())


def shears(t: PlaneTree, d: Decoration, lengths: Sequence[float]) -> ShearAssignment:
    half = np.zeros(2 * t.num_edges)
    for v in t.inner_vertices:
        hs = t.ccw[v]
        for j, h in enumerate(hs):
            a, b = d.angles[hs[(j + 1) % 3]], d.angles[hs[(j + 2) % 3]]
            half[h] = math.log(math.sin(a) / math.sin(b))
    corner = {}
    for b in t.boundary_vertices:
        hs = t.ccw[b]
        k = len(hs)
        w = np.asarray(d.w[b], dtype=float)
        if lengths[b] == 0:
            # cusp half-shears vanish by symmetry
            for j in range(k):
                corner[(b, j)] = math.log(w[j] / w[(j + 1) % k])
            continue
        _check_w(w)
        v = np.asarray(d.v[b], dtype=float)
        for j, h in enumerate(hs):
            half[h] = w[j]
            corner[(b, j)] = float(-v[j] + _log_one_minus_exp_neg(w[j]) - _log_exp_minus_one(w[(j + 1) % k]))
    edge = half[0::2] + half[1::2]
    return ShearAssignment(half, edge, corner)


# ---------------------------------------------------------------------------
# Poisson brackets


@dataclass(frozen=True)
class ShearTable:
    names: list[tuple]
    computed: np.ndarray
    target: np.ndarray

    @property
    def max_deviation(self) -> float:
        return float(np.max(np.abs(self.computed - self.target))) if self.names else 0.0


def shear_names(t: PlaneTree) -> list[tuple]:
    names = [("e", e) for e in range(t.num_edges)]
    names += [("c", b, j) for b in t.boundary_vertices for j in range(t.deg(b))]
    return names


def triangle_bracket(t: PlaneTree) -> tuple[list[tuple], np.ndarray]:
    """Bracket of shears read off the ideal triangles, 1/2 per cyclic pair.

    Each inner vertex contributes the triangle of its three edges; each
    boundary vertex contributes, for every incident edge, the triangle formed
    by that edge and its two neighbouring corners.
    """
    names = shear_names(t)
    index = {name: i for i, name in enumerate(names)}
    M = np.zeros((len(names), len(names)))
    triangles = []
    for v in t.inner_vertices:
        triangles.append(tuple(("e", h >> 1) for h in t.ccw[v]))
    for b in t.boundary_vertices:
        k = t.deg(b)
        for j, h in enumerate(t.ccw[b]):
            triangles.append((("c", b, (j - 1) % k), ("c", b, j), ("e", h >> 1)))
    for tri in triangles:
        for i in range(3):
            x, y = index[tri[i]], index[tri[(i + 1) % 3]]
            M[x, y] += 0.5
            M[y, x] -= 0.5
    return names, M


class _Ambient:
    """Ambient coordinates (all angles and simplex entries) with their bivector."""

    def __init__(self, t: PlaneTree, lengths: Sequence[float]):
        self.t = t
        self.lengths = lengths
        idx = {}
        for v in t.inner_vertices:
            for h in t.ccw[v]:
                idx[("phi", h)] = len(idx)
        for b in t.boundary_vertices:
            if lengths[b] == 0:
                continue
            for j in range(t.deg(b)):
                idx[("w", b, j)] = len(idx)
                idx[("v", b, j)] = len(idx)
        self.index = idx
        P = np.zeros((len(idx), len(idx)))

        def add(a, c, val=0.5):
            P[idx[a], idx[c]] += val
            P[idx[c], idx[a]] -= val

        for v in t.inner_vertices:
            hs = t.ccw[v]
            for j in range(3):
                add(("phi", hs[j]), ("phi", hs[(j + 1) % 3]))
        for b in t.boundary_vertices:
            if lengths[b] == 0:
                continue
            k = t.deg(b)
            for j in range(k):
                add(("w", b, j), ("v", b, j))
                add(("v", b, j), ("w", b, (j + 1) % k))
        self.P = P

    def gradients(self, d: Decoration) -> np.ndarray:
        """Rows: analytic gradients of every shear function."""
        t, idx = self.t, self.index
        names = shear_names(t)
        G = np.zeros((len(names), len(idx)))
        half_grad: dict[int, dict[int, float]] = {}
        for v in t.inner_vertices:
            hs = t.ccw[v]
            for j, h in enumerate(hs):
                a, b = hs[(j + 1) % 3], hs[(j + 2) % 3]
                half_grad[h] = {
                    idx[("phi", a)]: 1 / math.tan(d.angles[a]),
                    idx[("phi", b)]: -1 / math.tan(d.angles[b]),
                }
        for b in t.boundary_vertices:
            for j, h in enumerate(t.ccw[b]):
                half_grad[h] = {} if self.lengths[b] == 0 else {idx[("w", b, j)]: 1.0}
        row = 0
        for e in range(t.num_edges):
            for h in (2 * e, 2 * e + 1):
                for c, val in half_grad[h].items():
                    G[row, c] += val
            row += 1
        for b in t.boundary_vertices:
            k = t.deg(b)
            for j in range(k):
                if self.lengths[b] != 0:
                    w = d.w[b]
                    G[row, idx[("v", b, j)]] += -1.0
                    G[row, idx[("w", b, j)]] += 1 / math.expm1(w[j])
                    nxt = (j + 1) % k
                    G[row, idx[("w", b, nxt)]] += -1 / -math.expm1(-w[nxt])
                row += 1
        return G


def poisson_check(t: PlaneTree, d: Decoration, lengths: Sequence[float]) -> ShearTable:
    """Brackets of all pairs of shears from the polytope bivector, against the triangle targets."""
    amb = _Ambient(t, lengths)
    G = amb.gradients(d)
    names, target = triangle_bracket(t)
    return ShearTable(names, G @ amb.P @ G.T, target)


def _chart(t: PlaneTree, lengths: Sequence[float]):
    """Independent coordinates: two angles per inner vertex and deg-1 simplex entries."""
    coords = []
    for v in t.inner_vertices:
        coords += [("phi", h) for h in t.ccw[v][:2]]
    for b in t.boundary_vertices:
        if lengths[b] == 0:
            continue
        for j in range(t.deg(b) - 1):
            coords += [("w", b, j), ("v", b, j)]
    return coords


def _decoration_from_chart(t, lengths, coords, x, template: Decoration) -> Decoration:
    ang = template.angles.copy()
    w = [np.array(a, dtype=float) for a in template.w]
    v = [np.array(a, dtype=float) for a in template.v]
    for name, val in zip(coords, x):
        if name[0] == "phi":
            ang[name[1]] = val
        elif name[0] == "w":
            w[name[1]][name[2]] = val
        else:
            v[name[1]][name[2]] = val
    for vtx in t.inner_vertices:
        h0, h1, h2 = t.ccw[vtx]
        ang[h2] = math.pi - ang[h0] - ang[h1]
    for b in t.boundary_vertices:
        if lengths[b] == 0:
            continue
        w[b][-1] = lengths[b] / 2 - w[b][:-1].sum()
        v[b][-1] = lengths[b] / 2 - v[b][:-1].sum()
    return Decoration(ang, tuple(w), tuple(v))


def _shear_vector(t, d, lengths) -> np.ndarray:
    s = shears(t, d, lengths)
    return np.concatenate([s.edge, [s.corner[(b, j)] for b in t.boundary_vertices for j in range(t.deg(b))]])


def poisson_check_fd(t: PlaneTree, d: Decoration, lengths: Sequence[float], step: float = 1e-6) -> ShearTable:
    """Same brackets with central finite differences in the independent chart."""
    coords = _chart(t, lengths)
    amb = _Ambient(t, lengths)
    sub = [amb.index[c] for c in coords]
    P = amb.P[np.ix_(sub, sub)]
    x0 = np.array(
        [d.angles[c[1]] if c[0] == "phi" else (d.w if c[0] == "w" else d.v)[c[1]][c[2]] for c in coords]
    )
    names = shear_names(t)
    G = np.zeros((len(names), len(coords)))
    for i in range(len(coords)):
        xp, xm = x0.copy(), x0.copy()
        xp[i] += step
        xm[i] -= step
        fp = _shear_vector(t, _decoration_from_chart(t, lengths, coords, xp, d), lengths)
        fm = _shear_vector(t, _decoration_from_chart(t, lengths, coords, xm, d), lengths)
        G[:, i] = (fp - fm) / (2 * step)
    _, target = triangle_bracket(t)
    return ShearTable(names, G @ P @ G.T, target)


def hermite_sum(phi1, phi2):
    """``cot a cot b + cot b cot c + cot c cot a`` with ``c = pi - a - b``.

    Arrays are evaluated in double precision; mpmath numbers at the current
    working precision.
    """
    if isinstance(phi1, mpmath.mpf):
        phi3 = mpmath.pi - phi1 - phi2
        c1, c2, c3 = mpmath.cot(phi1), mpmath.cot(phi2), mpmath.cot(phi3)
        return c1 * c2 + c2 * c3 + c3 * c1
    phi3 = np.pi - phi1 - phi2
    c1, c2, c3 = 1 / np.tan(phi1), 1 / np.tan(phi2), 1 / np.tan(phi3)
    return c1 * c2 + c2 * c3 + c3 * c1


# ---------------------------------------------------------------------------
# distances


def distance_difference(t: PlaneTree, d: Decoration, lengths: Sequence[float], i: int = 1, j: int = 2):
    """``d_first - d_last`` along the path between boundary labels ``i`` and ``j``.

    Works on single decorations and on batches.
    """
    for lab in (i, j):
        if lengths[lab - 1] != 0 or t.deg(lab - 1) != 1:
            raise GeometryError(f"boundary {lab} must be a cusp of degree 1")
    path = boundary_path(t, i, j)
    total = np.zeros(d.angles.shape[:-1])
    for step in path.steps:
        x = step.vertex
        hs = t.ccw[x]
        if t.is_inner(x):
            total = total + np.log(np.sin(d.angles[..., hs[step.entrance]]))
            total = total - np.log(np.sin(d.angles[..., hs[step.exit]]))
            continue
        k = len(hs)
        w, v = d.w[x], d.v[x]
        _check_w(w)
        m = step.entrance
        while m != step.exit:
            nxt = (m + 1) % k
            total = total - (v[..., m] - _log_exp_minus_one(w[..., m]) + _log_one_minus_exp_neg(w[..., nxt]))
            m = nxt
    return total if total.ndim else float(total)
