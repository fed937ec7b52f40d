"""Bicolored plane trees with labelled boundary vertices.

Vertices ``0..n-1`` are the boundary (white) vertices, vertex ``b`` carrying the
label ``b + 1``.  Vertices ``n, n+1, ...`` are the inner (red) vertices.  Edges
are oriented in pairs: half-edge ``2k`` and its reverse ``2k + 1 == 2k ^ 1``.
``ccw[v]`` lists the half-edges leaving ``v`` in counterclockwise order.

Every tree built by this module is in canonical form: a depth-first traversal
from the boundary vertex labelled 1, started at the rotation giving the
smallest code, numbers the inner vertices and edges in visiting order.  Two
trees are equal as plane trees exactly when their codes are equal.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from itertools import combinations
from math import comb
from typing import Iterable, Sequence


class TreeError(ValueError):
    pass


@dataclass(frozen=True)
class CuspMask:
    """``flags[i]`` is true when boundary ``i + 1`` is a cusp (zero length)."""

    flags: tuple[bool, ...]

    def __post_init__(self):
        object.__setattr__(self, "flags", tuple(bool(f) for f in self.flags))
        if len(self.flags) < 2:
            raise TreeError("a cusp mask needs at least two entries")

    @property
    def n(self) -> int:
        return len(self.flags)

    @classmethod
    def from_lengths(cls, lengths: Sequence[float]) -> "CuspMask":
        return cls(tuple(x == 0 for x in lengths))

    @classmethod
    def from_bits(cls, bits: str) -> "CuspMask":
        """Parse a string such as ``"110"`` (1 marks a cusp)."""
        if not bits or set(bits) - {"0", "1"}:
            raise TreeError(f"bad cusp bitmask {bits!r}")
        return cls(tuple(c == "1" for c in bits))

    @classmethod
    def none(cls, n: int) -> "CuspMask":
        return cls((False,) * n)

    def bits(self) -> str:
        return "".join("1" if f else "0" for f in self.flags)


def _as_mask(n: int, mask: CuspMask | Sequence[bool] | None) -> CuspMask:
    if n < 2:
        raise TreeError("trees need n >= 2 boundary vertices")
    if mask is None:
        return CuspMask.none(n)
    if not isinstance(mask, CuspMask):
        mask = CuspMask(tuple(mask))
    if mask.n != n:
        raise TreeError(f"cusp mask has {mask.n} entries, expected {n}")
    return mask


@dataclass(frozen=True)
class PathStep:
    """An intermediate vertex on a boundary-to-boundary path.

    ``entrance`` and ``exit`` are positions in ``ccw[vertex]`` of the half-edges
    leaving the vertex back along the path and forward along it.
    """

    vertex: int
    entrance: int
    exit: int


@dataclass(frozen=True)
class BoundaryPath:
    start: int
    end: int
    half_edges: tuple[int, ...]
    steps: tuple[PathStep, ...]

    def __len__(self) -> int:
        return len(self.half_edges)


@dataclass(frozen=True, eq=False)
class PlaneTree:
    n: int
    ccw: tuple[tuple[int, ...], ...]
    code: str = field(default="", compare=False)

    def __eq__(self, other):
        return isinstance(other, PlaneTree) and self.code == other.code

    def __hash__(self):
        return hash(self.code)

    def __repr__(self):
        return f"PlaneTree({self.code})"

    @property
    def num_vertices(self) -> int:
        return len(self.ccw)

    @property
    def num_edges(self) -> int:
        return self.num_vertices - 1

    @property
    def inner_vertices(self) -> range:
        return range(self.n, self.num_vertices)

    @property
    def boundary_vertices(self) -> range:
        return range(self.n)

    def is_inner(self, v: int) -> bool:
        return v >= self.n

    def label(self, v: int) -> int:
        """Boundary label of ``v`` (1-based), or 0 for inner vertices."""
        return v + 1 if v < self.n else 0

    def deg(self, v: int) -> int:
        return len(self.ccw[v])

    @cached_property
    def tail(self) -> tuple[int, ...]:
        out = [0] * (2 * self.num_edges)
        for v, hs in enumerate(self.ccw):
            for h in hs:
                out[h] = v
        return tuple(out)

    @cached_property
    def position(self) -> tuple[int, ...]:
        """Index of each half-edge within the ccw list of its tail."""
        out = [0] * (2 * self.num_edges)
        for hs in self.ccw:
            for j, h in enumerate(hs):
                out[h] = j
        return tuple(out)

    def head(self, h: int) -> int:
        return self.tail[h ^ 1]

    def edge_ends(self, e: int) -> tuple[int, int]:
        return self.tail[2 * e], self.tail[2 * e + 1]

    def inner_edges(self) -> list[int]:
        """Edges whose both endpoints are inner vertices."""
        return [
            e
            for e in range(self.num_edges)
            if self.is_inner(self.tail[2 * e]) and self.is_inner(self.tail[2 * e + 1])
        ]

    def degree_identity(self) -> int:
        return sum(2 - len(hs) for hs in self.ccw)

    def is_delaunay_class(self, mask: CuspMask) -> bool:
        return all(self.deg(v) == 3 for v in self.inner_vertices) and all(
            self.deg(b) == 1 for b in self.boundary_vertices if mask.flags[b]
        )

    def is_anti_class(self, mask: CuspMask) -> bool:
        return all(self.deg(v) >= 3 for v in self.inner_vertices) and all(
            self.deg(b) == 1 for b in self.boundary_vertices if mask.flags[b]
        )

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "inner": [{"deg": self.deg(v)} for v in self.inner_vertices],
            "boundary": [{"label": b + 1, "deg": self.deg(b)} for b in self.boundary_vertices],
            "ccw_orders": [list(hs) for hs in self.ccw],
            "code": self.code,
        }

    @classmethod
    def from_json(cls, data: dict) -> "PlaneTree":
        tree = from_code(data["code"])
        if tree.n != data["n"] or [list(hs) for hs in tree.ccw] != data["ccw_orders"]:
            raise TreeError("tree record is inconsistent with its code")
        return tree


# ---------------------------------------------------------------------------
# canonical form


def _node_code(ccw, n, v, children) -> str:
    token = f"b{v + 1}" if v < n else "r"
    return token + "(" + "".join(children) + ")"


def _rooted_code(ccw, tail, n, v, back) -> str:
    hs = ccw[v]
    p = hs.index(back)
    kids = hs[p + 1 :] + hs[:p]
    return _node_code(ccw, n, v, [_rooted_code(ccw, tail, n, tail[h ^ 1], h ^ 1) for h in kids])


def _canonicalize(n, ccw, tail) -> tuple[PlaneTree, dict[int, int]]:
    """Return the canonical tree and the map old half-edge -> new half-edge."""
    root = ccw[0]
    best = None
    for s in range(len(root)):
        kids = root[s:] + root[:s]
        code = _node_code(ccw, n, 0, [_rooted_code(ccw, tail, n, tail[h ^ 1], h ^ 1) for h in kids])
        if best is None or code < best[0]:
            best = (code, s)
    code, s = best
    new_ccw: list[list[int]] = [[] for _ in range(len(ccw))]
    hmap: dict[int, int] = {}
    next_inner = n
    next_edge = 0
    # iterative DFS keeps preorder numbering
    stack = [(0, list(root[s:] + root[:s]), None)]
    vmap = {0: 0}
    while stack:
        v, kids, _ = stack[-1]
        if not kids:
            stack.pop()
            continue
        h = kids.pop(0)
        w = tail[h ^ 1]
        if w < n:
            nw = w
        else:
            nw = next_inner
            next_inner += 1
        vmap[w] = nw
        k = next_edge
        next_edge += 1
        hmap[h] = 2 * k
        hmap[h ^ 1] = 2 * k + 1
        new_ccw[vmap[v]].append(2 * k)
        new_ccw[nw].append(2 * k + 1)
        hs = ccw[w]
        p = hs.index(h ^ 1)
        stack.append((w, list(hs[p + 1 :] + hs[:p]), h))
    tree = PlaneTree(n, tuple(tuple(hs) for hs in new_ccw), code)
    return tree, hmap


def build_tree(n: int, ccw: Sequence[Sequence[int]]) -> tuple[PlaneTree, dict[int, int]]:
    """Canonicalize an arbitrary tree given by ccw half-edge lists.

    Vertices ``0..n-1`` must be the boundary vertices and the half-edges must
    pair up as ``h`` / ``h ^ 1``.  Returns the tree and the half-edge relabelling.
    """
    ccw = tuple(tuple(hs) for hs in ccw)
    seen = sorted(h for hs in ccw for h in hs)
    nedges = len(ccw) - 1
    if len(seen) != 2 * nedges or len(set(seen)) != len(seen):
        raise TreeError("half-edge lists do not describe a tree")
    ids = {h: i for i, h in enumerate(sorted({h & ~1 for h in seen}))}
    relabel = {h: 2 * ids[h & ~1] + (h & 1) for h in seen}
    if any((h ^ 1) not in relabel for h in seen):
        raise TreeError("unpaired half-edge")
    dense = tuple(tuple(relabel[h] for h in hs) for hs in ccw)
    tail = [0] * (2 * nedges)
    for v, hs in enumerate(dense):
        for h in hs:
            tail[h] = v
    if any(len(hs) == 0 for hs in dense):
        raise TreeError("isolated vertex")
    tree, hmap = _canonicalize(n, dense, tail)
    if len(hmap) != 2 * nedges:
        raise TreeError("graph is not connected")
    return tree, {h: hmap[relabel[h]] for h in seen}


_TOKEN = re.compile(r"b(\d+)\(|r\(|\)")


def from_code(code: str, check: bool = True) -> PlaneTree:
    """Rebuild a tree from its canonical code.

    With ``check=False`` the code is trusted to be canonical.
    """
    labels: list[int] = []
    parent: list[int] = []
    stack: list[int] = []
    pos = 0
    for m in _TOKEN.finditer(code):
        if m.start() != pos:
            raise TreeError(f"malformed tree code {code!r}")
        pos = m.end()
        if m.group(0) == ")":
            if not stack:
                raise TreeError(f"malformed tree code {code!r}")
            stack.pop()
            continue
        labels.append(int(m.group(1)) if m.group(1) else 0)
        parent.append(stack[-1] if stack else -1)
        stack.append(len(labels) - 1)
    if pos != len(code) or stack or not labels or labels[0] != 1:
        raise TreeError(f"malformed tree code {code!r}")
    n = sum(1 for x in labels if x)
    if sorted(x for x in labels if x) != list(range(1, n + 1)):
        raise TreeError(f"labels in {code!r} are not 1..n")
    vid = []
    nxt = n
    for x in labels:
        if x:
            vid.append(x - 1)
        else:
            vid.append(nxt)
            nxt += 1
    ccw: list[list[int]] = [[] for _ in range(len(labels))]
    for i in range(1, len(labels)):
        k = i - 1
        ccw[vid[parent[i]]].append(2 * k)
        ccw[vid[i]].append(2 * k + 1)
    tree = PlaneTree(n, tuple(tuple(hs) for hs in ccw), code)
    if check and build_tree(n, ccw)[0].code != code:
        raise TreeError(f"{code!r} is not in canonical form")
    return tree


def canonical_code(t: PlaneTree) -> bytes:
    return t.code.encode("ascii")


# ---------------------------------------------------------------------------
# enumeration


def _enumerate_codes(n: int, cusp: tuple[bool, ...], max_inner_children: int | None) -> list[str]:
    """Codes of all trees with the given cusps.

    Inner vertices have at least two children; ``max_inner_children=2`` gives
    trivalent inner vertices.
    """

    @lru_cache(maxsize=None)
    def planted(mask: int) -> tuple[str, ...]:
        out = []
        bits = [i for i in range(n) if mask >> i & 1]
        for b in bits:
            rest = mask & ~(1 << b)
            if rest == 0:
                out.append(f"b{b + 1}()")
            elif not cusp[b]:
                for seq in sequences(rest):
                    out.append(f"b{b + 1}(" + "".join(seq) + ")")
        for seq in split(mask):
            if max_inner_children is None or len(seq) <= max_inner_children:
                out.append("r(" + "".join(seq) + ")")
        return tuple(out)

    @lru_cache(maxsize=None)
    def split(mask: int) -> tuple[tuple[str, ...], ...]:
        # ordered sequences of at least two planted trees partitioning mask
        out = []
        sub = (mask - 1) & mask
        while sub:
            heads = planted(sub)
            tails = sequences(mask & ~sub)
            out.extend((h,) + t for h in heads for t in tails)
            sub = (sub - 1) & mask
        return tuple(out)

    @lru_cache(maxsize=None)
    def sequences(mask: int) -> tuple[tuple[str, ...], ...]:
        # ordered sequences of planted trees partitioning mask
        return tuple((h,) for h in planted(mask)) + split(mask)

    full = (1 << n) - 1
    codes = set()
    for seq in sequences(full & ~1):
        if cusp[0] and len(seq) != 1:
            continue
        rots = ["b1(" + "".join(seq[s:] + seq[:s]) + ")" for s in range(len(seq))]
        if rots[0] == min(rots):
            codes.add(rots[0])
    return sorted(codes)


@lru_cache(maxsize=16)
def _all_trees(n: int, trivalent: bool) -> tuple[PlaneTree, ...]:
    codes = _enumerate_codes(n, (False,) * n, 2 if trivalent else None)
    return tuple(from_code(c, check=False) for c in codes)


def _cusps_are_leaves(t: PlaneTree, mask: CuspMask) -> bool:
    return all(len(t.ccw[b]) == 1 for b, f in enumerate(mask.flags) if f)


def enumerate_delaunay(n: int, mask: CuspMask | Sequence[bool] | None = None) -> list[PlaneTree]:
    """Trees with trivalent inner vertices and cusps of degree one.

    A cusp only restricts its own degree, so each class is the all-positive
    class filtered by that degree condition.
    """
    mask = _as_mask(n, mask)
    return [t for t in _all_trees(n, True) if _cusps_are_leaves(t, mask)]


def enumerate_anti(n: int, mask: CuspMask | Sequence[bool] | None = None) -> list[PlaneTree]:
    """Trees with inner vertices of degree at least three and cusps of degree one."""
    mask = _as_mask(n, mask)
    return [t for t in _all_trees(n, False) if _cusps_are_leaves(t, mask)]


def generate_codes(n: int, mask: CuspMask | Sequence[bool] | None = None, anti: bool = False) -> list[str]:
    """Codes generated directly with the cusp degrees pruned during recursion."""
    mask = _as_mask(n, mask)
    return _enumerate_codes(n, mask.flags, None if anti else 2)


# ---------------------------------------------------------------------------
# contraction and paths


@dataclass(frozen=True)
class Contraction:
    """Result of contracting inner-inner edges.

    ``groups[v]`` lists the original inner vertices merged into the inner
    vertex ``v`` of ``tree`` (keyed by new vertex id) and ``half_edges`` maps
    every surviving original half-edge to its id in ``tree``.
    """

    tree: PlaneTree
    groups: dict[int, tuple[int, ...]]
    half_edges: dict[int, int]

    def leaves(self, v: int) -> int:
        """Leaf count of the contracted subtree behind ``v``: its degree."""
        return self.tree.deg(v)


def contract_edges(t: PlaneTree, edges: Iterable[int]) -> Contraction:
    A = frozenset(edges)
    for e in A:
        if not 0 <= e < t.num_edges:
            raise TreeError(f"no edge {e}")
        a, b = t.edge_ends(e)
        if not (t.is_inner(a) and t.is_inner(b)):
            raise TreeError(f"edge {e} touches a boundary vertex and cannot be contracted")
    # union-find over vertices
    root = list(range(t.num_vertices))

    def find(x):
        while root[x] != x:
            root[x] = root[root[x]]
            x = root[x]
        return x

    for e in A:
        a, b = t.edge_ends(e)
        root[find(a)] = find(b)

    def ccw_next(h):
        hs = t.ccw[t.tail[h]]
        return hs[(t.position[h] + 1) % len(hs)]

    reps = sorted({find(v) for v in range(t.num_vertices)}, key=lambda r: (r >= t.n, r))
    index = {r: i for i, r in enumerate(reps)}
    new_ccw: list[list[int]] = [[] for _ in reps]
    for r in reps:
        members = [v for v in range(t.num_vertices) if find(v) == r]
        start = next((h for v in members for h in t.ccw[v] if h >> 1 not in A), None)
        order = []
        h = start
        while True:
            order.append(h)
            h = ccw_next(h)
            while h >> 1 in A:
                h = ccw_next(h ^ 1)
            if h == start:
                break
        new_ccw[index[r]] = order
    tree, hmap = build_tree(t.n, new_ccw)
    # recover where each old group landed
    groups: dict[int, tuple[int, ...]] = {}
    for r in reps:
        if r < t.n:
            continue
        members = tuple(v for v in range(t.num_vertices) if find(v) == r)
        h = new_ccw[index[r]][0]
        groups[tree.tail[hmap[h]]] = members
    return Contraction(tree, groups, hmap)


def boundary_path(t: PlaneTree, i: int, j: int) -> BoundaryPath:
    """The simple path from boundary label ``i`` to boundary label ``j``."""
    if i == j or not (1 <= i <= t.n and 1 <= j <= t.n):
        raise TreeError(f"need two distinct labels in 1..{t.n}")
    src, dst = i - 1, j - 1
    via = {src: None}
    queue = [src]
    for v in queue:
        for h in t.ccw[v]:
            w = t.head(h)
            if w not in via:
                via[w] = h
                queue.append(w)
    hs = []
    v = dst
    while via[v] is not None:
        hs.append(via[v])
        v = t.tail[via[v]]
    hs.reverse()
    steps = tuple(
        PathStep(t.head(a), t.position[a ^ 1], t.position[b]) for a, b in zip(hs, hs[1:])
    )
    return BoundaryPath(i, j, tuple(hs), steps)


def catalan(k: int) -> int:
    return comb(2 * k, k) // (k + 1)


def inner_edge_subsets(t: PlaneTree) -> Iterable[tuple[int, ...]]:
    edges = t.inner_edges()
    for r in range(len(edges) + 1):
        yield from combinations(edges, r)


def preimage_counts(n: int, mask: CuspMask | Sequence[bool] | None = None) -> dict[str, tuple[int, int]]:
    """Per tree of the anti class: pairs ``(t, A)`` contracting onto it, and the Catalan product.

    ``t`` runs over the trivalent class and ``A`` over subsets of its
    inner-inner edges.
    """
    mask = _as_mask(n, mask)
    counts = {t.code: 0 for t in enumerate_anti(n, mask)}
    for t in enumerate_delaunay(n, mask):
        for A in inner_edge_subsets(t):
            code = contract_edges(t, A).tree.code
            if code not in counts:
                raise TreeError(f"contraction left the anti class: {code}")
            counts[code] += 1
    out = {}
    for t in enumerate_anti(n, mask):
        expected = 1
        for v in t.inner_vertices:
            expected *= catalan(t.deg(v) - 2)
        out[t.code] = (counts[t.code], expected)
    return out
