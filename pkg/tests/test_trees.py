import itertools
import json
import random

import pytest

from wpspine.trees import (
    CuspMask,
    TreeError,
    boundary_path,
    build_tree,
    canonical_code,
    catalan,
    contract_edges,
    enumerate_anti,
    enumerate_delaunay,
    from_code,
    generate_codes,
    preimage_counts,
    PlaneTree,
)

STAR = "b1(r(b2()b3()))"
STAR_FLIPPED = "b1(r(b3()b2()))"
PATH_132 = "b1(b3(b2()))"


def masks(n):
    for bits in itertools.product("01", repeat=n):
        yield CuspMask.from_bits("".join(bits))


def test_two_boundaries_have_one_tree_for_every_mask():
    for mask in masks(2):
        assert len(enumerate_delaunay(2, mask)) == 1
        assert len(enumerate_anti(2, mask)) == 1


def test_three_boundaries_all_positive_gives_five_trees():
    codes = {t.code for t in enumerate_anti(3)}
    assert len(codes) == 5
    assert {STAR, STAR_FLIPPED, PATH_132} <= codes


def test_two_cusps_out_of_three_leave_three_trees():
    found = enumerate_delaunay(3, CuspMask.from_bits("110"))
    assert len(found) == 3


@pytest.mark.parametrize(
    "n, delaunay, anti",
    [(2, 1, 1), (3, 5, 5), (4, 56, 62), (5, 990, 1254)],
)
def test_class_sizes(n, delaunay, anti):
    assert len(enumerate_delaunay(n)) == delaunay
    assert len(enumerate_anti(n)) == anti


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_degree_sum_identity(n):
    for t in enumerate_anti(n):
        assert t.degree_identity() == 2
        assert sum(t.deg(v) for v in range(t.num_vertices)) == 2 * t.num_edges


@pytest.mark.parametrize("n", [3, 4, 5])
def test_delaunay_class_inside_anti_class(n):
    for mask in masks(n):
        d = {t.code for t in enumerate_delaunay(n, mask)}
        a = {t.code for t in enumerate_anti(n, mask)}
        assert d <= a


@pytest.mark.parametrize("n", [2, 3, 4])
def test_filtering_matches_pruned_generation(n):
    for mask in masks(n):
        assert sorted(t.code for t in enumerate_delaunay(n, mask)) == sorted(generate_codes(n, mask))
        assert sorted(t.code for t in enumerate_anti(n, mask)) == sorted(generate_codes(n, mask, anti=True))


def test_membership_predicates_agree_with_enumeration():
    for mask in masks(4):
        for t in enumerate_anti(4):
            assert t.is_anti_class(mask) == (t in set(enumerate_anti(4, mask)))
            assert t.is_delaunay_class(mask) == (t in set(enumerate_delaunay(4, mask)))


def _shuffled(t: PlaneTree, rng: random.Random):
    """Same plane tree with half-edge ids permuted and every ccw list rotated."""
    perm = list(range(t.num_edges))
    rng.shuffle(perm)
    flip = [rng.random() < 0.5 for _ in perm]
    relabel = {}
    for e, f in enumerate(perm):
        a, b = 2 * f, 2 * f + 1
        if flip[e]:
            a, b = b, a
        relabel[2 * e], relabel[2 * e + 1] = a, b
    ccw = []
    for hs in t.ccw:
        k = rng.randrange(len(hs))
        ccw.append([relabel[h] for h in hs[k:] + hs[:k]])
    return ccw


def test_code_ignores_starting_point_and_half_edge_names():
    rng = random.Random(7)
    for t in enumerate_anti(5)[::37]:
        for _ in range(3):
            other, _ = build_tree(t.n, _shuffled(t, rng))
            assert canonical_code(other) == canonical_code(t)


def test_cyclic_orders_of_the_star_are_distinct():
    assert canonical_code(from_code(STAR)) != canonical_code(from_code(STAR_FLIPPED))
    assert isinstance(canonical_code(from_code(STAR)), bytes)


def test_from_code_round_trip_and_errors():
    for t in enumerate_anti(4):
        assert from_code(t.code) == t
    with pytest.raises(TreeError):
        from_code("b1(r(b2()")
    with pytest.raises(TreeError):
        from_code("b2(b1())")
    # a degree-2 root has two rotations; exactly one spelling is canonical
    spellings = ["b1(b2()b3())", "b1(b3()b2())"]
    ok = []
    for code in spellings:
        try:
            from_code(code)
            ok.append(code)
        except TreeError:
            pass
    assert len(ok) == 1
    other = from_code(next(c for c in spellings if c not in ok), check=False)
    assert build_tree(other.n, other.ccw)[0].code == ok[0]


def test_json_round_trip():
    for t in enumerate_anti(4)[:10]:
        data = json.loads(json.dumps(t.to_json()))
        assert PlaneTree.from_json(data) == t
    bad = from_code(STAR).to_json()
    bad["ccw_orders"][0] = [5]
    with pytest.raises(TreeError):
        PlaneTree.from_json(bad)


def test_mask_parsing():
    assert CuspMask.from_bits("101").flags == (True, False, True)
    assert CuspMask.from_lengths([0, 1.5, 0]).bits() == "101"
    with pytest.raises(TreeError):
        CuspMask.from_bits("12")
    with pytest.raises(TreeError):
        enumerate_delaunay(3, CuspMask.from_bits("10"))


def test_contracting_nothing_is_the_identity():
    for t in enumerate_delaunay(4):
        c = contract_edges(t, ())
        assert c.tree == t


def test_caterpillar_contracts_to_a_degree_four_vertex():
    cat = next(t for t in enumerate_delaunay(4) if len(t.inner_edges()) == 1)
    c = contract_edges(cat, cat.inner_edges())
    assert [c.tree.deg(v) for v in c.tree.inner_vertices] == [4]
    (members,) = c.groups.values()
    assert len(members) == 2


def test_boundary_edges_cannot_be_contracted():
    t = from_code(STAR)
    with pytest.raises(TreeError):
        contract_edges(t, [0])


@pytest.mark.parametrize("n", [3, 4, 5])
def test_contractions_stay_in_the_anti_class(n):
    for mask in list(masks(n))[:: max(1, 2 ** n // 6)]:
        anti = set(enumerate_anti(n, mask))
        for t in enumerate_delaunay(n, mask)[:200]:
            for A in itertools.chain.from_iterable(itertools.combinations(t.inner_edges(), r) for r in range(3)):
                assert contract_edges(t, A).tree in anti


def test_catalan_numbers():
    assert [catalan(k) for k in range(7)] == [1, 1, 2, 5, 14, 42, 132]


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_preimage_count_is_a_catalan_product(n):
    for mask in (None, CuspMask((True, True) + (False,) * (n - 2))):
        for got, want in preimage_counts(n, mask).values():
            assert got == want


def test_single_edge_path():
    (t,) = enumerate_delaunay(2)
    p = boundary_path(t, 1, 2)
    assert len(p) == 1 and p.steps == ()


def test_star_path_goes_through_the_inner_vertex():
    t = from_code(STAR)
    p = boundary_path(t, 1, 2)
    assert len(p) == 2
    (step,) = p.steps
    assert t.is_inner(step.vertex)
    assert step.entrance != step.exit


def test_path_through_a_boundary_vertex_records_its_edges():
    t = from_code(PATH_132)
    p = boundary_path(t, 1, 2)
    (step,) = p.steps
    assert step.vertex == 2  # label 3
    assert t.ccw[2][step.entrance] ^ 1 == p.half_edges[0]
    assert t.ccw[2][step.exit] == p.half_edges[1]


def test_path_needs_distinct_labels():
    with pytest.raises(TreeError):
        boundary_path(from_code(STAR), 2, 2)
