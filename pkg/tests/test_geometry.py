import json
import math

import mpmath
import numpy as np
import pytest

from wpspine.acceptance import random_decorated_tree
from wpspine.geometry import (
    CORNER_SUM_SIGN,
    Decoration,
    GeometryError,
    distance_difference,
    hermite_sum,
    make_decoration,
    poisson_check,
    poisson_check_fd,
    shears,
    triangle_bracket,
    validate,
)
from wpspine.sampler import sample_decoration
from wpspine.trees import boundary_path, enumerate_delaunay, from_code

STAR = "b1(r(b2()b3()))"


def decorated(seed, count=20):
    rng = np.random.default_rng(seed)
    return [random_decorated_tree(rng) for _ in range(count)]


def test_sampled_decorations_are_valid():
    for t, d, lengths in decorated(1):
        assert validate(t, d, lengths), validate(t, d, lengths).message


def test_validation_messages():
    t = from_code(STAR)
    lengths = [0.0, 0.0, 2.0]
    d = sample_decoration(t, lengths, np.random.default_rng(0))
    bad = Decoration(d.angles * 1.1, d.w, d.v)
    assert "sum to" in validate(t, bad, lengths).message
    bad = Decoration(d.angles, d.w, (d.v[0], d.v[1], d.v[2] * 2))
    assert "sum of v" in validate(t, bad, lengths).message
    with pytest.raises(GeometryError):
        validate(t, d, [0.0, 0.0])
    with pytest.raises(GeometryError):
        validate(t, d, lengths, mode="other")


def test_anti_mode():
    (t, d, lengths) = next(x for x in decorated(2, 40) if x[0].inner_edges())
    e = t.inner_edges()[0]
    assert not validate(t, d, lengths, mode="anti", anti_edges=[e])
    assert validate(t, d, lengths, mode="anti")


def test_manual_decoration_and_json():
    t = from_code(STAR)
    hs = t.ccw[t.inner_vertices[0]]
    d = make_decoration(t, {hs[0]: 1.0, hs[1]: 1.0, hs[2]: math.pi - 2}, [[1.0], [1.0], [1.0]], [[], [], [1.0]])
    assert validate(t, d, [0, 0, 2])
    back = Decoration.from_json(json.loads(json.dumps(d.to_json())))
    assert np.array_equal(back.angles, d.angles)


def test_shear_constraints():
    for t, d, lengths in decorated(3):
        s = shears(t, d, lengths)
        assert np.allclose(s.edge, s.half[0::2] + s.half[1::2])
        for b in t.boundary_vertices:
            want = CORNER_SUM_SIGN * lengths[b]
            assert s.corner_sum(b) == pytest.approx(want, abs=1e-10)
        assert abs(s.origin_sum()) < 1e-10


def test_shears_reject_tiny_w():
    t = from_code(STAR)
    lengths = [0.0, 0.0, 2.0]
    d = sample_decoration(t, lengths, np.random.default_rng(0))
    w = (d.w[0], d.w[1], np.array([1e-14]))
    with pytest.raises(GeometryError):
        shears(t, Decoration(d.angles, w, d.v), lengths)


def test_bracket_targets_are_antisymmetric():
    t = enumerate_delaunay(4)[10]
    names, M = triangle_bracket(t)
    assert M.shape == (len(names), len(names))
    assert np.array_equal(M, -M.T)


def test_brackets_analytic_and_finite_difference():
    for t, d, lengths in decorated(4, 10):
        exact = poisson_check(t, d, lengths)
        fd = poisson_check_fd(t, d, lengths)
        assert exact.max_deviation < 1e-10
        # central differences carry O(step^2) and roundoff errors
        assert fd.max_deviation < 1e-5
        assert np.allclose(exact.computed, fd.computed, atol=1e-5)


def test_hermite_sum():
    rng = np.random.default_rng(5)
    phi = rng.uniform(0.1, 1.4, (1000, 2))
    assert np.allclose(hermite_sum(phi[:, 0], phi[:, 1]), 1.0, atol=1e-12)
    with mpmath.workdps(40):
        val = hermite_sum(mpmath.mpf("1e-6"), mpmath.mpf(2))
        assert abs(val - 1) < mpmath.mpf(10) ** -25


def test_distance_difference_is_antisymmetric():
    for t, d, lengths in decorated(6, 60):
        if lengths[0] or lengths[1] or t.deg(0) != 1 or t.deg(1) != 1:
            continue
        a = distance_difference(t, d, lengths, 1, 2)
        b = distance_difference(t, d, lengths, 2, 1)
        assert a == pytest.approx(-b, abs=1e-12)


def test_distance_difference_on_the_star():
    t = from_code(STAR)
    lengths = [0.0, 0.0, 2.0]
    d = sample_decoration(t, lengths, np.random.default_rng(9))
    (step,) = boundary_path(t, 1, 2).steps
    hs = t.ccw[step.vertex]
    want = math.log(math.sin(d.angles[hs[step.entrance]]) / math.sin(d.angles[hs[step.exit]]))
    assert distance_difference(t, d, lengths) == pytest.approx(want)


def test_distance_difference_needs_cusps():
    t = from_code(STAR)
    d = sample_decoration(t, [0.0, 1.0, 2.0], np.random.default_rng(0))
    with pytest.raises(GeometryError):
        distance_difference(t, d, [0.0, 1.0, 2.0])
