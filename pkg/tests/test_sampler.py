import math

import numpy as np
import pytest

from wpspine.geometry import validate
from wpspine.sampler import (
    SampleConfig,
    SamplingError,
    ks_against_x1,
    rng_for,
    sample_D,
    sample_decorations,
    tree_probabilities,
    uniform_simplex,
)
from wpspine.trees import CuspMask, enumerate_delaunay
from wpspine.wp_poly import delaunay_polytope_volume, wp_volume


def test_config_validation():
    with pytest.raises(ValueError):
        SampleConfig(3, (0, 0), 10)
    with pytest.raises(ValueError):
        SampleConfig(3, (0, 0, 1), 0)
    with pytest.raises(ValueError):
        SampleConfig(3, (0, 0, -1), 10)


def test_uniform_simplex():
    x = uniform_simplex(rng_for(0, 0), 5000, 3, 2.0)
    assert np.allclose(x.sum(axis=1), 2.0)
    assert (x > 0).all()
    # each coordinate of a uniform point on the 2-simplex has mean scale/3
    assert np.allclose(x.mean(axis=0), 2 / 3, atol=0.03)


def test_tree_probabilities_follow_polytope_volumes():
    L = 1.5
    table = tree_probabilities(3, [0, 0, L])
    assert math.fsum(p for _, p in table) == pytest.approx(1.0)
    total = float(wp_volume(3).evaluate([0, 0, L]))
    assert sorted(p for _, p in table) == pytest.approx(sorted([L * L / 2 / total, math.pi**2 / total, math.pi**2 / total]))


def test_batches_are_in_the_polytope():
    rng = rng_for(1, 0)
    lengths = [0.0, 0.0, 1.0, 2.0]
    for t in enumerate_delaunay(4, CuspMask.from_lengths(lengths))[::3]:
        batch, proposals = sample_decorations(t, lengths, rng, 50)
        assert proposals >= 50
        for i in range(50):
            assert validate(t, batch.row(i), lengths)


def test_rejection_limit():
    t = max(enumerate_delaunay(6), key=lambda t: len(t.inner_edges()))
    with pytest.raises(SamplingError):
        sample_decorations(t, [0.0] * 6, rng_for(0, 0), 2000, max_rejections=0)


def test_results_do_not_depend_on_threads():
    base = dict(n=3, lengths=(0, 0, 1), sample_count=20_000, seed=3)
    one = sample_D(SampleConfig(**base, workers=1))
    two = sample_D(SampleConfig(**base, workers=2))
    assert np.array_equal(one.samples, two.samples)
    assert np.array_equal(one.counts, two.counts)
    other = sample_D(SampleConfig(**{**base, "seed": 4}, workers=1))
    assert not np.array_equal(one.samples, other.samples)


def test_stats_and_ks():
    stats = sample_D(SampleConfig(3, (0, 0, 1), 30_000, seed=11))
    assert stats.count == 30_000 == stats.counts.sum()
    assert abs(stats.moment(1)) < 4 * stats.standard_error(1)
    assert ks_against_x1(stats, 1.0) < 0.012
    rates = stats.acceptance_rates()
    assert all(0 < r <= 1 for r in rates.values())
    assert set(stats.summary()) == {"count", "moments", "acceptance_rates"}
    slim = sample_D(SampleConfig(3, (0, 0, 1), 100, seed=11), keep_samples=False)
    with pytest.raises(ValueError):
        ks_against_x1(slim, 1.0)


def test_first_two_boundaries_must_be_cusps():
    with pytest.raises(ValueError):
        sample_D(SampleConfig(3, (1, 0, 1), 10))


def _proposal_volume(t, lengths):
    """Lebesgue volume of the product of simplices, and the chart dimension."""
    vol, dim = (math.pi**2 / 2) ** len(t.inner_vertices), 2 * len(t.inner_vertices)
    for b in t.boundary_vertices:
        if lengths[b] > 0:
            k = t.deg(b)
            vol *= ((lengths[b] / 2) ** (k - 1) / math.factorial(k - 1)) ** 2
            dim += 2 * (k - 1)
    return vol, dim


def test_acceptance_rate_recovers_the_polytope_volume():
    # the polytope measure is 2^(dim/2) times Lebesgue measure in the (angle, w, v) chart
    lengths = [0.0, 0.0, 1.0, 0.0, 2.0]
    trees = [t for t in enumerate_delaunay(5, CuspMask.from_lengths(lengths)) if t.inner_edges()][::40]
    assert trees
    N = 40_000
    for i, t in enumerate(trees):
        _, proposals = sample_decorations(t, lengths, rng_for(5, i), N)
        p = N / proposals
        box, dim = _proposal_volume(t, lengths)
        exact = float(delaunay_polytope_volume(t).evaluate(lengths))
        se = math.sqrt((1 - p) / (p * proposals))
        assert abs(p * box * 2 ** (dim / 2) / exact - 1) < 4 * se + 1e-12
