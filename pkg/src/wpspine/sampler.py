"""Monte Carlo sampling of random surfaces through their decorated spines.

A sample is a tree drawn with probability proportional to the volume of its
Delaunay polytope, then a uniform point of that polytope obtained by
rejection from the product of simplices.

Randomness is counter based: chunk ``c`` of a run with seed ``s`` uses a
Philox stream keyed by ``(s, c)``, so results do not depend on how chunks are
spread over threads.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats as sps

from .density import X1Distribution
from .geometry import Decoration, distance_difference
from .trees import CuspMask, PlaneTree, enumerate_delaunay
from .wp_poly import delaunay_polytope_volume

CHUNK = 8192
BIN_WIDTH = 0.05


class SamplingError(RuntimeError):
    pass


@dataclass(frozen=True)
class SampleConfig:
    n: int
    lengths: tuple[float, ...]
    sample_count: int
    seed: int = 0
    max_rejections: int = 10_000
    hist_range: float = 20.0
    bin_width: float = BIN_WIDTH
    workers: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "lengths", tuple(float(x) for x in self.lengths))
        if len(self.lengths) != self.n:
            raise ValueError(f"expected {self.n} lengths")
        if self.sample_count < 1:
            raise ValueError("sample_count must be positive")
        if any(x < 0 for x in self.lengths):
            raise ValueError("lengths must be non-negative")


def rng_for(seed: int, stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, stream])))


def default_workers() -> int:
    env = os.environ.get("WPSPINE_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def tree_probabilities(n: int, lengths: Sequence[float]) -> list[tuple[PlaneTree, float]]:
    mask = CuspMask.from_lengths(lengths)
    trees = enumerate_delaunay(n, mask)
    weights = [float(delaunay_polytope_volume(t).evaluate(list(lengths))) for t in trees]
    total = math.fsum(weights)
    return [(t, w / total) for t, w in zip(trees, weights) if w > 0]


def uniform_simplex(rng: np.random.Generator, size: int, dim: int, scale: float) -> np.ndarray:
    """Uniform points of ``{x_i > 0, sum x_i = scale}`` via normalised exponentials."""
    e = rng.standard_exponential((size, dim))
    return scale * e / e.sum(axis=1, keepdims=True)


def _propose_angles(t: PlaneTree, rng, size: int) -> np.ndarray:
    ang = np.zeros((size, 2 * t.num_edges))
    for v in t.inner_vertices:
        ang[:, list(t.ccw[v])] = uniform_simplex(rng, size, 3, math.pi)
    return ang


def _delaunay_ok(t: PlaneTree, ang: np.ndarray) -> np.ndarray:
    ok = np.ones(len(ang), dtype=bool)
    for e in t.inner_edges():
        ok &= ang[:, 2 * e] + ang[:, 2 * e + 1] < math.pi
    return ok


def sample_decorations(
    t: PlaneTree,
    lengths: Sequence[float],
    rng: np.random.Generator,
    size: int,
    max_rejections: int = 10_000,
) -> tuple[Decoration, int]:
    """``size`` independent uniform points of the tree's Delaunay polytope.

    Returns the batch and the number of angle proposals used.
    """
    ang = _propose_angles(t, rng, size)
    proposals = size
    bad = ~_delaunay_ok(t, ang)
    rounds = 0
    while bad.any():
        rounds += 1
        if rounds > max_rejections:
            rate = (proposals - int(bad.sum())) / proposals
            raise SamplingError(f"rejection limit reached; acceptance estimate {rate:.3g}")
        idx = np.flatnonzero(bad)
        ang[idx] = _propose_angles(t, rng, len(idx))
        proposals += len(idx)
        bad[idx] = ~_delaunay_ok(t, ang[idx])
    w, v = [], []
    for b in t.boundary_vertices:
        k, L = t.deg(b), lengths[b]
        if L == 0:
            w.append(np.ones((size, k)))
            v.append(np.zeros((size, 0)))
        else:
            w.append(uniform_simplex(rng, size, k, L / 2))
            v.append(uniform_simplex(rng, size, k, L / 2))
    return Decoration(ang, tuple(w), tuple(v)), proposals


def sample_decoration(t: PlaneTree, lengths: Sequence[float], rng: np.random.Generator, max_rejections: int = 10_000) -> Decoration:
    batch, _ = sample_decorations(t, lengths, rng, 1, max_rejections)
    return batch.row(0)


@dataclass
class EmpiricalStats:
    bin_edges: np.ndarray
    counts: np.ndarray
    power_sums: list[float]
    count: int
    acceptance: dict[str, tuple[int, int]] = field(default_factory=dict)
    samples: np.ndarray | None = None

    def moment(self, k: int) -> float:
        return self.power_sums[k - 1] / self.count

    @property
    def moments(self) -> list[float]:
        return [self.moment(k) for k in range(1, 5)]

    def standard_error(self, k: int) -> float:
        """Standard error of the k-th raw moment estimate."""
        if 2 * k <= 4:
            var = self.moment(2 * k) - self.moment(k) ** 2
        else:
            var = float(np.var(self.samples**k))
        return math.sqrt(max(var, 0.0) / self.count)

    def acceptance_rates(self) -> dict[str, float]:
        return {code: acc / prop for code, (acc, prop) in self.acceptance.items()}

    def summary(self) -> dict:
        return {
            "count": self.count,
            "moments": self.moments,
            "acceptance_rates": self.acceptance_rates(),
        }


def _run_chunk(config: SampleConfig, table, chunk: int, size: int):
    rng = rng_for(config.seed, chunk)
    probs = np.array([p for _, p in table])
    choice = rng.choice(len(table), size=size, p=probs / probs.sum())
    values = []
    acceptance = {}
    for i, (t, _) in enumerate(table):
        m = int(np.count_nonzero(choice == i))
        if m == 0:
            continue
        batch, proposals = sample_decorations(t, config.lengths, rng, m, config.max_rejections)
        values.append(np.broadcast_to(distance_difference(t, batch, config.lengths, 1, 2), (m,)))
        acceptance[t.code] = (m, proposals)
    return np.concatenate(values), acceptance


def sample_D(config: SampleConfig, keep_samples: bool = True) -> EmpiricalStats:
    """Draw ``config.sample_count`` values of the distance difference between boundaries 1 and 2."""
    if config.lengths[0] != 0 or config.lengths[1] != 0:
        raise ValueError("boundaries 1 and 2 must be cusps")
    table = tree_probabilities(config.n, config.lengths)
    sizes = [CHUNK] * (config.sample_count // CHUNK)
    if config.sample_count % CHUNK:
        sizes.append(config.sample_count % CHUNK)
    workers = config.workers or default_workers()
    jobs = list(enumerate(sizes))
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(lambda job: _run_chunk(config, table, *job), jobs))
    else:
        results = [_run_chunk(config, table, *job) for job in jobs]
    samples = np.concatenate([r[0] for r in results])
    acceptance: dict[str, tuple[int, int]] = {}
    for _, acc in results:
        for code, (a, p) in acc.items():
            a0, p0 = acceptance.get(code, (0, 0))
            acceptance[code] = (a0 + a, p0 + p)
    nbins = int(round(2 * config.hist_range / config.bin_width))
    edges = -config.hist_range + config.bin_width * np.arange(nbins + 1)
    counts, _ = np.histogram(samples, bins=edges)
    power_sums = [math.fsum(samples**k) for k in range(1, 5)]
    return EmpiricalStats(
        edges, counts, power_sums, len(samples), dict(sorted(acceptance.items())), samples if keep_samples else None
    )


def ks_against_x1(stats: EmpiricalStats, L: float) -> float:
    """Kolmogorov-Smirnov distance between the samples and the normalised ``X_1(.; L)``."""
    if stats.samples is None:
        raise ValueError("raw samples are needed for the KS statistic")
    return float(sps.kstest(stats.samples, X1Distribution(L).cdf).statistic)
