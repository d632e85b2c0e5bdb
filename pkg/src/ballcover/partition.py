"""Randomized low-diameter partitions of a finite metric.

Two schemes are provided:

* :func:`rand_partition` carves balls around the points of ``P`` in a fixed
  order, drawing an independent radius for every point from the truncated
  geometric distribution :class:`TruncGeomDist`.  Every block has at most
  half the diameter of ``P`` and a small ball meets few blocks in
  expectation.
* :func:`frt_partition` uses one uniform radius and a random carving order.
  It has the same diameter guarantee but no good bound on the expected number
  of blocks a small ball meets; :func:`build_frt_counterexample` builds the
  tree metric on which it fails.

:func:`intersection_stats` measures both schemes by Monte Carlo.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.sparse.csgraph import shortest_path
from scipy.sparse import coo_matrix

from .errors import EmptyInput, InvalidDelta, InvalidK, OutOfRegime
from .metric import Ball, MetricInstance, as_ids

DEFAULT_LEMMA_CONSTANT = 64.0


def _ceil_log2(k: int) -> int:
    return (int(k) - 1).bit_length()


@dataclass(frozen=True)
class TruncGeomDist:
    """Distribution on ``[delta/8, delta/4]`` split into ``J = ceil(log2 k)`` equal intervals.

    Interval ``j`` (1-based) carries mass ``2**-j`` for ``j < J`` and the last
    one carries ``2**-(J-1)``, so each mass equals the sum of all later ones.
    """

    delta: float
    k: int
    num_intervals: int
    edges: np.ndarray = field(repr=False)
    masses: np.ndarray = field(repr=False)

    @property
    def width(self) -> float:
        return self.delta / (8.0 * self.num_intervals)

    def exact_masses(self) -> list[Fraction]:
        J = self.num_intervals
        return [Fraction(1, 2**j) for j in range(1, J)] + [Fraction(1, 2 ** (J - 1))]

    def interval_of(self, x) -> np.ndarray:
        """0-based interval index of each value in ``x``."""
        j = np.floor((np.asarray(x) - self.edges[0]) / self.width).astype(np.intp)
        return np.clip(j, 0, self.num_intervals - 1)

    def pdf(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        inside = (x >= self.edges[0]) & (x <= self.edges[-1])
        return np.where(inside, self.masses[self.interval_of(x)] / self.width, 0.0)


def make_dist(delta: float, k: int) -> TruncGeomDist:
    if not (delta > 0 and math.isfinite(delta)):
        raise InvalidDelta(f"delta must be positive, got {delta}")
    if int(k) != k or k < 2:
        raise InvalidK(f"k must be an integer >= 2, got {k}")
    J = _ceil_log2(int(k))
    lo = delta / 8.0
    edges = lo + (delta / 8.0) * np.arange(J + 1) / J
    edges[-1] = delta / 4.0
    masses = np.array([2.0**-j for j in range(1, J)] + [2.0 ** -(J - 1)])
    edges.setflags(write=False)
    masses.setflags(write=False)
    return TruncGeomDist(float(delta), int(k), J, edges, masses)


def sample_beta(dist: TruncGeomDist, rng: np.random.Generator, size=None):
    """Pick an interval by its mass, then a uniform point inside it."""
    j = rng.choice(dist.num_intervals, size=size, p=dist.masses)
    u = rng.random(size)
    lo = dist.edges[j]
    hi = dist.edges[np.asarray(j) + 1]
    return lo + u * (hi - lo)


@dataclass(frozen=True, eq=False)
class Partition:
    """Ordered blocks of a point set, in the order the scheme generated them."""

    blocks: tuple[tuple[int, ...], ...]
    source: str
    seed: int | None = None
    betas: np.ndarray | None = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.blocks)

    def labels(self) -> dict[int, int]:
        return {p: i for i, blk in enumerate(self.blocks) for p in blk}


def _rng_and_seed(rng):
    if isinstance(rng, np.random.Generator):
        return rng, None
    return np.random.default_rng(rng), (None if rng is None else int(rng))


def _first_hit(within: np.ndarray) -> np.ndarray:
    """Row index of the first True in every column (each column has one)."""
    return np.argmax(within, axis=0)


def _blocks_from_labels(ids: np.ndarray, labels: np.ndarray) -> tuple[tuple[int, ...], ...]:
    order = np.argsort(labels, kind="stable")
    lab = labels[order]
    cuts = np.flatnonzero(np.diff(lab)) + 1
    return tuple(tuple(int(p) for p in chunk) for chunk in np.split(ids[order], cuts))


def _trivial(ids: np.ndarray, sub: np.ndarray) -> bool:
    return ids.size <= 1 or float(sub.max()) == 0.0


def rand_labels(sub: np.ndarray, n_param: int, rng: np.random.Generator, cols=None, delta=None):
    """Block label of every point given the submatrix of ``P`` (points in ascending id order).

    Returns ``(labels, betas)`` where label ``i`` means the block carved
    around the i-th point.  With ``cols`` only those columns are labelled;
    the random draws are the same either way.
    """
    dist = make_dist(float(sub.max()) if delta is None else delta, n_param)
    betas = sample_beta(dist, rng, size=sub.shape[0])
    if cols is not None:
        sub = sub[:, cols]
    return _first_hit(sub <= betas[:, None]), betas


def rand_partition(inst: MetricInstance, P, n_param: int | None = None, rng=None) -> Partition:
    """Carve ``P`` with independent radii drawn from ``dist(diam(P), n_param)``.

    Points are visited in ascending id order; the i-th point claims every
    still-unassigned point within its radius.  Empty blocks are dropped.
    """
    rng, seed = _rng_and_seed(rng)
    ids = as_ids(P, inst)
    if ids.size == 0:
        raise EmptyInput("cannot partition an empty set")
    n_param = ids.size if n_param is None else int(n_param)
    if n_param < ids.size:
        raise ValueError(f"n_param={n_param} is smaller than |P|={ids.size}")
    sub = inst.dist[np.ix_(ids, ids)]
    if _trivial(ids, sub):
        return Partition((tuple(int(p) for p in ids),), "rand_partition", seed)
    labels, betas = rand_labels(sub, max(n_param, 2), rng)
    return Partition(_blocks_from_labels(ids, labels), "rand_partition", seed, betas)


def frt_labels(sub: np.ndarray, rng: np.random.Generator, cols=None, delta=None):
    """Labels under one uniform radius and a random carving order.

    Label ``t`` means the block of the t-th point in the permutation.
    """
    delta = float(sub.max()) if delta is None else delta
    beta = rng.uniform(delta / 8.0, delta / 4.0)
    perm = rng.permutation(sub.shape[0])
    rows = sub[perm] if cols is None else sub[np.ix_(perm, cols)]
    return _first_hit(rows <= beta), beta, perm


def frt_partition(inst: MetricInstance, P, rng=None) -> Partition:
    rng, seed = _rng_and_seed(rng)
    ids = as_ids(P, inst)
    if ids.size == 0:
        raise EmptyInput("cannot partition an empty set")
    sub = inst.dist[np.ix_(ids, ids)]
    if _trivial(ids, sub):
        return Partition((tuple(int(p) for p in ids),), "frt", seed)
    labels, beta, _ = frt_labels(sub, rng)
    return Partition(_blocks_from_labels(ids, labels), "frt", seed, np.array([beta]))


@dataclass(frozen=True)
class FrtCounterexample:
    instance: MetricInstance
    probe: Ball
    delta: float
    b: int
    hub: int
    spokes: tuple[int, ...]
    leaves: tuple[tuple[int, ...], ...]
    pendant: int


def build_frt_counterexample(b: int, validate: bool = True) -> FrtCounterexample:
    """Weighted tree on ``b*b + b + 2`` points where one-radius carving does badly.

    Point 0 is the hub ``u``, points ``1..b`` the spokes, then ``b`` leaf
    groups of ``b`` points each, and the last point is the pendant ``z``.
    The diameter is normalized to ``delta = 16 log2 n`` so spoke edges have
    weight 1; the probe is the ball of radius 1 around the hub.
    """
    if b < 2:
        raise ValueError("b must be at least 2")
    n = b * b + b + 2
    delta = 16.0 * math.log2(n)
    small = delta / (16.0 * math.log2(n))
    spokes = tuple(range(1, b + 1))
    leaves = tuple(tuple(range(1 + b + i * b, 1 + b + (i + 1) * b)) for i in range(b))
    z = n - 1
    rows, cols, w = [], [], []
    for s in spokes:
        rows.append(0), cols.append(s), w.append(small)
    for s, group in zip(spokes, leaves):
        for v in group:
            rows.append(s), cols.append(v), w.append(delta / 4.0 - small)
    rows.append(0), cols.append(z), w.append(3.0 * delta / 4.0)
    graph = coo_matrix((w, (rows, cols)), shape=(n, n)).tocsr()
    d = shortest_path(graph, directed=False)
    inst = MetricInstance.from_matrix(d, ("client",) * n, 1.0, validate=validate)
    return FrtCounterexample(inst, Ball(0, small), delta, b, 0, spokes, leaves, z)


@dataclass(frozen=True, eq=False)
class IntersectionStats:
    """Per-trial counts of blocks meeting a probe ball."""

    scheme: str
    trials: int
    seed: int
    radius: float
    diam: float
    n_param: int
    intersecting: np.ndarray = field(repr=False)
    nonterminal: np.ndarray = field(repr=False)

    @property
    def mean(self) -> float:
        return float(self.intersecting.mean())

    @property
    def se(self) -> float:
        return float(self.intersecting.std(ddof=1) / math.sqrt(self.trials)) if self.trials > 1 else 0.0

    @property
    def nonterminal_mean(self) -> float:
        return float(self.nonterminal.mean())

    @property
    def nonterminal_se(self) -> float:
        return float(self.nonterminal.std(ddof=1) / math.sqrt(self.trials)) if self.trials > 1 else 0.0

    def lemma_bound(self, c: float = DEFAULT_LEMMA_CONSTANT) -> float:
        """``c * r / diam * log2 n``: the bound on expected non-terminal blocks."""
        if self.diam == 0:
            return 0.0
        return c * self.radius / self.diam * math.log2(self.n_param)

    def rows(self):
        for t in range(self.trials):
            yield {"trial": t, "blocks_intersected": int(self.intersecting[t]),
                   "blocks_nonterminal": int(self.nonterminal[t])}


def intersection_stats(
    inst: MetricInstance,
    P,
    probe: Ball,
    scheme: str = "rand",
    trials: int = 1000,
    seed: int = 0,
    n_param: int | None = None,
    strict: bool = False,
) -> IntersectionStats:
    """Count, over independent trials, the blocks that meet ``probe``.

    Trial ``t`` draws from child ``t`` of ``SeedSequence(seed)``.  A block meets the
    probe non-terminally if a later block also meets it, so whenever the probe
    is hit ``nonterminal == intersecting - 1``.
    """
    if scheme not in ("rand", "frt"):
        raise ValueError(f"unknown scheme {scheme!r}")
    ids = as_ids(P, inst)
    if ids.size == 0:
        raise EmptyInput("cannot partition an empty set")
    n_param = ids.size if n_param is None else int(n_param)
    sub = inst.dist[np.ix_(ids, ids)]
    delta = float(sub.max())
    r = float(probe.radius)
    if strict and delta > 0 and r > delta / (16.0 * math.log2(max(n_param, 2))):
        raise OutOfRegime(f"radius {r} exceeds diam/(16 log2 n) = {delta / (16 * math.log2(max(n_param, 2)))}")
    in_ball = inst.dist[int(probe.center), ids] <= r
    hit = np.flatnonzero(in_ball)
    counts = np.zeros(trials, dtype=np.int64)
    if hit.size and not _trivial(ids, sub):
        for t, child in enumerate(np.random.SeedSequence(seed).spawn(trials)):
            rng = np.random.default_rng(child)
            if scheme == "rand":
                labels, _ = rand_labels(sub, max(n_param, 2), rng, hit, delta)
            else:
                labels = frt_labels(sub, rng, hit, delta)[0]
            counts[t] = np.unique(labels).size
    elif hit.size:
        counts[:] = 1
    nonterminal = np.maximum(counts - 1, 0)
    return IntersectionStats(scheme, trials, seed, r, delta, n_param, counts, nonterminal)
