"""Finite metric instances, balls, covers and the candidate ball set.

A :class:`MetricInstance` stores a dense distance matrix over points
``0..N-1`` together with a role per point (``client``, ``server`` or
``both``) and the cost exponent ``alpha``.  Every solver in the package
works on these instances and only ever uses balls whose radius is the
distance from an eligible center to some client; :func:`candidate_balls`
enumerates exactly that set.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np
from scipy.sparse.csgraph import csgraph_from_dense, shortest_path
from scipy.spatial.distance import cdist

from .errors import (
    AsymmetricMatrix,
    DisconnectedGraph,
    EmptySubset,
    InstanceError,
    NegativeDistance,
    NoServers,
    NormalizationError,
    TriangleViolation,
)

TRIANGLE_TOL = 1e-9
COST_RTOL = 1e-12

ROLES = ("client", "server", "both")


class Ball(NamedTuple):
    center: int
    radius: float


def cover_cost(balls: Iterable[Ball], alpha: float) -> float:
    """Sum of ``radius ** alpha`` over ``balls``."""
    return math.fsum(float(b.radius) ** alpha for b in balls)


@dataclass(frozen=True)
class Cover:
    """An (unordered) collection of balls with its cached cost.

    Balls are kept in canonical ``(center, radius)`` order so that two covers
    holding the same multiset compare and serialize identically.
    """

    balls: tuple[Ball, ...]
    cost: float

    @classmethod
    def from_balls(cls, balls: Iterable[Ball], alpha: float) -> "Cover":
        bs = tuple(sorted(Ball(int(b[0]), float(b[1])) for b in balls))
        return cls(bs, cover_cost(bs, alpha))

    @classmethod
    def empty(cls) -> "Cover":
        return cls((), 0.0)

    def __len__(self) -> int:
        return len(self.balls)

    @property
    def n_balls(self) -> int:
        return len(self.balls)

    def key(self) -> tuple:
        """Tie-break key: cost, then ball count, then the ball list."""
        return (self.cost, len(self.balls), self.balls)

    def union(self, other: "Cover", alpha: float) -> "Cover":
        return Cover.from_balls(self.balls + other.balls, alpha)

    def check_cost(self, alpha: float) -> bool:
        return math.isclose(self.cost, cover_cost(self.balls, alpha), rel_tol=COST_RTOL, abs_tol=0.0)

    def to_dict(self) -> list[dict]:
        return [{"center": b.center, "radius": b.radius} for b in self.balls]


def better(a: Cover | None, b: Cover | None) -> bool:
    """True when cover ``a`` strictly beats ``b`` under the package tie-break order.

    Costs within a relative ``1e-12`` count as equal so that summation order
    does not decide ties.
    """
    if a is None:
        return False
    if b is None:
        return True
    if a.cost < b.cost and not math.isclose(a.cost, b.cost, rel_tol=COST_RTOL, abs_tol=1e-300):
        return True
    if math.isclose(a.cost, b.cost, rel_tol=COST_RTOL, abs_tol=1e-300):
        return (len(a.balls), a.balls) < (len(b.balls), b.balls)
    return False


@dataclass(frozen=True, eq=False)
class MetricInstance:
    """Points with roles and a validated metric.

    Use :meth:`from_matrix` or :func:`build_instance` rather than the raw
    constructor; they validate the metric axioms.
    """

    dist: np.ndarray
    roles: tuple[str, ...]
    alpha: float = 1.0
    clients: np.ndarray = field(init=False, repr=False)
    servers: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        roles = tuple(self.roles)
        object.__setattr__(self, "roles", roles)
        clients = np.array([i for i, r in enumerate(roles) if r in ("client", "both")], dtype=np.intp)
        servers = np.array([i for i, r in enumerate(roles) if r in ("server", "both")], dtype=np.intp)
        clients.setflags(write=False)
        servers.setflags(write=False)
        object.__setattr__(self, "clients", clients)
        object.__setattr__(self, "servers", servers)

    @classmethod
    def from_matrix(cls, d, roles=None, alpha: float = 1.0, validate: bool = True) -> "MetricInstance":
        d = np.array(d, dtype=np.float64)
        if d.size == 0:
            d = np.zeros((1, 1)) if roles is None or len(roles) <= 1 else d
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise InstanceError(f"distance matrix must be square, got shape {d.shape}")
        n = d.shape[0]
        if roles is None:
            roles = ("both",) * n
        roles = tuple(roles)
        if len(roles) != n:
            raise InstanceError(f"{len(roles)} roles for {n} points")
        bad = [r for r in roles if r not in ROLES]
        if bad:
            raise InstanceError(f"unknown role {bad[0]!r}")
        if not alpha >= 1:
            raise InstanceError(f"alpha must be >= 1, got {alpha}")
        if validate:
            d = validate_metric(d)
        d.setflags(write=False)
        inst = cls(d, roles, float(alpha))
        if len(inst.clients) == 0:
            raise InstanceError("instance has no clients")
        return inst

    @property
    def n_points(self) -> int:
        return self.dist.shape[0]

    def with_alpha(self, alpha: float) -> "MetricInstance":
        return MetricInstance.from_matrix(self.dist, self.roles, alpha, validate=False)

    def scaled(self, s: float) -> "MetricInstance":
        """Copy with every distance multiplied by ``s > 0``."""
        if not s > 0:
            raise ValueError("scale must be positive")
        return MetricInstance.from_matrix(self.dist * s, self.roles, self.alpha, validate=False)

    def require_servers(self) -> None:
        if len(self.servers) == 0:
            raise NoServers("instance has no servers")


def validate_metric(d: np.ndarray, tol: float = TRIANGLE_TOL) -> np.ndarray:
    """Check the metric axioms and return a cleaned copy (exact zero diagonal, exact symmetry)."""
    if not np.all(np.isfinite(d)):
        raise InstanceError("distances must be finite")
    if np.any(d < 0):
        i, j = np.argwhere(d < 0)[0]
        raise NegativeDistance(f"d({i},{j}) = {d[i, j]} < 0")
    if np.max(np.abs(d - d.T), initial=0.0) > tol:
        i, j = np.unravel_index(np.argmax(np.abs(d - d.T)), d.shape)
        raise AsymmetricMatrix(f"d({i},{j}) = {d[i, j]} but d({j},{i}) = {d[j, i]}")
    if np.max(np.abs(np.diag(d)), initial=0.0) > tol:
        raise InstanceError("diagonal must be zero")
    d = (d + d.T) / 2.0
    np.fill_diagonal(d, 0.0)
    if d.shape[0] > 2:
        closure = shortest_path(csgraph_from_dense(d, null_value=np.inf), directed=False)
        excess = d - closure
        if excess.max() > tol:
            i, j = np.unravel_index(np.argmax(excess), d.shape)
            k = int(np.argmin(d[i, :] + d[:, j]))
            raise TriangleViolation(i, j, k, d[i, j] - d[i, k] - d[k, j])
    return d


def _graph_distances(n: int, edges) -> np.ndarray:
    w = np.full((n, n), np.inf)
    np.fill_diagonal(w, 0.0)
    for e in edges:
        u, v, weight = int(e[0]), int(e[1]), float(e[2])
        if weight < 0:
            raise NegativeDistance(f"edge ({u},{v}) has weight {weight}")
        if not (0 <= u < n and 0 <= v < n):
            raise InstanceError(f"edge ({u},{v}) references a missing point")
        w[u, v] = w[v, u] = min(w[u, v], weight)
    sp = shortest_path(csgraph_from_dense(w, null_value=np.inf), directed=False)
    if not np.all(np.isfinite(sp)):
        raise DisconnectedGraph("graph metric requires a connected graph")
    return sp


def build_instance(data: dict, validate: bool = True) -> MetricInstance:
    """Materialize a JSON-style instance description.

    ``data`` follows the schema::

        {"alpha": 1.0,
         "points": [{"id": 0, "role": "client"}, ...],
         "metric": {"type": "matrix", "d": [[...]]}
                 | {"type": "euclidean", "coords": [[...]]}
                 | {"type": "graph", "edges": [[u, v, w], ...]}}
    """
    try:
        points = sorted(data["points"], key=lambda p: int(p["id"]))
        metric = data["metric"]
        kind = metric["type"]
    except (KeyError, TypeError) as exc:
        raise InstanceError(f"malformed instance: missing {exc}") from None
    ids = [int(p["id"]) for p in points]
    if ids != list(range(len(ids))):
        raise InstanceError("point ids must be exactly 0..N-1")
    roles = tuple(p.get("role", "both") for p in points)
    n = len(roles)
    if kind == "matrix":
        d = np.array(metric["d"], dtype=np.float64)
        if d.size == 0 and n == 1:
            d = np.zeros((1, 1))
    elif kind == "euclidean":
        coords = np.array(metric["coords"], dtype=np.float64)
        if coords.ndim == 1:
            coords = coords[:, None]
        if coords.shape[0] != n:
            raise InstanceError(f"{coords.shape[0]} coordinates for {n} points")
        d = cdist(coords, coords)
    elif kind == "graph":
        d = _graph_distances(n, metric.get("edges", []))
    else:
        raise InstanceError(f"unknown metric type {kind!r}")
    return MetricInstance.from_matrix(d, roles, float(data.get("alpha", 1.0)), validate=validate)


def instance_to_dict(inst: MetricInstance) -> dict:
    return {
        "alpha": inst.alpha,
        "points": [{"id": i, "role": r} for i, r in enumerate(inst.roles)],
        "metric": {"type": "matrix", "d": inst.dist.tolist()},
    }


def load_instance(path) -> MetricInstance:
    with open(path) as fh:
        return build_instance(json.load(fh))


def save_instance(inst: MetricInstance, path) -> None:
    with open(path, "w") as fh:
        json.dump(instance_to_dict(inst), fh, sort_keys=True)
        fh.write("\n")


def as_ids(subset, inst: MetricInstance | None = None) -> np.ndarray:
    """Sorted unique point ids from any iterable (or ``None`` for all clients)."""
    if subset is None:
        if inst is None:
            raise ValueError("need an instance to default the subset")
        return np.asarray(inst.clients, dtype=np.intp)
    ids = np.unique(np.fromiter((int(p) for p in subset), dtype=np.intp))
    if inst is not None and ids.size and (ids[0] < 0 or ids[-1] >= inst.n_points):
        raise InstanceError("subset references a missing point")
    return ids


def ball_members(inst: MetricInstance, ball: Ball, subset=None) -> frozenset[int]:
    """Points of ``subset`` (default: every point) within ``ball``."""
    ids = np.arange(inst.n_points) if subset is None else as_ids(subset, inst)
    inside = inst.dist[int(ball.center), ids] <= ball.radius
    return frozenset(int(p) for p in ids[inside])


def diam(inst: MetricInstance, subset) -> float:
    ids = as_ids(subset, inst)
    if ids.size == 0:
        raise EmptySubset("diameter of an empty set")
    return float(inst.dist[np.ix_(ids, ids)].max())


def is_cover(inst: MetricInstance, balls: Iterable[Ball], subset) -> bool:
    ids = as_ids(subset, inst)
    covered = np.zeros(ids.size, dtype=bool)
    for b in balls:
        covered |= inst.dist[int(b.center), ids] <= b.radius
    return bool(covered.all())


def min_client_distance(inst: MetricInstance) -> float:
    """Smallest distance between two distinct clients (``inf`` with fewer than two)."""
    x = inst.clients
    if x.size < 2:
        return math.inf
    sub = inst.dist[np.ix_(x, x)]
    return float(sub[~np.eye(x.size, dtype=bool)].min())


def check_normalized(inst: MetricInstance, tol: float = TRIANGLE_TOL) -> None:
    """Solvers assume the closest pair of clients is at distance at least 1."""
    m = min_client_distance(inst)
    if m < 1.0 - tol:
        raise NormalizationError(
            f"minimum client distance is {m:.6g}; rescale so it is at least 1 "
            "(coincident clients cannot be normalized)"
        )


def normalize(inst: MetricInstance) -> MetricInstance:
    """Rescale so the minimum client interpoint distance is exactly 1."""
    m = min_client_distance(inst)
    if m == 0:
        raise NormalizationError("coincident clients cannot be normalized")
    if not math.isfinite(m):
        return inst
    return inst.scaled(1.0 / m)


@dataclass(frozen=True, eq=False)
class CandidateBallSet:
    """Every ball ``(y, d(x, y))`` with ``y`` an eligible center and ``x`` a client."""

    mode: str
    balls: tuple[Ball, ...]
    index: dict = field(repr=False)

    @property
    def centers(self) -> np.ndarray:
        return np.array([b.center for b in self.balls], dtype=np.intp)

    @property
    def radii(self) -> np.ndarray:
        return np.array([b.radius for b in self.balls], dtype=np.float64)

    def __len__(self) -> int:
        return len(self.balls)

    def __contains__(self, ball) -> bool:
        return float(ball[1]) in self.index.get(int(ball[0]), ())


def eligible_centers(inst: MetricInstance, mode: str) -> np.ndarray:
    if mode == "mcc":
        inst.require_servers()
        return inst.servers
    if mode == "kcluster":
        return inst.clients
    raise ValueError(f"unknown mode {mode!r}")


def candidate_balls(inst: MetricInstance, mode: str = "mcc") -> CandidateBallSet:
    centers = eligible_centers(inst, mode)
    balls = []
    index = {}
    for y in centers:
        radii = np.unique(inst.dist[int(y), inst.clients])
        index[int(y)] = tuple(float(r) for r in radii)
        balls.extend(Ball(int(y), float(r)) for r in radii)
    return CandidateBallSet(mode, tuple(balls), index)
