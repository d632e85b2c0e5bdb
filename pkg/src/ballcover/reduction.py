"""Dominating set as a covering instance, plus brute-force checks that the optima agree."""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import InstanceError, ReductionMismatch, TooLarge
from .metric import MetricInstance
from .mcc import exact_mcc

DSP_LIMIT = 20
VERIFY_LIMIT = 12


@dataclass(frozen=True)
class Graph:
    n: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.n < 1:
            raise InstanceError("a graph needs at least one vertex")
        seen = set()
        for u, v in self.edges:
            if u == v:
                raise InstanceError(f"self-loop at vertex {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise InstanceError(f"edge ({u}, {v}) leaves the vertex range 0..{self.n - 1}")
            e = (min(u, v), max(u, v))
            if e in seen:
                raise InstanceError(f"duplicate edge {e}")
            seen.add(e)
        object.__setattr__(self, "edges", tuple(sorted(seen)))

    @classmethod
    def from_edges(cls, n: int, edges) -> "Graph":
        return cls(int(n), tuple((int(u), int(v)) for u, v in edges))

    @classmethod
    def random(cls, n: int, p: float, rng: np.random.Generator) -> "Graph":
        """Erdos-Renyi ``G(n, p)``."""
        pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
        keep = rng.random(len(pairs)) < p
        return cls(n, tuple(e for e, k in zip(pairs, keep) if k))

    def closed_neighbourhoods(self) -> list[int]:
        nb = [1 << v for v in range(self.n)]
        for u, v in self.edges:
            nb[u] |= 1 << v
            nb[v] |= 1 << u
        return nb

    def to_dict(self) -> dict:
        return {"n": self.n, "edges": [list(e) for e in self.edges]}


def load_graph(path) -> Graph:
    with open(path) as fh:
        data = json.load(fh)
    try:
        return Graph.from_edges(data["n"], data.get("edges", []))
    except (KeyError, TypeError, ValueError) as exc:
        raise InstanceError(f"malformed graph file: {exc}") from exc


def reduction_alpha(n: int) -> float:
    """``log2 n``, raised to 1 for the one-vertex graph where the logarithm vanishes."""
    return max(1.0, math.log2(n))


def reduce_dsp_to_mcc(g: Graph, alpha: float | None = None) -> MetricInstance:
    """Clients ``0..n-1`` and servers ``n..2n-1``, one of each per vertex.

    A client is at distance 1 from its own server and from its neighbours'
    servers and 3 from every other server; two clients, or two servers, are
    always 2 apart.
    """
    n = g.n
    adj = np.eye(n, dtype=bool)
    for u, v in g.edges:
        adj[u, v] = adj[v, u] = True
    cross = np.where(adj, 1.0, 3.0)
    same = np.full((n, n), 2.0)
    np.fill_diagonal(same, 0.0)
    d = np.block([[same, cross], [cross.T, same]])
    roles = ["client"] * n + ["server"] * n
    return MetricInstance.from_matrix(d, roles, reduction_alpha(n) if alpha is None else alpha)


def is_dominating(g: Graph, vertices) -> bool:
    nb = g.closed_neighbourhoods()
    seen = 0
    for v in vertices:
        seen |= nb[v]
    return seen == (1 << g.n) - 1


def min_dominating_set(g: Graph) -> tuple[int, ...]:
    """Smallest dominating set; among those, the lexicographically first."""
    if g.n > DSP_LIMIT:
        raise TooLarge(f"brute-force dominating set handles at most {DSP_LIMIT} vertices")
    nb = g.closed_neighbourhoods()
    full = (1 << g.n) - 1
    for size in range(1, g.n + 1):
        for combo in itertools.combinations(range(g.n), size):
            seen = 0
            for v in combo:
                seen |= nb[v]
            if seen == full:
                return combo
    raise AssertionError("the full vertex set always dominates")


def verify_reduction(g: Graph) -> dict:
    """Check that the covering optimum equals the domination number and uses unit balls."""
    if g.n > VERIFY_LIMIT:
        raise TooLarge(f"reduction check handles at most {VERIFY_LIMIT} vertices")
    inst = reduce_dsp_to_mcc(g)
    dom = min_dominating_set(g)
    cover = exact_mcc(inst)
    report = {
        "n": g.n,
        "alpha": inst.alpha,
        "domination_number": len(dom),
        "dominating_set": list(dom),
        "mcc_optimum": cover.cost,
        "cover": cover.to_dict(),
        "unit_radii": all(b.radius == 1.0 for b in cover.balls),
    }
    report["ok"] = bool(math.isclose(cover.cost, len(dom), rel_tol=1e-9)
                        and (cover.cost > g.n or report["unit_radii"]))
    if not report["ok"]:
        raise ReductionMismatch(report)
    return report
