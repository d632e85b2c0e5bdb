"""Instance generators and a seeded experiment runner with CSV/JSON output."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import shortest_path
from scipy.spatial.distance import cdist

from ._common import substream
from .errors import UsageError
from .kcluster import EXACT_LIMIT as KCLUSTER_EXACT_LIMIT
from .kcluster import KclusterConfig, clustering, exact_kcluster
from .mcc import EXACT_LIMIT as MCC_EXACT_LIMIT
from .mcc import MccConfig, exact_mcc, point_cover
from .metric import Ball, MetricInstance, instance_to_dict, is_cover, normalize
from .partition import build_frt_counterexample, intersection_stats
from .reduction import Graph, reduce_dsp_to_mcc

GENERATORS = ("euclidean_uniform", "random_metric", "graph", "frt_counterexample", "dsp_reduction")
SOLVERS = ("mcc", "kcluster", "partition-stats")

# oracle sizes the experiment runner is willing to wait for
ORACLE_LIMITS = {"mcc": min(MCC_EXACT_LIMIT, 16), "kcluster": min(KCLUSTER_EXACT_LIMIT, 14)}


@dataclass(frozen=True)
class InstanceSpec:
    generator: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    alpha: float | None = None
    # None: rescale every generator except the dominating-set gadget, whose distances are fixed
    normalize: bool | None = None

    def __post_init__(self):
        if self.generator not in GENERATORS:
            raise UsageError(f"unknown generator {self.generator!r}; choose from {', '.join(GENERATORS)}")

    @property
    def rescale(self) -> bool:
        return self.generator != "dsp_reduction" if self.normalize is None else self.normalize

    def to_dict(self) -> dict:
        return {"generator": self.generator, "params": dict(self.params), "seed": self.seed,
                "alpha": self.alpha, "normalize": self.normalize}

    @classmethod
    def from_dict(cls, data: dict) -> "InstanceSpec":
        try:
            return cls(data["generator"], dict(data.get("params", {})), int(data.get("seed", 0)),
                       data.get("alpha"), data.get("normalize"))
        except KeyError as exc:
            raise UsageError(f"instance spec is missing {exc}") from None


def _roles(n: int, m: int) -> tuple[str, ...]:
    return ("client",) * n + ("server",) * m


def euclidean_uniform(n: int, m: int, dim: int = 2, box: float = 1.0, *, rng) -> np.ndarray:
    pts = rng.uniform(0.0, box, size=(n + m, dim))
    return cdist(pts, pts)


def random_metric(n: int, spread: float = 100.0, *, rng) -> np.ndarray:
    """Shortest-path closure of a complete graph with log-uniform weights in ``[1, spread]``."""
    w = np.exp(rng.uniform(0.0, math.log(spread), size=(n, n)))
    w = np.triu(w, 1)
    w = w + w.T
    return shortest_path(w, directed=False)


def path_graph(n: int, weight: float = 1.0) -> np.ndarray:
    idx = np.arange(n, dtype=np.float64)
    return np.abs(idx[:, None] - idx[None, :]) * weight


def generate(spec: InstanceSpec) -> MetricInstance:
    """Build the instance a spec describes; the same spec always gives the same instance."""
    p = spec.params
    rng = substream(spec.seed, "instance")
    alpha = 1.0 if spec.alpha is None else float(spec.alpha)
    try:
        if spec.generator == "euclidean_uniform":
            n, m = int(p["n"]), int(p.get("m", 0))
            d = euclidean_uniform(n, m, int(p.get("dim", 2)), float(p.get("box", 1.0)), rng=rng)
            inst = MetricInstance.from_matrix(d, _roles(n, m) if m else None, alpha)
        elif spec.generator == "random_metric":
            n, m = int(p["n"]), int(p.get("m", 0))
            d = random_metric(n + m, float(p.get("spread", 100.0)), rng=rng)
            inst = MetricInstance.from_matrix(d, _roles(n, m) if m else None, alpha)
        elif spec.generator == "graph":
            if p.get("kind", "path") != "path":
                raise UsageError("only path graphs are generated")
            inst = MetricInstance.from_matrix(path_graph(int(p["n"]), float(p.get("weight", 1.0))),
                                              None, alpha)
        elif spec.generator == "frt_counterexample":
            inst = build_frt_counterexample(int(p["b"])).instance.with_alpha(alpha)
        else:
            g = p["graph"]
            graph = g if isinstance(g, Graph) else Graph.from_edges(g["n"], g.get("edges", []))
            inst = reduce_dsp_to_mcc(graph, spec.alpha)
    except KeyError as exc:
        raise UsageError(f"generator {spec.generator} needs parameter {exc}") from None
    return normalize(inst) if spec.rescale else inst


def instance_digest(inst: MetricInstance) -> str:
    blob = json.dumps(instance_to_dict(inst), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def default_probe(inst: MetricInstance) -> Ball:
    """Ball around the first client with radius ``diam / (16 log2 n)``."""
    x = inst.clients
    delta = float(inst.dist[np.ix_(x, x)].max())
    return Ball(int(x[0]), delta / (16.0 * math.log2(max(x.size, 2))))


@dataclass
class ExperimentResult:
    spec: dict
    solver: str
    config: dict
    digest: str
    rows: list
    aggregate: dict
    notes: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.get("valid", True) for r in self.rows)

    def to_dict(self) -> dict:
        return {"spec": self.spec, "solver": self.solver, "config": self.config, "digest": self.digest,
                "rows": self.rows, "aggregate": self.aggregate, "notes": self.notes, "ok": self.ok}

    def to_csv(self) -> str:
        return rows_to_csv(self.rows)


def _summary(values) -> dict:
    v = np.asarray([x for x in values if x is not None], dtype=np.float64)
    if v.size == 0:
        return {}
    se = float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else 0.0
    return {"mean": float(v.mean()), "min": float(v.min()), "max": float(v.max()), "se": se}


def run_experiment(spec: InstanceSpec, solver: str, config: dict, seeds) -> ExperimentResult:
    """Run ``solver`` once per seed on the instance ``spec`` describes.

    ``config`` holds solver settings: ``epsilon`` (and ``k``) for the
    solvers, ``trials``/``schemes``/``center``/``radius`` for partition
    statistics.  Solver runs are compared against the exact oracle when the
    instance is small enough; otherwise a note records the skip.
    """
    seeds = sorted(int(s) for s in seeds)
    if not seeds:
        raise UsageError("at least one seed is required")
    if solver not in SOLVERS:
        raise UsageError(f"unknown solver {solver!r}; choose from {', '.join(SOLVERS)}")
    inst = generate(spec)
    notes = []
    if solver == "partition-stats":
        rows = _partition_rows(spec, inst, config, seeds)
        schemes = [s for s in ("rand", "frt") if f"{s}_mean" in rows[0]]
        agg = {s: _summary(r[f"{s}_mean"] for r in rows) for s in schemes}
    else:
        oracle = None
        limit = ORACLE_LIMITS[solver]
        if inst.clients.size <= limit:
            oracle = (exact_mcc(inst) if solver == "mcc"
                      else exact_kcluster(inst, None, int(config["k"]))).cost
        else:
            notes.append(f"oracle skipped: {inst.clients.size} clients exceeds {limit}")
        rows = [_solve_row(inst, solver, config, s, oracle) for s in seeds]
        agg = {"cost": _summary(r["cost"] for r in rows), "ratio": _summary(r["ratio"] for r in rows),
               "oracle_cost": oracle, "all_valid": all(r["valid"] for r in rows)}
    return ExperimentResult(spec.to_dict(), solver, dict(config), instance_digest(inst), rows, agg, notes)


def _solve_row(inst, solver, config, seed, oracle) -> dict:
    eps = float(config.get("epsilon", 0.5))
    max_enum = config.get("max_enum")
    if solver == "mcc":
        rep = point_cover(inst, MccConfig(eps, seed=seed, max_enum=max_enum))
        count_ok = True
    else:
        k = int(config["k"])
        rep = clustering(inst, KclusterConfig(eps, k, seed=seed, max_enum=max_enum))
        count_ok = rep.n_balls <= rep.params["budget_bound"]
    valid = is_cover(inst, rep.cover.balls, None) and count_ok
    # a bicriteria clustering may use extra balls and legitimately beat the k-ball optimum
    if oracle is not None and solver == "mcc":
        valid = valid and rep.cost >= oracle * (1 - 1e-9)
    return {"seed": seed, "cost": rep.cost, "balls": rep.n_balls, "faithful": rep.faithful,
            "valid": bool(valid), "oracle_cost": oracle,
            "ratio": None if not oracle else rep.cost / oracle}


def _partition_rows(spec, inst, config, seeds) -> list:
    schemes = config.get("schemes", ["rand", "frt"])
    trials = int(config.get("trials", 1000))
    if "center" in config:
        probe = Ball(int(config["center"]), float(config["radius"]))
    elif spec.generator == "frt_counterexample":
        probe = build_frt_counterexample(int(spec.params["b"]), validate=False).probe
        if spec.rescale:
            probe = Ball(probe.center, probe.radius * _scale(inst, spec))
    else:
        probe = default_probe(inst)
    rows = []
    for s in seeds:
        row = {"seed": s, "center": probe.center, "radius": probe.radius, "trials": trials}
        for scheme in schemes:
            st = intersection_stats(inst, None, probe, scheme, trials, seed=s)
            row[f"{scheme}_mean"] = st.mean
            row[f"{scheme}_se"] = st.se
            row[f"{scheme}_nonterminal_mean"] = st.nonterminal_mean
        rows.append(row)
    return rows


def _scale(inst, spec) -> float:
    raw = generate(InstanceSpec(spec.generator, spec.params, spec.seed, spec.alpha, False))
    return float(inst.dist.max() / raw.dist.max())


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _parse(text: str):
    if text == "":
        return None
    if text in ("True", "False"):
        return text == "True"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def rows_to_csv(rows) -> str:
    """CSV with a header from the first row; floats use ``repr`` so they survive a round trip."""
    rows = list(rows)
    if not rows:
        return ""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    cols = list(rows[0])
    writer.writerow(cols)
    for r in rows:
        writer.writerow([_cell(r.get(c)) for c in cols])
    return buf.getvalue()


def rows_from_csv(text: str) -> list[dict]:
    reader = csv.reader(io.StringIO(text))
    try:
        cols = next(reader)
    except StopIteration:
        return []
    return [{c: _parse(v) for c, v in zip(cols, line)} for line in reader]


__all__ = [
    "ExperimentResult", "GENERATORS", "InstanceSpec", "SOLVERS", "default_probe",
    "generate", "instance_digest", "rows_from_csv", "rows_to_csv", "run_experiment",
]
