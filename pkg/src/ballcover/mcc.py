"""Minimum cost covering: the recursive partition-and-guess solver and an exact oracle.

The solver covers a client set ``P`` by the cheaper of (a) one ball or
(b) a guessed set ``Q`` of large balls plus recursive covers of the parts of
a random partition that ``Q`` leaves uncovered.  Instead of listing the
guesses one at a time, every guess with the same coverage ``C`` of ``P`` is
represented by the cheapest ball set reaching exactly ``C`` (see
:mod:`ballcover.setcover`); the recursive part only depends on ``C``.
"""
from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass

import numpy as np

from . import _common
from ._engine import SubsetSolver, level_of_diam
from .errors import EmptySubset, TooLarge
from .metric import Cover, MetricInstance, as_ids, check_normalized
from .partition import DEFAULT_LEMMA_CONSTANT, rand_labels
from .setcover import bits, coverage_table, exact_cover

EXACT_LIMIT = 20


@dataclass(frozen=True)
class MccConfig:
    epsilon: float
    kappa_base: int = 3
    lemma_constant: float = DEFAULT_LEMMA_CONSTANT
    max_enum: int | None = None
    seed: int = 0

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.kappa_base < 1:
            raise ValueError("kappa_base must be at least 1")
        if self.max_enum is not None and self.max_enum < 0:
            raise ValueError("max_enum must be non-negative")


@dataclass(frozen=True)
class Schedule:
    """Parameters fixed once from the full client set and reused at every depth."""

    n: int
    L: int
    lam: float
    gamma: float
    bound: int


def level(inst: MetricInstance, P) -> int:
    """Smallest non-negative ``i`` with ``diam(P) < 2**i``."""
    ids = as_ids(P, inst)
    if ids.size <= 1:
        return 0
    return level_of_diam(float(inst.dist[np.ix_(ids, ids)].max()))


def depth_budget(inst: MetricInstance) -> int:
    """``1 + ceil(log2 diam(X))``, or 1 when the clients have no spread."""
    x = inst.clients
    d = float(inst.dist[np.ix_(x, x)].max()) if x.size else 0.0
    return 1 + (_common.ceil_log2(d) if d > 1.0 else 0)


def structure_bound_mcc(alpha: float, lam: float, gamma: float) -> int:
    """Most large balls an optimal cover can hold: ``ceil((9 alpha gamma / lam) ** alpha)``."""
    if not 0 < lam <= 1 or gamma < 1 or alpha < 1:
        raise ValueError("need 0 < lambda <= 1, gamma >= 1, alpha >= 1")
    return _common.saturating_ceil_pow(9.0 * alpha * gamma / lam, alpha)


def schedule(inst: MetricInstance, epsilon: float, lemma_constant: float = DEFAULT_LEMMA_CONSTANT,
             divisor: int = 2, bound=None) -> Schedule:
    n = int(inst.clients.size)
    L = depth_budget(inst)
    lam = min(epsilon / (divisor * L), 1.0)
    gamma = max(1.0, lemma_constant * math.log2(max(n, 1)) / lam)
    if bound is None:
        bound = structure_bound_mcc(inst.alpha, lam, gamma)
    else:
        bound = bound(inst.alpha, gamma)
    return Schedule(n, L, lam, gamma, bound)


def preprocess_aspect_ratio(inst: MetricInstance, epsilon: float) -> tuple[MetricInstance, int]:
    """Placeholder for aspect-ratio reduction: returns ``(inst, L)`` with ``inst`` unchanged.

    ``L`` is the recursion depth budget ``1 + ceil(log2 diam(X))`` the
    solvers derive their parameters from.  Bounding it polynomially in the
    number of clients is not implemented.
    """
    return inst, depth_budget(inst)


def _exact_indices(solver: SubsetSolver, cols: list[int], max_balls=None) -> list[int]:
    masks, costs, idx = solver.local_balls(cols)
    _, chosen = exact_cover(masks, costs, len(cols), max_balls)
    return [idx[j] for j in chosen]


def exact_mcc(inst: MetricInstance, P=None, max_balls: int | None = None) -> Cover:
    """Minimum-cost cover of ``P`` (default: all clients) by candidate balls.

    With ``max_balls`` the cover uses at most that many balls.  Exhaustive
    over subsets of ``P``, so ``|P|`` is limited to 20.
    """
    ids = as_ids(P, inst)
    if ids.size > EXACT_LIMIT:
        raise TooLarge(f"exact MCC handles at most {EXACT_LIMIT} clients, got {ids.size}")
    solver = SubsetSolver(inst, 0, None)
    return solver.cover_of(_exact_indices(solver, [solver.pos[int(p)] for p in ids], max_balls))


def best_single_ball(inst: MetricInstance, P=None) -> Cover:
    ids = as_ids(P, inst)
    if ids.size == 0:
        raise EmptySubset("no single ball is needed for an empty set")
    solver = SubsetSolver(inst, 0, None)
    return solver.single_ball([solver.pos[int(p)] for p in ids])


class _PointCover(SubsetSolver):
    mode = "mcc"

    def __init__(self, inst, cfg: MccConfig, sched: Schedule):
        super().__init__(inst, cfg.seed, cfg.max_enum)
        self.cfg = cfg
        self.sched = sched
        self.trace = _common.RecursionTrace()
        # cheapest ball reaching each client: per-point lower bound on any cover's cost
        self.nearest = np.where(self.to_centers <= self.radii[:, None],
                                self.costs[:, None], np.inf).min(axis=0)

    def solve(self, S: int, depth: int = 0) -> Cover:
        if S == 0:
            return Cover.empty()
        hit = self.memo.get(S)
        if hit is not None:
            return hit
        cols = bits(S)
        p = len(cols)
        sub = self.sub_dist(cols)
        lvl = level_of_diam(float(sub.max())) if p > 1 else 0
        if p < self.cfg.kappa_base:
            best = self.cover_of(_exact_indices(self, cols, self.cfg.kappa_base))
            self.trace.add(size=p, level=lvl, depth=depth, branch="base", cost=best.cost)
            self.memo[S] = best
            return best

        best = self.single_ball(cols)
        branch = "single"
        diam = float(sub.max())
        rng = _common.substream(self.seed, "point_cover", S)
        if diam > 0:
            labels, _ = rand_labels(sub, max(self.sched.n, 2), rng)
        else:
            labels = np.zeros(p, dtype=np.intp)
        blocks = [_mask(np.flatnonzero(labels == b)) for b in np.unique(labels)]

        masks, costs, idx = self.local_balls(cols, min_radius=diam / self.sched.gamma)
        qmax = None if self.sched.bound >= p else self.sched.bound
        table = coverage_table(masks, costs, p, qmax)
        full = (1 << p) - 1
        lb_pt = self.nearest[cols]
        evaluated = 0
        for h, C, q in table.states:
            if _common_gt(h, best.cost):
                break
            rest = full & ~C
            if rest and _common_gt(h + max(lb_pt[i] for i in bits(rest)), best.cost):
                continue
            evaluated += 1
            total = h
            parts = []
            for B in blocks:
                R = B & rest
                if R:
                    child = self.solve(self.lift(R, cols), depth + 1)
                    parts.append(child)
                    total += child.cost
                    if _common_gt(total, best.cost):
                        break
            else:
                if total < best.cost - _common.SNAP_RTOL * best.cost:
                    balls = [self.ball(idx[j]) for j in table.balls(C, q)]
                    for c in parts:
                        balls.extend(c.balls)
                    best = Cover.from_balls(balls, self.alpha)
                    branch = "guess"
        self.trace.add(size=p, level=lvl, depth=depth, branch=branch, cost=best.cost,
                       blocks=len(blocks), large_balls=len(masks), states=len(table.states),
                       evaluated=evaluated)
        self.memo[S] = best
        return best


def _mask(local_idx) -> int:
    m = 0
    for i in local_idx:
        m |= 1 << int(i)
    return m


def _common_gt(a: float, b: float) -> bool:
    """``a`` exceeds ``b`` beyond float noise."""
    return a > b + _common.SNAP_RTOL * abs(b)


def point_cover(inst: MetricInstance, cfg: MccConfig, P=None) -> _common.SolveReport:
    """Randomized recursive cover of ``P`` (default: all clients).

    Requires clients normalized to minimum pairwise distance 1.  Parameters
    derive from the full client set.  The report's ``faithful`` flag is
    cleared when ``cfg.max_enum`` truncated a large-ball enumeration.
    """
    check_normalized(inst)
    inst.require_servers()
    t0 = time.perf_counter()
    sched = schedule(inst, cfg.epsilon, cfg.lemma_constant)
    solver = _PointCover(inst, cfg, sched)
    ids = as_ids(P, inst)
    cover = solver.solve(solver.mask_of(ids))
    params = {"epsilon": cfg.epsilon, "kappa_base": cfg.kappa_base, "max_enum": cfg.max_enum,
              "lemma_constant": cfg.lemma_constant, "alpha": inst.alpha, **asdict(sched)}
    return _common.SolveReport("mcc", cover, cfg.seed, not solver.truncated, params, solver.trace,
                               time.perf_counter() - t0)


def solve_exact_report(inst: MetricInstance, seed: int = 0) -> _common.SolveReport:
    t0 = time.perf_counter()
    cover = exact_mcc(inst)
    return _common.SolveReport("mcc", cover, seed, True, {"alpha": inst.alpha},
                               wall_time=time.perf_counter() - t0, exact=True)


__all__ = [
    "EXACT_LIMIT", "MccConfig", "Schedule", "best_single_ball", "depth_budget", "exact_mcc",
    "level", "point_cover", "preprocess_aspect_ratio", "schedule", "structure_bound_mcc",
]
