"""Bicriteria k-clustering: repeated partition-and-guess with a budget-splitting DP.

``clustering`` covers ``P`` with balls centred at clients, trading a
``(1 + 3 lam) ** level(P)`` factor in the number of balls for cost.  Each
subset's answers for every budget ``0..K`` are computed together and cached,
so one table serves every caller asking about the same subset.
"""
from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass
from typing import Mapping

import numpy as np

from . import _common
from ._engine import SubsetSolver, level_of_diam
from .errors import Infeasible, InvalidK, MissingEntry, TooLarge
from .metric import Cover, MetricInstance, as_ids, check_normalized
from .mcc import level, schedule
from .partition import DEFAULT_LEMMA_CONSTANT, rand_labels
from .setcover import bits, coverage_table, exact_cover

EXACT_LIMIT = 16


@dataclass(frozen=True)
class KclusterConfig:
    epsilon: float
    k: int
    beta_base: int = 3
    lemma_constant: float = DEFAULT_LEMMA_CONSTANT
    seed: int = 0
    max_enum: int | None = None

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.k < 1:
            raise InvalidK(f"k must be at least 1, got {self.k}")
        if self.beta_base < 1:
            raise ValueError("beta_base must be at least 1")


def structure_bound_kcluster(alpha: float, gamma: float) -> int:
    """Most large balls an optimal clustering can hold: ``ceil(gamma ** alpha)``."""
    if gamma < 1 or alpha < 1:
        raise ValueError("need gamma >= 1 and alpha >= 1")
    return _common.saturating_ceil_pow(gamma, alpha)


def repetitions(n: int) -> int:
    """``ceil(2 log_{1.5} n)`` independent partitions per call (at least one)."""
    if n < 2:
        return 1
    return max(1, _common.snap_ceil(2.0 * math.log(n) / math.log(1.5)))


def _best_split(cost: np.ndarray):
    """Suffix DP over a ``(tau, B+1)`` cost table (``inf`` = infeasible).

    Row ``i`` of the result gives, for every budget ``b``, the cheapest way to
    cover blocks ``i..tau-1`` with at most ``b`` balls in total.  ``choice[i][b]``
    is the budget handed to block ``i``; ties go to the smaller budget.
    """
    tau, width = cost.shape
    last = cost[-1]
    pick = np.zeros(width, dtype=np.intp)
    run = np.empty(width)
    cur, arg = np.inf, 0
    for b in range(width):
        if last[b] < cur:
            cur, arg = last[b], b
        run[b], pick[b] = cur, arg
    choice = [None] * tau
    choice[-1] = pick
    best = run
    kk = np.arange(width)
    bb = kk[:, None]
    valid = kk[None, :] <= bb
    rest_idx = np.where(valid, bb - kk[None, :], 0)
    for i in range(tau - 2, -1, -1):
        m = np.where(valid, cost[i][None, :] + best[rest_idx], np.inf)
        choice[i] = np.argmin(m, axis=1)
        best = m[np.arange(width), choice[i]]
    return best, choice


def _unwind(choice, b: int) -> list[int]:
    out = []
    for ch in choice:
        k = int(ch[b])
        out.append(k)
        b -= k
    return out


def budget_dp(covers: Mapping, total_budget: int, alpha: float = 1.0) -> Cover:
    """Cheapest union of one cover per block with at most ``total_budget`` balls in total.

    ``covers`` maps ``(i, budget)`` to the cover of block ``i`` (``0..tau-1``)
    allowed that many balls, or ``None`` when no such cover exists.  Every
    budget ``0..total_budget`` must be present for every block.
    """
    if total_budget < 0:
        raise ValueError("total_budget must be non-negative")
    blocks = sorted({i for i, _ in covers})
    if not blocks:
        return Cover.empty()
    if blocks != list(range(len(blocks))):
        raise MissingEntry(f"blocks must be numbered 0..tau-1, got {blocks}")
    width = total_budget + 1
    table = np.full((len(blocks), width), np.inf)
    for i in blocks:
        for b in range(width):
            if (i, b) not in covers:
                raise MissingEntry((i, b))
            c = covers[(i, b)]
            if c is not None:
                table[i, b] = c.cost
    best, choice = _best_split(table)
    if not np.isfinite(best[total_budget]):
        raise Infeasible(f"no combination fits in {total_budget} balls")
    balls = []
    for i, k in enumerate(_unwind(choice, total_budget)):
        balls.extend(covers[(i, k)].balls)
    return Cover.from_balls(balls, alpha)


def exact_kcluster(inst: MetricInstance, P=None, k: int = 1) -> Cover:
    """Minimum-cost cover of ``P`` by at most ``k`` balls centred at clients (``|P| <= 16``)."""
    ids = as_ids(P, inst)
    if ids.size > EXACT_LIMIT:
        raise TooLarge(f"exact k-clustering handles at most {EXACT_LIMIT} points, got {ids.size}")
    if k < 0:
        raise InvalidK(f"k must be non-negative, got {k}")
    solver = _Clustering.__new__(_Clustering)
    SubsetSolver.__init__(solver, inst, 0, None)
    cols = [solver.pos[int(p)] for p in ids]
    masks, costs, idx = solver.local_balls(cols)
    _, chosen = exact_cover(masks, costs, len(cols), k)
    return solver.cover_of(idx[j] for j in chosen)


class _Clustering(SubsetSolver):
    mode = "kcluster"

    def __init__(self, inst, cfg: KclusterConfig):
        super().__init__(inst, cfg.seed, cfg.max_enum)
        self.cfg = cfg
        self.sched = schedule(inst, cfg.epsilon, cfg.lemma_constant, divisor=6,
                              bound=structure_bound_kcluster)
        self.reps = repetitions(self.sched.n)
        self.grow = 1.0 + 3.0 * self.sched.lam
        self.trace = _common.RecursionTrace()
        self.cost_vec = {}

    def count_bound(self, lvl: int, kappa: int) -> int:
        return _common.snap_floor(self.grow**lvl * kappa)

    def relaxed(self, kappa: int) -> int:
        return _common.snap_floor(self.grow * kappa)

    def table(self, S: int, K: int, depth: int = 0) -> list:
        """Covers of subset ``S`` for every budget ``0..K`` (``None`` where infeasible)."""
        if S == 0:
            return [Cover.empty()] * (K + 1)
        if K == 0:
            self.cost_vec.setdefault(S, np.array([np.inf]))
            return [None]
        hit = self.memo.get(S)
        if hit is not None and len(hit) > K:
            return hit[: K + 1]
        cols = bits(S)
        p = len(cols)
        sub = self.sub_dist(cols)
        diam = float(sub.max())
        lvl = level_of_diam(diam) if p > 1 else 0
        if p < self.cfg.beta_base:
            out = [None] + [self._exact(cols, min(kappa, self.cfg.beta_base)) for kappa in range(1, K + 1)]
            self.trace.add(size=p, level=lvl, depth=depth, branch="base", budgets=K,
                           cost=None if K == 0 else out[-1].cost)
            self._store(S, out)
            return out

        single = self.single_ball(cols)
        best = [None] + [single] * K
        branch = ["single"] * (K + 1)
        bounds = [self.count_bound(lvl, kappa) for kappa in range(K + 1)]
        Kc = self.relaxed(K)

        masks, costs, idx = self.local_balls(cols, min_radius=diam / self.sched.gamma)
        qmax = min(self.sched.bound, p, bounds[K])
        table = coverage_table(masks, costs, p, qmax)
        full = (1 << p) - 1
        # the uncovered part of each guess, lifted once and reused by every repetition
        states = [(h, C, q, self.lift(full & ~C, cols)) for h, C, q in table.states]
        budgets = [self.relaxed(kappa) for kappa in range(K + 1)]
        evaluated = 0
        for rep in range(self.reps):
            rng = _common.substream(self.seed, "clustering", S, rep)
            if diam > 0:
                labels, _ = rand_labels(sub, max(self.sched.n, 2), rng)
            else:
                labels = np.zeros(p, dtype=np.intp)
            blocks = [self.lift(_mask(np.flatnonzero(labels == b)), cols) for b in np.unique(labels)]
            worst = max(c.cost for c in best[1:])
            for h, C, q, rest in states:
                if _gt(h, worst):
                    break
                lo = max(q, 1)
                rems = [B & rest for B in blocks if B & rest]
                if not rems:
                    for kappa in range(1, K + 1):
                        if q <= bounds[kappa] and _lt(h, best[kappa].cost):
                            best[kappa] = self._assemble(table, idx, C, q, [])
                            branch[kappa] = "guess"
                    worst = max(c.cost for c in best[1:])
                    continue
                # every non-empty part needs a ball of its own
                while lo <= K and budgets[lo - q] < len(rems):
                    lo += 1
                if lo > K:
                    continue
                subs = [self.table(R, Kc, depth + 1) for R in rems]
                vecs = [self.cost_vec[R] for R in rems]
                # children only get cheaper with more budget, so this bounds every split
                if _gt(h + sum(v[Kc] for v in vecs), max(c.cost for c in best[lo:])):
                    continue
                evaluated += 1
                top = budgets[K - q]
                split_cost, choice = _best_split(np.array([v[: top + 1] for v in vecs]))
                for kappa in range(lo, K + 1):
                    total = h + split_cost[budgets[kappa - q]]
                    if not np.isfinite(total) or not _lt(total, best[kappa].cost):
                        continue
                    parts = [subs[i][k] for i, k in enumerate(_unwind(choice, budgets[kappa - q]))]
                    if q + sum(len(c) for c in parts) <= bounds[kappa]:
                        best[kappa] = self._assemble(table, idx, C, q, parts)
                        branch[kappa] = "guess"
                worst = max(c.cost for c in best[1:])
        self.trace.add(size=p, level=lvl, depth=depth, branch=branch[K], budgets=K,
                       cost=None if K == 0 else best[K].cost, states=len(table.states),
                       evaluated=evaluated, large_balls=len(masks))
        self._store(S, best)
        return best

    def _store(self, S: int, covers: list) -> None:
        self.memo[S] = covers
        vec = np.array([np.inf if c is None else c.cost for c in covers])
        self.cost_vec[S] = np.minimum.accumulate(vec)

    def _assemble(self, table, idx, C, q, parts) -> Cover:
        balls = [self.ball(idx[j]) for j in table.balls(C, q)]
        for c in parts:
            balls.extend(c.balls)
        return Cover.from_balls(balls, self.alpha)

    def _exact(self, cols, max_balls) -> Cover:
        masks, costs, idx = self.local_balls(cols)
        _, chosen = exact_cover(masks, costs, len(cols), max_balls)
        return self.cover_of(idx[j] for j in chosen)


def _mask(local_idx) -> int:
    m = 0
    for i in local_idx:
        m |= 1 << int(i)
    return m


def _gt(a: float, b: float) -> bool:
    return a > b + _common.SNAP_RTOL * abs(b)


def _lt(a: float, b: float) -> bool:
    return a < b - _common.SNAP_RTOL * abs(b)


def clustering(inst: MetricInstance, cfg: KclusterConfig, P=None, kappa: int | None = None) -> _common.SolveReport:
    """Cover ``P`` (default: all clients) aiming for ``kappa`` (default ``cfg.k``) balls.

    The result may use up to ``floor((1 + 3 lam) ** level(P) * kappa)``
    balls, which at the top level is at most ``floor((1 + eps) * k)``.
    """
    check_normalized(inst)
    t0 = time.perf_counter()
    kappa = cfg.k if kappa is None else int(kappa)
    if kappa < 0:
        raise InvalidK(f"kappa must be non-negative, got {kappa}")
    solver = _Clustering(inst, cfg)
    ids = as_ids(P, inst)
    covers = solver.table(solver.mask_of(ids), kappa)
    cover = covers[kappa]
    if cover is None:
        raise Infeasible("a non-empty set cannot be covered with zero balls")
    lvl = level(inst, ids)
    params = {"epsilon": cfg.epsilon, "k": cfg.k, "kappa": kappa, "beta_base": cfg.beta_base,
              "lemma_constant": cfg.lemma_constant, "max_enum": cfg.max_enum, "alpha": inst.alpha,
              "repetitions": solver.reps, "budget_bound": _common.snap_floor((1 + cfg.epsilon) * cfg.k),
              "ball_bound": solver.count_bound(lvl, kappa), **asdict(solver.sched)}
    return _common.SolveReport("kcluster", cover, cfg.seed, not solver.truncated, params,
                               solver.trace, time.perf_counter() - t0)


def solve_exact_report(inst: MetricInstance, k: int, seed: int = 0) -> _common.SolveReport:
    t0 = time.perf_counter()
    cover = exact_kcluster(inst, None, k)
    return _common.SolveReport("kcluster", cover, seed, True, {"alpha": inst.alpha, "k": k},
                               wall_time=time.perf_counter() - t0, exact=True)
