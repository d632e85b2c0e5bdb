"""Slow, literal re-implementations used as oracles on tiny inputs.

Nothing here shares code with the DP machinery in the package: subsets of
balls and budget vectors are enumerated one by one.
"""
import itertools
import math

import numpy as np
from scipy.sparse.csgraph import shortest_path
from scipy.spatial.distance import cdist

from ballcover import _common
from ballcover.kcluster import _Clustering
from ballcover.mcc import _PointCover, schedule
from ballcover.metric import MetricInstance, normalize
from ballcover.partition import rand_labels
from ballcover.setcover import bits


def random_instance(rng, n_clients, n_servers=0, alpha=1.0, spread=10.0):
    n = n_clients + n_servers
    w = rng.uniform(1.0, spread, (n, n))
    w = np.triu(w, 1)
    d = shortest_path(w + w.T, directed=False)
    roles = ["client"] * n_clients + ["server"] * n_servers if n_servers else None
    return normalize(MetricInstance.from_matrix(d, roles, alpha))


def euclidean_instance(rng, n_clients, n_servers=0, alpha=1.0, dim=2):
    pts = rng.uniform(0.0, 10.0, (n_clients + n_servers, dim))
    roles = ["client"] * n_clients + ["server"] * n_servers if n_servers else None
    return normalize(MetricInstance.from_matrix(cdist(pts, pts), roles, alpha))


def brute_cover(masks, costs, p, max_balls=None):
    """Cheapest subset of balls covering all ``p`` points, by listing subsets."""
    full = (1 << p) - 1
    best = math.inf
    top = len(masks) if max_balls is None else min(max_balls, len(masks))
    for q in range(top + 1):
        for combo in itertools.combinations(range(len(masks)), q):
            m = 0
            for j in combo:
                m |= masks[j]
            if m & full == full:
                best = min(best, math.fsum(costs[j] for j in combo))
    return best


def brute_coverage(masks, costs, p):
    """Cheapest collection whose union is exactly ``C``, for every reachable ``C``."""
    best = {}
    for q in range(len(masks) + 1):
        for combo in itertools.combinations(range(len(masks)), q):
            m = 0
            for j in combo:
                m |= masks[j]
            c = math.fsum(costs[j] for j in combo)
            if c < best.get(m, math.inf):
                best[m] = c
    return best


def literal_point_cover(inst, cfg, sched=None):
    """Partition-and-guess cover cost with every large-ball subset listed explicitly.

    Uses the same per-subset random streams as the package solver so the two
    see identical partitions.
    """
    sched = sched or schedule(inst, cfg.epsilon, cfg.lemma_constant)
    s = _PointCover(inst, cfg, sched)
    nb = len(s.costs)
    memo = {}

    def inside(j, c):
        return s.to_centers[j, c] <= s.radii[j]

    def rec(S):
        if S == 0:
            return 0.0
        if S in memo:
            return memo[S]
        cols = bits(S)
        p = len(cols)
        if p < cfg.kappa_base:
            best = min(
                sum(s.costs[j] for j in Q)
                for q in range(1, cfg.kappa_base + 1)
                for Q in itertools.combinations(range(nb), q)
                if all(any(inside(j, c) for j in Q) for c in cols)
            )
            memo[S] = best
            return best
        sub = s.sub_dist(cols)
        diam = sub.max()
        best = s.single_ball(cols).cost
        rng = _common.substream(s.seed, "point_cover", S)
        labels = rand_labels(sub, max(sched.n, 2), rng)[0] if diam > 0 else np.zeros(p, int)
        large = [j for j in range(nb) if s.radii[j] > diam / sched.gamma]
        for q in range(min(len(large), sched.bound) + 1):
            for Q in itertools.combinations(large, q):
                covered = {c for c in cols for j in Q if inside(j, c)}
                total = sum(s.costs[j] for j in Q)
                for b in np.unique(labels):
                    R = [cols[i] for i in np.flatnonzero(labels == b) if cols[i] not in covered]
                    total += rec(sum(1 << c for c in R))
                best = min(best, total)
        memo[S] = best
        return best

    return rec((1 << len(s.X)) - 1)


def literal_clustering(inst, cfg, kappa):
    """Budgeted partition-and-guess cost with every subset and budget vector listed."""
    s = _Clustering(inst, cfg)
    nb = len(s.costs)
    memo = {}

    def inside(j, c):
        return s.to_centers[j, c] <= s.radii[j]

    def rec(S, K):
        if S == 0:
            return [(0.0, 0)] * (K + 1)
        if (S, K) in memo:
            return memo[(S, K)]
        cols = bits(S)
        p = len(cols)
        sub = s.sub_dist(cols)
        diam = sub.max()
        lvl = int(math.floor(math.log2(diam))) + 1 if p > 1 and diam >= 1 else 0
        if p < cfg.beta_base:
            out = [(math.inf, 0)]
            for kap in range(1, K + 1):
                out.append(min(
                    (sum(s.costs[j] for j in Q), len(Q))
                    for q in range(1, min(kap, cfg.beta_base) + 1)
                    for Q in itertools.combinations(range(nb), q)
                    if all(any(inside(j, c) for j in Q) for c in cols)
                ))
            memo[(S, K)] = out
            return out
        best = [(math.inf, 0)] + [(s.single_ball(cols).cost, 1)] * K
        Kc = s.relaxed(K)
        large = [j for j in range(nb) if s.radii[j] > diam / s.sched.gamma
                 and any(inside(j, c) for c in cols)]
        for rep in range(s.reps):
            rng = _common.substream(s.seed, "clustering", S, rep)
            labels = rand_labels(sub, max(s.sched.n, 2), rng)[0] if diam > 0 else np.zeros(p, int)
            for q in range(min(len(large), s.sched.bound) + 1):
                for Q in itertools.combinations(large, q):
                    covered = {c for c in cols for j in Q if inside(j, c)}
                    h = sum(s.costs[j] for j in Q)
                    rems = []
                    for b in np.unique(labels):
                        R = sum(1 << cols[i] for i in np.flatnonzero(labels == b) if cols[i] not in covered)
                        if R:
                            rems.append(rec(R, Kc))
                    for kap in range(1, K + 1):
                        bound = s.count_bound(lvl, kap)
                        if not rems:
                            if q <= bound and h < best[kap][0]:
                                best[kap] = (h, q)
                            continue
                        if kap < q:
                            continue
                        B = s.relaxed(kap - q)
                        for vec in itertools.product(range(B + 1), repeat=len(rems)):
                            if sum(vec) > B:
                                continue
                            c = h + sum(r[v][0] for r, v in zip(rems, vec))
                            n = q + sum(r[v][1] for r, v in zip(rems, vec))
                            if n <= bound and c < best[kap][0] * (1 - 1e-12):
                                best[kap] = (c, n)
        memo[(S, K)] = best
        return best

    return rec((1 << len(s.X)) - 1, kappa)[kappa][0]


def budget_vectors_min(costs, total_budget):
    """Minimum over every budget vector with sum at most ``total_budget``."""
    tau = len(costs)
    best = math.inf
    for vec in itertools.product(range(total_budget + 1), repeat=tau):
        if sum(vec) <= total_budget:
            best = min(best, math.fsum(costs[i][k] for i, k in enumerate(vec)))
    return best


def domination_number(n, edges):
    adj = {v: {v} for v in range(n)}
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    for size in range(1, n + 1):
        for combo in itertools.combinations(range(n), size):
            if set().union(*(adj[v] for v in combo)) == set(range(n)):
                return size
    return n
