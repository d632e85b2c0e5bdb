"""Bitmask dynamic programs over small point sets.

Two tables are built here, both over a fixed list of balls described by
their coverage bitmask on the ``p`` points of a subset and their cost:

* :func:`exact_cover` - minimum-cost weighted set cover of all ``p`` points,
  optionally with at most ``max_balls`` balls.
* :func:`coverage_table` - for every set ``C`` that is *exactly* the union of
  some ball collection, the cheapest such collection (per collection size
  when a size limit applies).  The solvers use it to evaluate "for every
  guessed set of large balls" without listing the subsets one by one.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import Infeasible, TooLarge

DENSE_LIMIT = 20
SPARSE_BALL_LIMIT = 18
_RTOL = 1e-12


def masks_of(inside: np.ndarray) -> list[int]:
    """Row-wise bitmasks (bit ``i`` = column ``i``) of a boolean matrix."""
    inside = np.atleast_2d(np.asarray(inside, dtype=bool))
    packed = np.packbits(inside, axis=1, bitorder="little")
    return [int.from_bytes(row.tobytes(), "little") for row in packed]


def bits(mask: int) -> list[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def _lt(a, b):
    """Elementwise ``a`` strictly below ``b`` beyond float noise (``b`` may be inf)."""
    with np.errstate(invalid="ignore"):
        return np.where(np.isinf(b), np.isfinite(a), a < b - _RTOL * np.abs(b))


def _close(a, b):
    with np.errstate(invalid="ignore"):
        return np.where(np.isinf(b), np.isinf(a), np.abs(a - b) <= _RTOL * np.abs(b))


def _scatter_best(tgt, cand, cnt):
    """Best (lowest cand, then lowest cnt, then first) entry for each distinct target."""
    order = np.lexsort((np.arange(tgt.size), cnt, cand, tgt))
    t = tgt[order]
    first = np.ones(t.size, dtype=bool)
    first[1:] = t[1:] != t[:-1]
    return order[first]


def exact_cover(masks, costs, p: int, max_balls: int | None = None):
    """Minimum-cost selection of balls whose masks cover all ``p`` points.

    Ties on cost go to fewer balls, then to the first solution found.
    Returns ``(cost, indices)``; raises :class:`Infeasible` when no selection
    (within ``max_balls``) covers everything.
    """
    if p > DENSE_LIMIT:
        raise TooLarge(f"exact cover over {p} points exceeds the limit of {DENSE_LIMIT}")
    full = (1 << p) - 1
    if p == 0:
        return 0.0, ()
    if max_balls is not None and max_balls <= 0:
        raise Infeasible("no balls allowed for a non-empty set")
    masks = np.asarray([m for m in masks], dtype=np.int64)
    costs = np.asarray(costs, dtype=np.float64)
    by_point = [np.flatnonzero(masks & (1 << i)) for i in range(p)]
    size = 1 << p
    K = p if max_balls is None else min(max_balls, p)
    # layer q holds covers built from exactly q balls
    cost = np.full((K + 1, size), np.inf)
    par_ball = np.full((K + 1, size), -1, dtype=np.int64)
    par_mask = np.full((K + 1, size), -1, dtype=np.int64)
    cost[0, 0] = 0.0
    all_masks = np.arange(size, dtype=np.int64)
    # lowest uncovered point of every mask
    low = np.full(size, p, dtype=np.int64)
    for i in range(p - 1, -1, -1):
        low[(all_masks & (1 << i)) == 0] = i
    for q in range(K):
        live = np.flatnonzero(np.isfinite(cost[q]) & (all_masks != full))
        if live.size == 0:
            continue
        src_all, tgt_all, cand_all, ball_all = [], [], [], []
        lows = low[live]
        for i in np.unique(lows):
            src = live[lows == i]
            for j in by_point[i]:
                src_all.append(src)
                tgt_all.append(src | masks[j])
                cand_all.append(cost[q, src] + costs[j])
                ball_all.append(np.full(src.size, j, dtype=np.int64))
        if not src_all:
            continue
        src = np.concatenate(src_all)
        tgt = np.concatenate(tgt_all)
        cand = np.concatenate(cand_all)
        ball = np.concatenate(ball_all)
        sel = _scatter_best(tgt, cand, np.zeros_like(tgt))
        t, cv = tgt[sel], cand[sel]
        imp = _lt(cv, cost[q + 1, t])
        t = t[imp]
        cost[q + 1, t] = cv[imp]
        par_ball[q + 1, t] = ball[sel][imp]
        par_mask[q + 1, t] = src[sel][imp]
    finals = cost[:, full]
    if not np.any(np.isfinite(finals)):
        raise Infeasible("no cover within the ball budget")
    best_q = None
    for q in range(K + 1):
        if best_q is None or _lt(finals[q], finals[best_q]):
            best_q = q
    chosen = []
    m, q = full, best_q
    while q > 0:
        chosen.append(int(par_ball[q, m]))
        m = int(par_mask[q, m])
        q -= 1
    return float(finals[best_q]), tuple(sorted(chosen))


@dataclass
class CoverageTable:
    """Cheapest ball collection for every exactly-reachable coverage set.

    ``states`` lists ``(cost, C, q)`` sorted by cost; ``q`` is the number of
    balls or ``None`` when collection size was not tracked.
    """

    states: list
    _recon: object

    def balls(self, C: int, q: int | None = None) -> tuple[int, ...]:
        return self._recon(C, q)


def coverage_table(masks, costs, p: int, qmax: int | None = None) -> CoverageTable:
    """Cheapest collection whose union (restricted to the ``p`` points) is exactly ``C``.

    Only collections in which every ball adds new points are considered; any
    other collection is beaten by dropping the redundant ball.  With ``qmax``
    the table is indexed by ``(C, q)`` for ``q <= qmax``.  Dense tables are
    used up to ``DENSE_LIMIT`` points; beyond that the collections are listed
    explicitly, which needs a short ball list.
    """
    masks = [int(m) for m in masks]
    costs = [float(c) for c in costs]
    if p <= DENSE_LIMIT:
        return _dense_coverage(masks, costs, p, qmax)
    if len(masks) > SPARSE_BALL_LIMIT:
        raise TooLarge(
            f"{len(masks)} balls over {p} points: explicit enumeration needs a cap (max_enum)"
        )
    return _sparse_coverage(masks, costs, qmax)


def _dense_coverage(masks, costs, p, qmax):
    size = 1 << p
    layers = 1 if qmax is None else qmax + 1
    cost = np.full((layers, size), np.inf)
    cost[0, 0] = 0.0
    idx = np.arange(size, dtype=np.int64)
    hist = []
    for j, (bm, c) in enumerate(zip(masks, costs)):
        rec = {}
        adds = (idx & bm) != bm
        levels = [0] if qmax is None else range(qmax, 0, -1)
        for q in levels:
            srcq = 0 if qmax is None else q - 1
            prev = cost[srcq]
            ok = adds & np.isfinite(prev)
            src = idx[ok]
            if src.size == 0:
                continue
            tgt = src | bm
            cand = prev[ok] + c
            sel = _scatter_best(tgt, cand, np.zeros_like(tgt))
            t, cv, s = tgt[sel], cand[sel], src[sel]
            imp = _lt(cv, cost[q, t])
            if imp.any():
                cost[q, t[imp]] = cv[imp]
                rec[q] = (t[imp], s[imp])
        hist.append(rec)

    def recon(C, q):
        level = 0 if qmax is None else q
        out = []
        upto = len(hist)
        while C:
            for j in range(upto - 1, -1, -1):
                entry = hist[j].get(level)
                if entry is None:
                    continue
                t, s = entry
                k = np.searchsorted(t, C)
                if k < t.size and t[k] == C:
                    out.append(j)
                    C = int(s[k])
                    upto = j
                    if qmax is not None:
                        level -= 1
                    break
            else:
                raise AssertionError("coverage table reconstruction failed")
        return tuple(sorted(out))

    states = []
    for level in range(layers):
        fin = np.flatnonzero(np.isfinite(cost[level]))
        q = None if qmax is None else level
        states.extend((float(cost[level, C]), int(C), q) for C in fin)
    states.sort(key=lambda s: (s[0], -1 if s[2] is None else s[2], s[1]))
    return CoverageTable(states, recon)


def _sparse_coverage(masks, costs, qmax):
    best = {}
    n = len(masks)
    top = n if qmax is None else min(qmax, n)
    for q in range(top + 1):
        for combo in itertools.combinations(range(n), q):
            C = 0
            redundant = False
            for j in combo:
                if masks[j] | C == C:
                    redundant = True
                    break
                C |= masks[j]
            if redundant:
                continue
            c = math.fsum(costs[j] for j in combo)
            key = (C, None if qmax is None else q)
            if key not in best or c < best[key][0] - _RTOL * abs(best[key][0]):
                best[key] = (c, combo)
    states = sorted(((v[0], k[0], k[1]) for k, v in best.items()),
                    key=lambda s: (s[0], -1 if s[2] is None else s[2], s[1]))

    def recon(C, q):
        return tuple(sorted(best[(C, q)][1]))

    return CoverageTable(states, recon)
