"""State shared by the two recursive solvers: client indexing, candidate balls, memo keys."""
from __future__ import annotations

import math
import warnings

import numpy as np

from .errors import CapApplied
from .metric import Ball, Cover, MetricInstance, candidate_balls
from .setcover import bits


def level_of_diam(d: float) -> int:
    """Smallest non-negative ``i`` with ``d < 2**i``."""
    if d < 1.0:
        return 0
    return math.frexp(d)[1]


class SubsetSolver:
    """Clients are addressed by position in ``inst.clients``; a subset is an int bitmask."""

    mode = "mcc"

    def __init__(self, inst: MetricInstance, seed: int, max_enum: int | None):
        self.inst = inst
        self.alpha = inst.alpha
        self.seed = int(seed)
        self.max_enum = max_enum
        self.X = np.asarray(inst.clients, dtype=np.intp)
        self.pos = {int(x): i for i, x in enumerate(self.X)}
        cand = candidate_balls(inst, self.mode)
        self.centers = cand.centers
        self.radii = cand.radii
        self.costs = self.radii**self.alpha
        # cheapest first; among equal costs the candidate order (center, radius) decides
        self.order = np.argsort(self.costs, kind="stable")
        self.to_centers = inst.dist[self.centers][:, self.X]
        self.truncated = False
        self.memo = {}

    def mask_of(self, ids) -> int:
        m = 0
        for p in ids:
            m |= 1 << self.pos[int(p)]
        return m

    def ids_of(self, mask: int) -> np.ndarray:
        return self.X[bits(mask)]

    def lift(self, local: int, cols: list[int]) -> int:
        """Local bitmask over ``cols`` (global positions) to a global bitmask."""
        m = 0
        for i in bits(local):
            m |= 1 << cols[i]
        return m

    def ball(self, j: int) -> Ball:
        return Ball(int(self.centers[j]), float(self.radii[j]))

    def cover_of(self, idx) -> Cover:
        return Cover.from_balls((self.ball(j) for j in idx), self.alpha)

    def local_balls(self, cols: list[int], min_radius: float | None = None):
        """Distinct coverage masks on ``cols`` with their cheapest ball.

        Balls covering nothing are dropped; with ``min_radius`` only balls of
        strictly larger radius are kept.  Returns ``(masks, costs, ball_idx)``
        in ascending cost order.
        """
        inside = self.to_centers[:, cols] <= self.radii[:, None]
        keep = inside.any(axis=1)
        if min_radius is not None:
            keep &= self.radii > min_radius
        rows = inside[self.order]
        keep = keep[self.order]
        packed = np.packbits(rows, axis=1, bitorder="little")
        seen = {}
        for r in np.flatnonzero(keep):
            m = int.from_bytes(packed[r].tobytes(), "little")
            if m not in seen:
                seen[m] = int(self.order[r])
        masks = list(seen)
        idx = list(seen.values())
        if self.max_enum is not None and min_radius is not None and len(masks) > self.max_enum:
            masks, idx = masks[: self.max_enum], idx[: self.max_enum]
            self._truncate(f"large-ball enumeration cut to the {self.max_enum} cheapest balls")
        return masks, [float(self.costs[j]) for j in idx], idx

    def single_ball(self, cols: list[int]) -> Cover:
        """Cheapest candidate ball containing every column; ties by (center, radius)."""
        need = self.to_centers[:, cols].max(axis=1)
        ok = np.flatnonzero(self.radii >= need)
        # candidate order is (center, radius), so the first cheapest is the tie-break winner
        j = ok[np.argmin(self.costs[ok])]
        return self.cover_of([j])

    def _truncate(self, msg: str) -> None:
        if not self.truncated:
            warnings.warn(msg, CapApplied, stacklevel=4)
        self.truncated = True

    def sub_dist(self, cols: list[int]) -> np.ndarray:
        ids = self.X[cols]
        return self.inst.dist[np.ix_(ids, ids)]
