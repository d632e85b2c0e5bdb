from __future__ import annotations

import math
import warnings
import zlib
from dataclasses import dataclass, field

import numpy as np

from .errors import CapApplied
from .metric import Cover

SNAP_RTOL = 1e-12
SATURATION = 2**62


def snap_ceil(x: float) -> int:
    """Ceiling that ignores float noise: values within 1e-12 (relative) of an integer snap to it."""
    r = round(x)
    if abs(x - r) <= SNAP_RTOL * max(1.0, abs(x)):
        return int(r)
    return math.ceil(x)


def snap_floor(x: float) -> int:
    r = round(x)
    if abs(x - r) <= SNAP_RTOL * max(1.0, abs(x)):
        return int(r)
    return math.floor(x)


def saturating_ceil_pow(base: float, alpha: float, cap: int = SATURATION) -> int:
    """``ceil(base ** alpha)``, clamped to ``cap`` with a :class:`CapApplied` warning."""
    if base <= 0:
        return 0
    if alpha * math.log2(base) >= math.log2(cap):
        warnings.warn(f"bound {base}^{alpha} saturated at {cap}", CapApplied, stacklevel=3)
        return cap
    return min(snap_ceil(base**alpha), cap)


def ceil_log2(x: float) -> int:
    """Smallest integer ``i`` with ``x <= 2**i`` (``x > 0``)."""
    m, e = math.frexp(x)
    return e - 1 if m == 0.5 else e


def stream_id(name: str) -> int:
    return zlib.crc32(name.encode())


def substream(seed: int, name: str, *key: int) -> np.random.Generator:
    """Independent generator for a named purpose and integer key under one top-level seed."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(stream_id(name), *(int(k) for k in key)))
    return np.random.default_rng(ss)


@dataclass
class RecursionTrace:
    """One record per distinct recursive call (calls are memoized by subset)."""

    records: list = field(default_factory=list)

    def add(self, **rec) -> None:
        self.records.append(rec)

    def summary(self) -> dict:
        recs = self.records
        return {
            "calls": len(recs),
            "base_cases": sum(r["branch"] == "base" for r in recs),
            "max_depth": max((r["depth"] for r in recs), default=0),
            "max_level": max((r["level"] for r in recs), default=0),
            "guesses_evaluated": sum(r.get("evaluated", 0) for r in recs),
            "coverage_states": sum(r.get("states", 0) for r in recs),
        }


@dataclass
class SolveReport:
    problem: str
    cover: Cover
    seed: int
    faithful: bool
    params: dict
    trace: RecursionTrace = field(default_factory=RecursionTrace)
    wall_time: float = 0.0
    exact: bool = False

    @property
    def cost(self) -> float:
        return self.cover.cost

    @property
    def n_balls(self) -> int:
        return len(self.cover)

    def to_dict(self, timing: bool = False) -> dict:
        out = {
            "problem": self.problem,
            "cover": self.cover.to_dict(),
            "cost": self.cover.cost,
            "ball_count": len(self.cover),
            "seed": self.seed,
            "faithful": self.faithful,
            "exact": self.exact,
            "params": self.params,
            "trace_summary": self.trace.summary(),
        }
        if timing:
            out["wall_time"] = self.wall_time
        return out
