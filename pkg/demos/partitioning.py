# %% [markdown]
# # Random partitions and a probe ball
#
# Two ways to cut a point set into pieces of at most half its diameter, and
# how many pieces a small ball ends up touching.

# %%
import numpy as np

from ballcover import Ball, build_frt_counterexample, intersection_stats, make_dist, rand_partition, sample_beta
from ballcover.harness import InstanceSpec, generate

# %% [markdown]
# The radius distribution puts half its mass on the bottom interval of
# `[delta/8, delta/4]`, a quarter on the next, and so on.

# %%
d = make_dist(8.0, 16)
print("interval edges:", d.edges)
print("masses:", [str(m) for m in d.exact_masses()])
b = sample_beta(d, np.random.default_rng(0), size=100_000)
print("empirical:", np.bincount(d.interval_of(b)) / b.size)

# %% [markdown]
# One partition of 40 random points in the plane.

# %%
inst = generate(InstanceSpec("euclidean_uniform", {"n": 40}, seed=1))
part = rand_partition(inst, None, rng=7)
print(len(part.blocks), "blocks, sizes", sorted(len(blk) for blk in part.blocks))

# %% [markdown]
# On the spoked tree below, the per-point radii keep the probe ball inside a
# single block every time, while a single shared radius with a random order
# splits it more and more as the branching grows.

# %%
for branching in (4, 8, 16, 24):
    ce = build_frt_counterexample(branching)
    row = {s: intersection_stats(ce.instance, None, ce.probe, s, trials=2000, seed=0).mean
           for s in ("rand", "frt")}
    print(f"b={branching:2d}  n={ce.instance.n_points:3d}  rand={row['rand']:.3f}  frt={row['frt']:.3f}")

# %%
st = intersection_stats(inst, None, Ball(0, 0.5), "rand", trials=2000, seed=2)
print("probe of radius 0.5:", st.mean, "blocks on average; lemma bound", st.lemma_bound())
