# %% [markdown]
# # Covering clients with balls
#
# Minimum cost covering against its exact optimum, then the bicriteria
# k-clustering variant, then the dominating-set gadget.

# %%
import numpy as np

from ballcover import (
    Graph,
    KclusterConfig,
    MccConfig,
    clustering,
    exact_kcluster,
    exact_mcc,
    point_cover,
    verify_reduction,
)
from ballcover.harness import InstanceSpec, generate, run_experiment

# %%
inst = generate(InstanceSpec("random_metric", {"n": 10, "m": 5}, seed=3, alpha=1.5))
opt = exact_mcc(inst)
rep = point_cover(inst, MccConfig(0.5, seed=0))
print("exact:", opt.cost, opt.balls)
print("solver:", rep.cost, rep.cover.balls)
print(rep.trace.summary())

# %% [markdown]
# The default lemma constant makes every ball "large", so the guess list
# covers the optimum outright. A tiny constant forces real recursion.

# %%
small = point_cover(inst, MccConfig(3.0, seed=0, lemma_constant=0.2))
print("small constant:", small.cost, small.trace.summary())

# %%
pts = generate(InstanceSpec("euclidean_uniform", {"n": 12}, seed=4))
for k in (2, 3):
    rep = clustering(pts, KclusterConfig(0.6, k, seed=1))
    print(f"k={k}: exact {exact_kcluster(pts, None, k).cost:.3f}  solver {rep.cost:.3f} "
          f"with {rep.n_balls} balls (allowed {rep.params['budget_bound']})")

# %%
res = run_experiment(InstanceSpec("random_metric", {"n": 8, "m": 4}, seed=5), "mcc", {"epsilon": 0.5}, range(10))
print(res.aggregate)
print(res.to_csv().splitlines()[:3])

# %%
g = Graph.random(8, 0.3, np.random.default_rng(6))
print(verify_reduction(g))
