import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ballcover.errors import CapApplied, Infeasible, InvalidK, MissingEntry, TooLarge
from ballcover.kcluster import (
    KclusterConfig,
    budget_dp,
    clustering,
    exact_kcluster,
    repetitions,
    structure_bound_kcluster,
)
from ballcover.mcc import level
from ballcover.metric import Ball, Cover, MetricInstance, candidate_balls, is_cover

from reference import budget_vectors_min, euclidean_instance, literal_clustering, random_instance


def line(xs, alpha=1.0):
    xs = np.asarray(xs, dtype=float)
    return MetricInstance.from_matrix(np.abs(xs[:, None] - xs[None, :]), None, alpha)


def costed(block, c):
    """A one-ball cover whose cost is ``c`` when alpha is 1."""
    return None if math.isinf(c) else Cover.from_balls([Ball(block, float(c))], 1.0)


@pytest.mark.parametrize("alpha, gamma, want", [(1, 1, 1), (2, 3, 9), (1, 2.5, 3)])
def test_structure_bound(alpha, gamma, want):
    assert structure_bound_kcluster(alpha, gamma) == want


def test_structure_bound_rejects_small_gamma():
    with pytest.raises(ValueError):
        structure_bound_kcluster(1, 0.5)


def test_repetitions():
    assert repetitions(1) == 1
    assert repetitions(10) == math.ceil(2 * math.log(10) / math.log(1.5))


def test_config_validation():
    with pytest.raises(InvalidK):
        KclusterConfig(0.5, 0)
    with pytest.raises(ValueError):
        KclusterConfig(0.0, 2)


def test_single_point():
    inst = line([0, 1, 5])
    rep = clustering(inst, KclusterConfig(0.5, 1), P=[1])
    assert rep.cost == 0 and rep.cover.balls == (Ball(1, 0.0),)


def test_two_points_one_ball():
    rep = clustering(line([0, 1]), KclusterConfig(0.5, 1))
    assert rep.cost == 1.0 and len(rep.cover) == 1


def test_zero_budget():
    inst = line([0, 1])
    assert clustering(inst, KclusterConfig(0.5, 1), P=[], kappa=0).cost == 0
    with pytest.raises(Infeasible):
        clustering(inst, KclusterConfig(0.5, 1), kappa=0)


def test_budget_dp_single_block_passes_through():
    covers = {(0, b): Cover.from_balls([Ball(0, float(5 - b))], 1.0) for b in range(4)}
    assert budget_dp(covers, 3) == covers[(0, 3)]


def test_budget_dp_two_blocks():
    first = {(0, k): costed(0, 4 - k) for k in range(5)}
    second = {(1, k): costed(1, 2 * (4 - k)) for k in range(5)}
    assert budget_dp({**first, **second}, 4).cost == 4.0
    # the split giving nothing to the first block is the unique optimum
    totals = [(4 - k) + 2 * (4 - (4 - k)) for k in range(5)]
    assert totals.index(min(totals)) == 0


def test_budget_dp_assembles_balls_from_the_chosen_split():
    covers = {
        (0, 0): None, (0, 1): Cover.from_balls([Ball(0, 2.0)], 1.0), (0, 2): Cover.from_balls([Ball(0, 0.0), Ball(1, 0.0)], 1.0),
        (1, 0): None, (1, 1): Cover.from_balls([Ball(5, 3.0)], 1.0), (1, 2): Cover.from_balls([Ball(5, 0.5), Ball(6, 0.5)], 1.0),
    }
    assert budget_dp(covers, 2).balls == (Ball(0, 2.0), Ball(5, 3.0))
    assert budget_dp({**covers, (0, 3): None, (1, 3): None}, 3).cost == 3.0
    with pytest.raises(Infeasible):
        budget_dp(covers, 1)


def test_budget_dp_missing_entry():
    with pytest.raises(MissingEntry):
        budget_dp({(0, 0): costed(0, 1), (0, 1): costed(0, 1), (1, 0): costed(1, 1)}, 1)
    with pytest.raises(MissingEntry):
        budget_dp({(0, 0): costed(0, 1), (2, 0): costed(2, 1)}, 0)


def test_budget_dp_against_every_budget_vector():
    rng = np.random.default_rng(0)
    for _ in range(100):
        tau, B = int(rng.integers(1, 5)), int(rng.integers(0, 7))
        table = rng.uniform(0, 10, (tau, B + 1))
        table[rng.uniform(size=table.shape) < 0.2] = np.inf
        covers = {(i, b): costed(i, table[i, b]) for i in range(tau) for b in range(B + 1)}
        want = budget_vectors_min(table, B)
        if math.isinf(want):
            with pytest.raises(Infeasible):
                budget_dp(covers, B)
        else:
            assert budget_dp(covers, B).cost == pytest.approx(want)


def test_exact_budget_at_least_size_is_free():
    inst = random_instance(np.random.default_rng(1), 5)
    assert exact_kcluster(inst, k=5).cost == 0
    assert exact_kcluster(inst, k=9).cost == 0


def test_exact_one_ball_is_best_single_ball():
    inst = random_instance(np.random.default_rng(2), 6, alpha=1.5)
    best = min(b.radius ** 1.5 for b in candidate_balls(inst, "kcluster").balls
               if is_cover(inst, [b], None))
    assert exact_kcluster(inst, k=1).cost == pytest.approx(best)


def test_exact_two_triads():
    pts = np.array([[0, 0], [1, 0], [0.5, math.sqrt(3) / 2]])
    pts = np.vstack([pts, pts + [10, 0]])
    d = np.linalg.norm(pts[:, None] - pts[None, :], axis=-1)
    inst = MetricInstance.from_matrix(d)
    assert exact_kcluster(inst, k=2).cost == pytest.approx(2.0)


def test_exact_limits():
    with pytest.raises(TooLarge):
        exact_kcluster(random_instance(np.random.default_rng(0), 17), k=2)
    with pytest.raises(InvalidK):
        exact_kcluster(line([0, 1]), k=-1)


def _tiny_runs():
    rng = np.random.default_rng(31)
    for i in range(12):
        inst = (euclidean_instance if i % 2 else random_instance)(rng, 5)
        for k in (1, 2):
            for seed in (0, 1):
                yield inst, KclusterConfig(3.0, k, seed=seed, lemma_constant=0.12)


def test_matches_literal_enumeration():
    for inst, cfg in _tiny_runs():
        got = clustering(inst, cfg).cost
        assert got == pytest.approx(literal_clustering(inst, cfg, cfg.k), rel=1e-9)


def _check_guarantees(inst, cfg):
    rep = clustering(inst, cfg)
    assert is_cover(inst, rep.cover.balls, None)
    bound = rep.params["ball_bound"]
    assert bound == math.floor((1 + 3 * rep.params["lam"]) ** level(inst, inst.clients) * cfg.k + 1e-9)
    assert len(rep.cover) <= bound
    assert len(rep.cover) <= rep.params["budget_bound"]
    assert all(inst.roles[b.center] != "server" for b in rep.cover.balls)
    assert rep.cost >= exact_kcluster(inst, k=bound).cost * (1 - 1e-12)
    return rep


def test_guarantees_on_random_instances():
    rng = np.random.default_rng(4)
    for i in range(6):
        inst = random_instance(rng, 9)
        for k in (2, 3):
            _check_guarantees(inst, KclusterConfig(0.6, k, seed=i))


def test_extreme_epsilon():
    inst = euclidean_instance(np.random.default_rng(5), 8)
    rep = clustering(inst, KclusterConfig(1.0, 2))
    L = rep.params["L"]
    rep = _check_guarantees(inst, KclusterConfig(6.0 * L, 2))
    assert rep.params["lam"] == 1.0


def test_ten_points_within_bicriteria_bound():
    inst = random_instance(np.random.default_rng(10), 10)
    opt = exact_kcluster(inst, k=3).cost
    good = 0
    for seed in range(20):
        rep = _check_guarantees(inst, KclusterConfig(0.6, 3, seed=seed))
        assert len(rep.cover) <= math.floor(1.6 * 3)
        good += rep.cost <= 1.6 * opt * (1 + 1e-12)
    assert good >= 20 * 2 / 3


def test_enumeration_cap_is_reported():
    inst = euclidean_instance(np.random.default_rng(6), 8)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        rep = clustering(inst, KclusterConfig(0.6, 2, max_enum=1))
    assert not rep.faithful
    assert any(issubclass(w.category, CapApplied) for w in caught)
    assert is_cover(inst, rep.cover.balls, None)


def test_deterministic_given_seed():
    inst = random_instance(np.random.default_rng(7), 9)
    cfg = KclusterConfig(0.6, 3, seed=5)
    a, b = clustering(inst, cfg), clustering(inst, cfg)
    assert a.cover == b.cover and a.trace.records == b.trace.records


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 7), st.integers(1, 4), st.sampled_from([1.0, 2.0]))
def test_always_valid_and_within_count_bound(seed, n, k, alpha):
    inst = random_instance(np.random.default_rng(seed), n, alpha=alpha)
    _check_guarantees(inst, KclusterConfig(1.0, k, seed=seed))
