import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ballcover.errors import (
    AsymmetricMatrix,
    DisconnectedGraph,
    EmptySubset,
    NegativeDistance,
    NormalizationError,
    NoServers,
    TriangleViolation,
)
from ballcover.mcc import exact_mcc
from ballcover.metric import (
    Ball,
    Cover,
    MetricInstance,
    ball_members,
    better,
    build_instance,
    candidate_balls,
    check_normalized,
    cover_cost,
    diam,
    instance_to_dict,
    is_cover,
    load_instance,
    normalize,
    save_instance,
    validate_metric,
)
from ballcover.partition import build_frt_counterexample
from ballcover.reduction import Graph, reduce_dsp_to_mcc

from reference import random_instance


def line(xs, roles=None, alpha=1.0):
    xs = np.asarray(xs, dtype=float)
    return MetricInstance.from_matrix(np.abs(xs[:, None] - xs[None, :]), roles, alpha)


def test_single_point_instance():
    inst = build_instance({"points": [{"id": 0, "role": "client"}], "metric": {"type": "matrix", "d": []}})
    assert inst.n_points == 1
    assert inst.dist[0, 0] == 0.0


def test_path_graph_composes_shortest_paths():
    inst = build_instance({
        "points": [{"id": i} for i in range(3)],
        "metric": {"type": "graph", "edges": [[0, 1, 1.0], [1, 2, 1.0]]},
    })
    assert inst.dist[0, 2] == 2.0


def test_euclidean_instance():
    inst = build_instance({
        "alpha": 2.0,
        "points": [{"id": 0, "role": "client"}, {"id": 1, "role": "server"}],
        "metric": {"type": "euclidean", "coords": [[0, 0], [3, 4]]},
    })
    assert inst.dist[0, 1] == pytest.approx(5.0)
    assert inst.alpha == 2.0
    assert list(inst.clients) == [0] and list(inst.servers) == [1]


def test_reduction_metric_on_three_vertices_is_valid():
    inst = reduce_dsp_to_mcc(Graph.from_edges(3, [(0, 1)]))
    validate_metric(inst.dist)
    assert set(np.unique(inst.dist)) <= {0.0, 1.0, 2.0, 3.0}


def test_triangle_violation_names_a_witness():
    d = np.array([[0, 1, 5], [1, 0, 1], [5, 1, 0]], dtype=float)
    with pytest.raises(TriangleViolation) as err:
        MetricInstance.from_matrix(d)
    e = err.value
    assert {e.i, e.j} == {0, 2} and e.k == 1
    assert e.excess == pytest.approx(3.0)


def test_triangle_tolerance_absorbs_rounding():
    d = np.array([[0, 1, 2 + 1e-12], [1, 0, 1], [2 + 1e-12, 1, 0]])
    MetricInstance.from_matrix(d)


@pytest.mark.parametrize("d, exc", [
    ([[0, 1], [2, 0]], AsymmetricMatrix),
    ([[0, -1], [-1, 0]], NegativeDistance),
])
def test_invalid_matrices(d, exc):
    with pytest.raises(exc):
        MetricInstance.from_matrix(np.array(d, dtype=float))


def test_disconnected_graph():
    with pytest.raises(DisconnectedGraph):
        build_instance({"points": [{"id": i} for i in range(3)],
                        "metric": {"type": "graph", "edges": [[0, 1, 1.0]]}})


def test_ball_members():
    inst = line([0, 0, 1, 3])
    assert ball_members(inst, Ball(0, 0.0)) == {0, 1}
    assert ball_members(inst, Ball(0, 3.0), [1, 2, 3]) == {1, 2, 3}


def test_ball_members_on_reduction_instance():
    g = Graph.from_edges(4, [(0, 1), (1, 2)])
    inst = reduce_dsp_to_mcc(g)
    n = g.n
    # server of vertex 1 reaches its own client and its neighbours' clients
    assert ball_members(inst, Ball(n + 1, 1.0)) == {0, 1, 2, n + 1}


def test_diam():
    inst = line([0, 5, 2])
    assert diam(inst, [1]) == 0.0
    assert diam(inst, [0, 1]) == 5.0
    with pytest.raises(EmptySubset):
        diam(inst, [])


def test_counterexample_diameter_is_delta():
    ce = build_frt_counterexample(3)
    assert diam(ce.instance, range(ce.instance.n_points)) == pytest.approx(ce.delta)
    leaf = ce.leaves[0][0]
    assert ce.instance.dist[ce.pendant, leaf] == pytest.approx(ce.delta)


def test_candidate_balls_basic():
    inst = line([0, 2], ["client", "server"])
    assert candidate_balls(inst, "mcc").balls == (Ball(1, 2.0),)


def test_candidate_balls_without_servers():
    with pytest.raises(NoServers):
        candidate_balls(line([0, 1], ["client", "client"]), "mcc")


def test_candidate_balls_distinct_distances():
    rng = np.random.default_rng(0)
    inst = random_instance(rng, 5, 3)
    cand = candidate_balls(inst, "mcc")
    assert len(cand) == 15
    assert list(cand.balls) == sorted(cand.balls)


def test_candidate_balls_on_reduction_instance():
    inst = reduce_dsp_to_mcc(Graph.from_edges(5, [(0, 1), (2, 3)]))
    cand = candidate_balls(inst, "mcc")
    assert {b.radius for b in cand.balls} <= {0.0, 1.0, 2.0, 3.0}
    assert len(cand) <= 3 * 5


def test_candidate_balls_include_radius_zero_for_coincident_points():
    inst = MetricInstance.from_matrix(np.array([[0.0, 0.0], [0.0, 0.0]]), ["client", "server"])
    assert Ball(1, 0.0) in candidate_balls(inst, "mcc")


def test_kcluster_candidates_are_centred_on_clients():
    inst = line([0, 1, 4], ["client", "client", "server"])
    cand = candidate_balls(inst, "kcluster")
    assert set(cand.centers) == {0, 1}
    assert len(cand) == 4  # radii {0, 1} around each client


def test_cover_cost_and_is_cover():
    inst = line([0, 1, 3])
    assert cover_cost([], 1.0) == 0.0
    assert is_cover(inst, [], [])
    assert cover_cost([Ball(0, 2.0)], 2.0) == 4.0
    assert cover_cost([Ball(0, 1.0), Ball(1, 3.0)], 1.0) == 4.0
    assert is_cover(inst, [Ball(1, 2.0)], [0, 1, 2])
    assert not is_cover(inst, [Ball(0, 1.0)], [0, 1, 2])


def test_cover_canonical_and_tie_break():
    a = Cover.from_balls([Ball(2, 1.0), Ball(0, 1.0)], 1.0)
    assert a.balls == (Ball(0, 1.0), Ball(2, 1.0))
    assert a.check_cost(1.0)
    b = Cover.from_balls([Ball(1, 2.0)], 1.0)
    assert better(b, a)  # same cost, fewer balls
    assert not better(a, b)
    assert better(a, None)


def test_normalization():
    inst = line([0, 0.5, 2.5], ["client", "client", "server"], alpha=2.0)
    with pytest.raises(NormalizationError):
        check_normalized(inst)
    norm = normalize(inst)
    check_normalized(norm)
    assert norm.dist[0, 1] == pytest.approx(1.0)


def test_coincident_clients_cannot_be_normalized():
    inst = line([0, 0, 1])
    with pytest.raises(NormalizationError):
        normalize(inst)


def test_instance_json_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    inst = random_instance(rng, 4, 2, alpha=1.5)
    path = tmp_path / "inst.json"
    save_instance(inst, path)
    back = load_instance(path)
    assert np.array_equal(back.dist, inst.dist)
    assert back.roles == inst.roles and back.alpha == inst.alpha
    assert json.loads(path.read_text()) == json.loads(json.dumps(instance_to_dict(inst)))


def test_candidate_balls_deterministic():
    rng = np.random.default_rng(4)
    inst = random_instance(rng, 6, 3)
    assert candidate_balls(inst).balls == candidate_balls(inst).balls


def test_exact_optimum_uses_candidate_balls():
    rng = np.random.default_rng(5)
    for _ in range(10):
        inst = random_instance(rng, 6, 3)
        cand = candidate_balls(inst, "mcc")
        assert all(b in cand for b in exact_mcc(inst).balls)


@st.composite
def point_clouds(draw):
    n = draw(st.integers(2, 8))
    coords = draw(st.lists(st.tuples(st.floats(-50, 50), st.floats(-50, 50)), min_size=n, max_size=n))
    return np.array(coords)


@settings(max_examples=60, deadline=None)
@given(point_clouds())
def test_euclidean_instances_satisfy_metric_axioms(pts):
    inst = build_instance({"points": [{"id": i} for i in range(len(pts))],
                           "metric": {"type": "euclidean", "coords": pts.tolist()}})
    d = inst.dist
    assert np.allclose(d, d.T) and np.all(np.diag(d) == 0) and np.all(d >= 0)
    assert np.all(d[:, None, :] <= d[:, :, None] + d[None, :, :] + 1e-9)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.data())
def test_diam_is_monotone(seed, data):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, 7)
    sup = data.draw(st.sets(st.integers(0, 6), min_size=1))
    sub = data.draw(st.sets(st.sampled_from(sorted(sup)), min_size=1))
    assert diam(inst, sub) <= diam(inst, sup)
