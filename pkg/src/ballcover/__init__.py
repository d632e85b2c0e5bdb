"""Covering metric points with balls: partitioning, approximation solvers and exact oracles."""
from .errors import (
    BallcoverError,
    CapApplied,
    Infeasible,
    InstanceError,
    NormalizationError,
    TooLarge,
    TriangleViolation,
)
from .harness import InstanceSpec, generate, run_experiment
from .kcluster import KclusterConfig, budget_dp, clustering, exact_kcluster, structure_bound_kcluster
from .mcc import (
    MccConfig,
    best_single_ball,
    exact_mcc,
    level,
    point_cover,
    preprocess_aspect_ratio,
    structure_bound_mcc,
)
from .metric import (
    Ball,
    Cover,
    MetricInstance,
    ball_members,
    build_instance,
    candidate_balls,
    diam,
    is_cover,
    load_instance,
    normalize,
    save_instance,
)
from .partition import (
    build_frt_counterexample,
    frt_partition,
    intersection_stats,
    make_dist,
    rand_partition,
    sample_beta,
)
from .reduction import Graph, min_dominating_set, reduce_dsp_to_mcc, verify_reduction

__version__ = "0.1.0"
