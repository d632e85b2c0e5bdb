"""Command-line entry point: ``ballcover <command> ...`` (or ``python -m ballcover``)."""
from __future__ import annotations

import argparse
import json
import sys
import warnings

from . import kcluster, mcc
from .errors import BallcoverError, CapApplied, ReductionMismatch, UsageError
from .harness import GENERATORS, SOLVERS, InstanceSpec, generate, rows_to_csv, run_experiment
from .metric import Ball, instance_to_dict, is_cover, load_instance
from .partition import build_frt_counterexample, intersection_stats
from .reduction import load_graph, reduce_dsp_to_mcc, verify_reduction

EXIT_OK, EXIT_INVALID, EXIT_USAGE = 0, 1, 2


def _dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _flat_report(rep) -> dict:
    return {"problem": rep.problem, "seed": rep.seed, "cost": rep.cost, "ball_count": rep.n_balls,
            "faithful": rep.faithful, "exact": rep.exact,
            "cover": ";".join(f"{b.center}:{b.radius!r}" for b in rep.cover.balls)}


class _Output:
    def __init__(self, args):
        self.path = args.out
        self.fmt = args.format

    def emit(self, payload: dict, rows=None) -> None:
        text = rows_to_csv(rows if rows is not None else [payload]) if self.fmt == "csv" else _dump_json(payload)
        if self.path in (None, "-"):
            sys.stdout.write(text)
        else:
            with open(self.path, "w") as fh:
                fh.write(text)


def _spec_from_args(args) -> InstanceSpec:
    if getattr(args, "spec", None):
        with open(args.spec) as fh:
            return InstanceSpec.from_dict(json.load(fh))
    if not args.generator:
        raise UsageError("give --spec or --generator")
    params = {}
    for key in ("n", "m", "dim", "box", "spread", "b", "weight"):
        val = getattr(args, key, None)
        if val is not None:
            params[key] = val
    if args.graph:
        params["graph"] = load_graph(args.graph).to_dict()
    normalize = None if args.normalize is None else args.normalize == "yes"
    return InstanceSpec(args.generator, params, args.seed, args.alpha, normalize)


def cmd_gen(args, out):
    out.emit(instance_to_dict(generate(_spec_from_args(args))))
    return EXIT_OK


def cmd_partition_stats(args, out):
    if args.instance:
        inst = load_instance(args.instance)
        probe = None
    else:
        if args.b is None:
            raise UsageError("give --instance or --b for the counterexample")
        ce = build_frt_counterexample(args.b)
        inst, probe = ce.instance, ce.probe
    if args.center is not None:
        probe = Ball(args.center, args.radius if args.radius is not None else 1.0)
    if probe is None:
        raise UsageError("give --center and --radius for the probe ball")
    subset = None if args.subset == "all" else _ints(args.subset)
    schemes = ["rand", "frt"] if args.scheme == "both" else [args.scheme]
    result, rows = {}, []
    for scheme in schemes:
        st = intersection_stats(inst, subset, probe, scheme, args.trials, args.seed, strict=args.strict)
        result[scheme] = {"mean": st.mean, "se": st.se, "nonterminal_mean": st.nonterminal_mean,
                          "nonterminal_se": st.nonterminal_se, "lemma_bound": st.lemma_bound(),
                          "trials": st.trials, "seed": st.seed}
        rows.extend({"scheme": scheme, **r} for r in st.rows())
    out.emit({"probe": {"center": probe.center, "radius": probe.radius}, "schemes": result}, rows)
    return EXIT_OK


def _finish_solve(args, out, inst, rep, extra_ok=True):
    out.emit(rep.to_dict(timing=args.timing), [_flat_report(rep)])
    return EXIT_OK if is_cover(inst, rep.cover.balls, None) and extra_ok else EXIT_INVALID


def cmd_solve_mcc(args, out):
    inst = load_instance(args.instance)
    if args.exact:
        rep = mcc.solve_exact_report(inst, args.seed)
    else:
        cfg = mcc.MccConfig(args.epsilon, args.kappa_base, args.lemma_constant, args.max_enum, args.seed)
        rep = mcc.point_cover(inst, cfg)
    return _finish_solve(args, out, inst, rep)


def cmd_solve_kcluster(args, out):
    inst = load_instance(args.instance)
    if args.exact:
        rep = kcluster.solve_exact_report(inst, args.k, args.seed)
        return _finish_solve(args, out, inst, rep, rep.n_balls <= args.k)
    cfg = kcluster.KclusterConfig(args.epsilon, args.k, args.beta_base, args.lemma_constant,
                                  args.seed, args.max_enum)
    rep = kcluster.clustering(inst, cfg)
    return _finish_solve(args, out, inst, rep, rep.n_balls <= rep.params["ball_bound"])


def cmd_exact(args, out):
    inst = load_instance(args.instance)
    if args.problem == "mcc":
        rep = mcc.solve_exact_report(inst, args.seed)
    else:
        if args.k is None:
            raise UsageError("--k is required for k-clustering")
        rep = kcluster.solve_exact_report(inst, args.k, args.seed)
    return _finish_solve(args, out, inst, rep)


def cmd_reduce_dsp(args, out):
    out.emit(instance_to_dict(reduce_dsp_to_mcc(load_graph(args.graph))))
    return EXIT_OK


def cmd_verify_reduction(args, out):
    g = load_graph(args.graph)
    try:
        report = verify_reduction(g)
    except ReductionMismatch as exc:
        out.emit(exc.report)
        return EXIT_INVALID
    out.emit(report)
    return EXIT_OK


def _ints(text: str) -> list[int]:
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise UsageError(f"cannot parse id list {text!r}") from None


def _seeds(text: str) -> list[int]:
    """``"0:20"`` (half-open range) or a comma list ``"1,5,9"``."""
    text = text.strip()
    if not text:
        return []
    try:
        if ":" in text:
            lo, hi = text.split(":")
            return list(range(int(lo), int(hi)))
        return _ints(text)
    except ValueError:
        raise UsageError(f"cannot parse seed list {text!r}") from None


def cmd_experiment(args, out):
    spec = _spec_from_args(args)
    config = {"epsilon": args.epsilon, "trials": args.trials}
    if args.k is not None:
        config["k"] = args.k
    if args.max_enum is not None:
        config["max_enum"] = args.max_enum
    if args.solver == "kcluster" and args.k is None:
        raise UsageError("--k is required for k-clustering")
    result = run_experiment(spec, args.solver, config, _seeds(args.seeds))
    out.emit(result.to_dict(), result.rows)
    return EXIT_OK if result.ok else EXIT_INVALID


def _add_generator_flags(p):
    p.add_argument("--spec", help="instance spec JSON file")
    p.add_argument("--generator", choices=GENERATORS)
    p.add_argument("--n", type=int, help="number of clients (or path vertices)")
    p.add_argument("--m", type=int, help="number of servers")
    p.add_argument("--dim", type=int)
    p.add_argument("--box", type=float)
    p.add_argument("--spread", type=float, help="random_metric weight range [1, spread]")
    p.add_argument("--b", type=int, help="counterexample branching")
    p.add_argument("--weight", type=float, help="path edge weight")
    p.add_argument("--graph", help="graph JSON for dsp_reduction")
    p.add_argument("--alpha", type=float)
    p.add_argument("--normalize", choices=("yes", "no"),
                   help="rescale so the closest clients are 1 apart (default: yes, except dsp_reduction)")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--timing", action="store_true", help="include wall-clock time in reports")

    parser = argparse.ArgumentParser(prog="ballcover", description="Ball covering solvers and experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common], help="generate an instance")
    _add_generator_flags(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("partition-stats", parents=[common], help="blocks meeting a probe ball")
    p.add_argument("--instance")
    p.add_argument("--b", type=int, help="use the counterexample tree with this branching")
    p.add_argument("--scheme", choices=("rand", "frt", "both"), default="both")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--probe-center", "--center", dest="center", type=int)
    p.add_argument("--probe-radius", "--radius", dest="radius", type=float)
    p.add_argument("--subset", default="all", help='"all" clients or a comma list of point ids')
    p.add_argument("--strict", action="store_true", help="reject probes beyond the guaranteed regime")
    p.set_defaults(func=cmd_partition_stats)

    p = sub.add_parser("solve-mcc", parents=[common], help="minimum cost covering")
    p.add_argument("--instance", required=True)
    p.add_argument("--epsilon", type=float, default=0.5)
    p.add_argument("--max-enum", type=int)
    p.add_argument("--kappa-base", type=int, default=3)
    p.add_argument("--lemma-constant", type=float, default=64.0)
    p.add_argument("--exact", action="store_true")
    p.set_defaults(func=cmd_solve_mcc)

    p = sub.add_parser("solve-kcluster", parents=[common], help="bicriteria k-clustering")
    p.add_argument("--instance", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--epsilon", type=float, default=0.6)
    p.add_argument("--max-enum", type=int)
    p.add_argument("--beta-base", type=int, default=3)
    p.add_argument("--lemma-constant", type=float, default=64.0)
    p.add_argument("--exact", action="store_true")
    p.set_defaults(func=cmd_solve_kcluster)

    p = sub.add_parser("exact", parents=[common], help="exhaustive optimum for small instances")
    p.add_argument("--instance", required=True)
    p.add_argument("--problem", choices=("mcc", "kcluster"), default="mcc")
    p.add_argument("--k", type=int)
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("reduce-dsp", parents=[common], help="dominating set to covering instance")
    p.add_argument("--graph", required=True)
    p.set_defaults(func=cmd_reduce_dsp)

    p = sub.add_parser("verify-reduction", parents=[common], help="check optimum = domination number")
    p.add_argument("--graph", required=True)
    p.set_defaults(func=cmd_verify_reduction)

    p = sub.add_parser("experiment", parents=[common], help="run a solver over many seeds")
    _add_generator_flags(p)
    p.add_argument("--solver", choices=SOLVERS, required=True)
    p.add_argument("--seeds", default="0:20", help='"lo:hi" or "s1,s2,..."')
    p.add_argument("--epsilon", type=float, default=0.5)
    p.add_argument("--k", type=int)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--max-enum", type=int)
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always", CapApplied)
            return args.func(args, _Output(args))
    except (BallcoverError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
