"""
gels_cli.py: Command-line entry point.

  test      apply a procedure to a p-value file (and a DAG file for the DAG procedures)
  simulate  run a JSON experiment file and write one CSV row per procedure and grid point
  inspect   report DAG structure: families, leaf flows and the flow identity residuals
  compare   rejection counts of DAG GELS, DAG BH and BH over a range of levels

Exit codes: 0 on success, 2 on invalid input, 1 on anything else.
"""

import argparse
import contextlib
import json
import logging
import sys
from typing import Iterator, List, Optional, TextIO

import numpy as np

from dag_core.metrics import compute_flow, compute_metrics, flow_residuals
from procedures import registry
from simulation.config import load_sweep_config
from simulation.runner import run_sweep
from storage.file_formats import align_values, read_dag_file, read_pvalue_file, read_weight_file, write_edges
from storage.results_writer import (
    analysis_frame,
    analysis_summary,
    comparison_frame,
    simulation_frame,
    write_analysis,
    write_csv,
)
from utils.errors import InputValidationError
from utils.log import configure_logging
from utils.settings import get_settings

logger = logging.getLogger("gels_cli")

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_INVALID = 2


@contextlib.contextmanager
def _output(path: Optional[str]) -> Iterator[TextIO]:
    if path is None:
        yield sys.stdout
        return
    with open(path, "w", encoding="utf-8", newline="") as f:
        yield f


def _load_dag(path: str):
    dag, ids = read_dag_file(path)
    metrics = compute_flow(dag, compute_metrics(dag))
    return dag, ids, metrics


def cmd_test(args: argparse.Namespace) -> int:
    registry.check_procedure(args.procedure)
    pvalue_map = read_pvalue_file(args.pvalue_file)

    dag = metrics = None
    if args.dag is not None:
        dag, ids, metrics = _load_dag(args.dag)
        pvalues = align_values(ids, pvalue_map)
    elif args.procedure in registry.DAG_PROCEDURES:
        raise InputValidationError(f"Procedure {args.procedure!r} needs a DAG file (--dag)")
    else:
        ids = list(pvalue_map)
        pvalues = np.asarray([pvalue_map[i] for i in ids], dtype=np.float64)

    weights = None
    if args.weights is not None:
        weights = align_values(ids, read_weight_file(args.weights), kind="weight")

    outcome = registry.run_procedure(
        args.procedure,
        p=pvalues,
        alpha=args.alpha,
        dag=dag,
        metrics=metrics,
        lam=args.lam,
        gamma=args.gamma,
        m0=args.m0,
        k=args.k,
        weights=weights,
    )
    summary = analysis_summary(outcome, args.alpha, {"gamma": args.gamma, "m0": args.m0, "k": args.k})
    with _output(args.out) as stream:
        write_analysis(stream, summary, analysis_frame(ids, pvalues, outcome, metrics))
    logger.info("✅ %s rejected %d of %d hypotheses", outcome.name, outcome.R, len(ids))
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    config = load_sweep_config(args.config).with_overrides(replications=args.reps, seed=args.seed)
    results = run_sweep(config, workers=args.workers)
    with _output(args.out) as stream:
        write_csv(simulation_frame(results, config.name), stream)
    return EXIT_OK


def cmd_inspect(args: argparse.Namespace) -> int:
    dag, ids, metrics = _load_dag(args.dag_file)
    top_residual, child_residual = flow_residuals(dag, metrics)
    report = {
        "m": dag.m,
        "edges": dag.edge_count,
        "leaf_count": metrics.leaf_count,
        "residuals": {"top": top_residual, "child": child_residual},
        "nodes": [
            {
                "id": ids[i],
                "family": int(metrics.family[i]),
                "leaf_flow": float(metrics.leaf_flow[i]),
                "is_leaf": bool(metrics.is_leaf[i]),
            }
            for i in range(dag.m)
        ],
    }
    json.dump(report, sys.stdout, indent=2)
    sys.stdout.write("\n")

    if args.emit_edges is not None:
        with _output(args.emit_edges) as stream:
            write_edges(dag, ids, stream)
        logger.info("✅ Edge list written: %s", args.emit_edges)
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    dag, ids, metrics = _load_dag(args.dag_file)
    pvalues = align_values(ids, read_pvalue_file(args.pvalue_file))
    frame = comparison_frame(dag, metrics, pvalues, args.alphas, args.lam_multipliers)
    with _output(args.out) as stream:
        write_csv(frame, stream)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gels", description="GELS and DAG multiple testing procedures")
    parser.add_argument("--log-level", default=None, help="overrides GELS_LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)

    test = sub.add_parser("test", help="apply a procedure to a p-value file")
    test.add_argument("pvalue_file")
    test.add_argument("--dag", default=None, help="DAG file; required by the dag-* procedures")
    test.add_argument("--procedure", default=registry.DAG_GELS, help=", ".join(registry.PROCEDURE_NAMES))
    test.add_argument("--alpha", type=float, default=0.05)
    test.add_argument("--lam", type=float, default=None, help="dag-gels default 2*alpha; dag-pfer default alpha/l")
    test.add_argument("--gamma", type=float, default=None, help="adaptive procedures, default 0.5")
    test.add_argument("--m0", type=float, default=None, help="oracle-bh true-null count; bonferroni denominator")
    test.add_argument("--k", type=int, default=None, help="kfdr and kfdr-single-step")
    test.add_argument("--weights", default=None, help="weight file for the weighted procedures")
    test.add_argument("--out", default=None)
    test.set_defaults(handler=cmd_test)

    simulate = sub.add_parser("simulate", help="run a JSON experiment file")
    simulate.add_argument("config")
    simulate.add_argument("--reps", type=int, default=None)
    simulate.add_argument("--seed", type=int, default=None)
    simulate.add_argument("--workers", type=int, default=None, help="overrides GELS_WORKERS")
    simulate.add_argument("--out", default=None)
    simulate.set_defaults(handler=cmd_simulate)

    inspect = sub.add_parser("inspect", help="report DAG structure")
    inspect.add_argument("dag_file")
    inspect.add_argument("--emit-edges", default=None, metavar="PATH")
    inspect.set_defaults(handler=cmd_inspect)

    compare = sub.add_parser("compare", help="rejection counts across levels")
    compare.add_argument("dag_file")
    compare.add_argument("pvalue_file")
    compare.add_argument("--alphas", type=float, nargs="+", default=[0.01, 0.05, 0.1])
    compare.add_argument("--lam-multipliers", type=float, nargs="+", default=[1.0, 2.0, 4.0, 10.0])
    compare.add_argument("--out", default=None)
    compare.set_defaults(handler=cmd_compare)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        settings = get_settings()
    except RuntimeError as exc:
        configure_logging(args.log_level or "WARNING")
        logger.error("❌ %s", exc)
        return EXIT_INTERNAL
    configure_logging(args.log_level or settings.log_level)
    try:
        return args.handler(args)
    except InputValidationError as exc:
        logger.error("❌ %s", exc)
        return EXIT_INVALID
    except Exception as exc:
        logger.error("❌ %s: %s", type(exc).__name__, exc)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
