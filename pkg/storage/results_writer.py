"""
results_writer.py: Tabular outputs (per-hypothesis analysis, simulation summaries, rejection-count
comparisons) built as pandas DataFrames and written as CSV with full-precision floats.
"""

import json
import logging
import os
from typing import Dict, Iterable, Optional, Sequence, TextIO

import numpy as np
import pandas as pd

from dag_core.graph import Dag
from dag_core.metrics import DagMetrics
from procedures import registry
from procedures.registry import ProcedureOutcome
from simulation.runner import SimulationResult

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
ANALYSIS_COLUMNS = ["id", "p_value", "leaf_flow", "is_leaf", "threshold", "rejected"]


def write_csv(frame: pd.DataFrame, stream: TextIO) -> None:
    frame.to_csv(stream, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


def analysis_frame(
    ids: Sequence[str],
    pvalues: np.ndarray,
    outcome: ProcedureOutcome,
    metrics: Optional[DagMetrics] = None,
) -> pd.DataFrame:
    """One row per hypothesis. Without a graph every hypothesis is its own leaf."""
    m = len(ids)
    if metrics is not None and metrics.has_flow:
        leaf_flow = metrics.leaf_flow
        is_leaf = metrics.is_leaf
    else:
        leaf_flow = np.ones(m)
        is_leaf = np.ones(m, dtype=bool)
    thresholds = outcome.rejection.thresholds
    if thresholds is None:
        thresholds = np.full(m, np.nan)
    return pd.DataFrame({
        "id": list(ids),
        "p_value": np.asarray(pvalues, dtype=np.float64),
        "leaf_flow": np.asarray(leaf_flow, dtype=np.float64),
        "is_leaf": np.asarray(is_leaf, dtype=np.int64),
        "threshold": np.asarray(thresholds, dtype=np.float64),
        "rejected": outcome.rejection.rejected.astype(np.int64),
    }, columns=ANALYSIS_COLUMNS)


def analysis_summary(outcome: ProcedureOutcome, alpha: float, extra: Optional[Dict[str, object]] = None) -> Dict[str, object]:
    summary = {
        "procedure": outcome.name,
        "alpha": alpha,
        "lambda": outcome.lam,
        "m": outcome.rejection.m,
        "R": outcome.R,
    }
    if extra:
        summary.update({k: v for k, v in extra.items() if v is not None})
    return summary


def write_analysis(stream: TextIO, summary: Dict[str, object], frame: pd.DataFrame) -> None:
    """JSON summary on the first line, then the per-hypothesis CSV."""
    stream.write(json.dumps(summary, sort_keys=True) + "\n")
    write_csv(frame, stream)


def simulation_frame(results: Iterable[SimulationResult], name: str) -> pd.DataFrame:
    rows = []
    for result in results:
        for row in result.rows():
            rows.append({"experiment": name, **row})
    return pd.DataFrame(rows)


def save_simulation(frame: pd.DataFrame, results_dir: str, name: str) -> str:
    os.makedirs(results_dir, exist_ok=True)
    path = os.path.join(results_dir, f"{name}.csv")
    with open(path, "w", encoding="utf-8", newline="") as f:
        write_csv(frame, f)
    logger.info("✅ Simulation results saved: %s", path)
    return path


def comparison_frame(
    dag: Dag,
    metrics: DagMetrics,
    pvalues: np.ndarray,
    alphas: Sequence[float],
    lam_multipliers: Sequence[float] = (1.0, 2.0, 4.0, 10.0),
) -> pd.DataFrame:
    """Rejection counts by level: DAG GELS at lambda = c * alpha for each c, then DAG BH and BH."""
    rows = []
    for alpha in alphas:
        row = {"alpha": float(alpha)}
        for c in lam_multipliers:
            outcome = registry.run_procedure(
                registry.DAG_GELS, p=pvalues, alpha=alpha, dag=dag, metrics=metrics, lam=c * alpha,
            )
            row[f"dag-gels(lambda={c:g}alpha)"] = outcome.R
        row[registry.DAG_BH] = registry.run_procedure(
            registry.DAG_BH, p=pvalues, alpha=alpha, dag=dag, metrics=metrics,
        ).R
        row[registry.BH] = registry.run_procedure(registry.BH, p=pvalues, alpha=alpha).R
        rows.append(row)
    return pd.DataFrame(rows)
