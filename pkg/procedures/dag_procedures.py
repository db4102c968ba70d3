"""
dag_procedures.py: The DAG testing procedure, its critical constants, and the procedures built on it.

A hypothesis is tested only once all of its parents are rejected, so every output is
ancestor-closed. dag_pfer runs the procedure at a fixed level; dag_gels and dag_bh wrap it in
GELS with the FDR weight.
"""

import logging
import math
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np

from dag_core.graph import Dag
from dag_core.metrics import DagMetrics, compute_flow, compute_metrics
from procedures.base_procedures import BaseProcedure, RejectionSet, as_pvalues, check_level
from procedures.gels import gels_run
from procedures.weights import WeightFunction
from utils.errors import EmptyDag, InputValidationError, LengthMismatch, NonPositiveLambda

logger = logging.getLogger(__name__)


class DagConstantMode(str, Enum):
    PFER_LAMBDA = "pfer_lambda"
    PFER_DEFAULT = "pfer_default"
    BONFERRONI = "bonferroni"


def _check_lambda(lam: Optional[float]) -> float:
    if lam is None:
        raise NonPositiveLambda("lambda is required for this constant mode")
    lam = float(lam)
    if not (lam > 0.0 and math.isfinite(lam)):
        raise NonPositiveLambda(f"lambda must be a positive finite number, got {lam!r}")
    return lam


def dag_constants(
    metrics: DagMetrics,
    beta: float,
    lam: Optional[float] = None,
    mode: DagConstantMode = DagConstantMode.PFER_LAMBDA,
) -> np.ndarray:
    """
    Per-node critical constants in [0, 1].

    pfer_lambda:  min(lam, beta/l) at leaves, min(lam, beta/l) * l_i / (1 + lam * l_i) elsewhere
    pfer_default: pfer_lambda with lam = beta/l
    bonferroni:   beta/m everywhere
    """
    m = metrics.m
    if m == 0:
        raise EmptyDag("Critical constants need at least one hypothesis")
    beta = check_level(beta, "beta")
    mode = DagConstantMode(mode)

    if mode is DagConstantMode.BONFERRONI:
        return np.full(m, min(1.0, beta / m))

    if not metrics.has_flow:
        raise InputValidationError("Leaf flows are missing; pass metrics through compute_flow first")
    ell = metrics.leaf_count
    if mode is DagConstantMode.PFER_DEFAULT:
        lam = beta / ell
    else:
        lam = _check_lambda(lam)

    scale = min(lam, beta / ell)
    li = metrics.leaf_flow
    constants = np.where(metrics.is_leaf, scale, scale * li / (1.0 + lam * li))
    return np.clip(constants, 0.0, 1.0)


def dag_test(dag: Dag, pvalues: Sequence[float], constants: Sequence[float]) -> RejectionSet:
    """One pass over the families: H_i is rejected iff every parent is rejected and P_i <= c_i."""
    p = as_pvalues(pvalues)
    c = np.asarray(constants, dtype=np.float64)
    if p.shape != (dag.m,) or c.shape != (dag.m,):
        raise LengthMismatch(f"Graph has {dag.m} nodes; got {p.size} p-values and {c.size} constants")

    passes = p <= c
    rejected = np.zeros(dag.m, dtype=bool)
    for plan in dag.layer_plans:
        parents_rejected = np.bincount(
            plan.edge_child_pos,
            weights=rejected[plan.edge_parent],
            minlength=plan.nodes.size,
        )
        rejected[plan.nodes] = (parents_rejected == plan.parent_count) & passes[plan.nodes]
    return RejectionSet(rejected=rejected, thresholds=c.copy())


def _resolve_metrics(dag: Dag, metrics: Optional[DagMetrics], need_flow: bool) -> DagMetrics:
    if metrics is None:
        metrics = compute_metrics(dag)
    elif metrics.m != dag.m:
        raise LengthMismatch(f"Metrics describe {metrics.m} nodes, graph has {dag.m}")
    if need_flow and not metrics.has_flow:
        metrics = compute_flow(dag, metrics)
    return metrics


class DagTestingBase(BaseProcedure):
    """The DAG testing procedure as a base: level beta -> dag_test with constants at beta."""

    name = "dag-testing"

    def __init__(
        self,
        dag: Dag,
        pvalues: Sequence[float],
        metrics: Optional[DagMetrics] = None,
        lam: Optional[float] = None,
        mode: DagConstantMode = DagConstantMode.PFER_LAMBDA,
    ):
        super().__init__(pvalues)
        if self.m != dag.m:
            raise LengthMismatch(f"Graph has {dag.m} nodes but {self.m} p-values were given")
        self.dag = dag
        self.mode = DagConstantMode(mode)
        self.metrics = _resolve_metrics(dag, metrics, need_flow=self.mode is not DagConstantMode.BONFERRONI)
        self.lam = _check_lambda(lam) if self.mode is DagConstantMode.PFER_LAMBDA else None

    def constants(self, level: float) -> np.ndarray:
        return dag_constants(self.metrics, level, self.lam, self.mode)

    def reject(self, level: float) -> RejectionSet:
        return dag_test(self.dag, self.pvalues, self.constants(level))


def dag_pfer(
    dag: Dag,
    metrics: Optional[DagMetrics],
    pvalues: Sequence[float],
    alpha: float,
    lam: Optional[float] = None,
) -> RejectionSet:
    """DAG testing procedure controlling PFER at alpha; lam=None uses lam = alpha/l."""
    alpha = check_level(alpha, "alpha")
    mode = DagConstantMode.PFER_DEFAULT if lam is None else DagConstantMode.PFER_LAMBDA
    return DagTestingBase(dag, pvalues, metrics, lam, mode).reject(alpha)


def dag_bonferroni(
    dag: Dag,
    pvalues: Sequence[float],
    alpha: float,
    metrics: Optional[DagMetrics] = None,
) -> RejectionSet:
    alpha = check_level(alpha, "alpha")
    return DagTestingBase(dag, pvalues, metrics, mode=DagConstantMode.BONFERRONI).reject(alpha)


def dag_gels(
    dag: Dag,
    metrics: Optional[DagMetrics],
    pvalues: Sequence[float],
    alpha: float,
    lam: Optional[float] = None,
) -> Tuple[int, RejectionSet]:
    alpha = check_level(alpha, "alpha")
    if lam is None:
        lam = 2.0 * alpha
    if dag.m == 0:
        as_pvalues(pvalues)
        _check_lambda(lam)
        return 0, RejectionSet.empty(0)
    base = DagTestingBase(dag, pvalues, metrics, lam, DagConstantMode.PFER_LAMBDA)
    r, rejection = gels_run(base, WeightFunction.fdr(), alpha)
    logger.debug("DAG GELS at alpha=%g lambda=%g rejected %d of %d", alpha, lam, r, dag.m)
    return r, rejection


def dag_bh(
    dag: Dag,
    pvalues: Sequence[float],
    alpha: float,
    metrics: Optional[DagMetrics] = None,
) -> Tuple[int, RejectionSet]:
    alpha = check_level(alpha, "alpha")
    if dag.m == 0:
        as_pvalues(pvalues)
        return 0, RejectionSet.empty(0)
    base = DagTestingBase(dag, pvalues, metrics, mode=DagConstantMode.BONFERRONI)
    return gels_run(base, WeightFunction.fdr(), alpha)
