"""
metrics.py: Structural quantities of a hypothesis graph used by the DAG procedures.

Families, ancestor sets D_i and descendant sets M_i come from compute_metrics. The flow weights
s_{i,j} (share of unit mass started at node j that passes through node i when every node splits
its mass evenly among its parents) and the leaf flows l_i come from compute_flow.

Flow is stored per column j as a dict {i: s_ij} over i in D_j only.
"""

import logging
from dataclasses import dataclass, replace
from typing import Dict, FrozenSet, Optional, Tuple

import numpy as np

from dag_core.graph import Dag

logger = logging.getLogger(__name__)

FlowColumn = Dict[int, float]


@dataclass(frozen=True, eq=False)
class DagMetrics:
    family: np.ndarray
    ancestors: Tuple[FrozenSet[int], ...]
    descendants: Tuple[FrozenSet[int], ...]
    is_leaf: np.ndarray
    leaf_count: int
    flow: Optional[Tuple[FlowColumn, ...]] = None
    leaf_flow: Optional[np.ndarray] = None

    @property
    def m(self) -> int:
        return len(self.ancestors)

    @property
    def has_flow(self) -> bool:
        return self.flow is not None and self.leaf_flow is not None

    def flow_value(self, i: int, j: int) -> float:
        if self.flow is None:
            raise RuntimeError("Flow not computed; call compute_flow first")
        return self.flow[j].get(i, 0.0)


def compute_metrics(dag: Dag) -> DagMetrics:
    """Families by longest path, transitive ancestor/descendant sets, leaves."""
    ancestors = [frozenset()] * dag.m
    for j in dag.order:
        acc = {j}
        for k in dag.parents[j]:
            acc.update(ancestors[k])
        ancestors[j] = frozenset(acc)

    descendants = [frozenset()] * dag.m
    for i in reversed(dag.order):
        acc = {i}
        for c in dag.children[i]:
            acc.update(descendants[c])
        descendants[i] = frozenset(acc)

    is_leaf = np.asarray([len(d) == 1 for d in descendants], dtype=bool)
    return DagMetrics(
        family=dag.depth.copy(),
        ancestors=tuple(ancestors),
        descendants=tuple(descendants),
        is_leaf=is_leaf,
        leaf_count=int(is_leaf.sum()),
    )


def compute_flow(dag: Dag, metrics: DagMetrics) -> DagMetrics:
    """Fill s_{i,j} column by column in topological order, then l_i = sum over leaf columns."""
    columns = [None] * dag.m
    for j in dag.order:
        col: FlowColumn = {}
        n_parents = len(dag.parents[j])
        for k in dag.parents[j]:
            for i, value in columns[k].items():
                col[i] = col.get(i, 0.0) + value / n_parents
        col[j] = 1.0
        columns[j] = col

    leaf_flow = np.zeros(dag.m, dtype=np.float64)
    for j in np.flatnonzero(metrics.is_leaf):
        for i, value in columns[j].items():
            leaf_flow[i] += value

    logger.debug("Computed flow for %d nodes (%d leaves)", dag.m, metrics.leaf_count)
    return replace(metrics, flow=tuple(columns), leaf_flow=leaf_flow)


def flow_residuals(dag: Dag, metrics: DagMetrics) -> Tuple[float, float]:
    """
    Largest deviation of the two flow identities:
      (i)  sum over roots k of s_{k,j} equals 1 for every j;
      (ii) s_{i,j} equals sum over children k of i of s_{k,j}/|T_k| for i != j.
    Pairs outside D_j are zero on both sides of (ii) and are skipped.
    """
    if not metrics.has_flow:
        metrics = compute_flow(dag, metrics)
    roots = metrics.family == 1
    top_residual = 0.0
    child_residual = 0.0
    for j, col in enumerate(metrics.flow):
        top_sum = sum(v for i, v in col.items() if roots[i])
        top_residual = max(top_residual, abs(top_sum - 1.0))
        for i, value in col.items():
            if i == j:
                continue
            expected = sum(col.get(k, 0.0) / len(dag.parents[k]) for k in dag.children[i])
            child_residual = max(child_residual, abs(value - expected))
    return top_residual, child_residual
