"""
oracles.py: Slow, direct implementations used to check the fast paths.

Nothing here is used by the CLI or the simulation harness except CounterexampleBase and
counterexample_fdr. Everything favors readability over speed and is quadratic or worse.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

from dag_core.graph import Dag
from dag_core.metrics import DagMetrics
from procedures.base_procedures import BaseProcedure, RejectionSet, as_pvalues
from procedures.weights import WeightFunction
from utils.errors import AlphaOutOfRange, InputValidationError, LengthMismatch

logger = logging.getLogger(__name__)


def gels_r_scan(base: BaseProcedure, weight: WeightFunction, alpha: float, m: Optional[int] = None) -> int:
    """Literal max{r in 0..m : r <= R_base(alpha / W(r))}, evaluating the base at every r."""
    if m is None:
        m = base.m
    return max(r for r in range(m + 1) if r <= base.count(weight.level(alpha, r)))


def naive_ancestors(dag: Dag) -> List[FrozenSet[int]]:
    """D_i by repeated parent expansion until nothing changes."""
    sets = [{i} | set(dag.parents[i]) for i in range(dag.m)]
    changed = True
    while changed:
        changed = False
        for i in range(dag.m):
            grown = set(sets[i])
            for k in sets[i]:
                grown.update(dag.parents[k])
            if grown != sets[i]:
                sets[i] = grown
                changed = True
    return [frozenset(s) for s in sets]


def flow_recursive(dag: Dag) -> List[List[Fraction]]:
    """Exact s[i][j]: 0 outside D_j, 1 on the diagonal, else the parent average of s[i][k]."""
    ancestors = naive_ancestors(dag)

    @lru_cache(maxsize=None)
    def s(i: int, j: int) -> Fraction:
        if i not in ancestors[j]:
            return Fraction(0)
        if i == j:
            return Fraction(1)
        parents = dag.parents[j]
        return sum((s(i, k) for k in parents), Fraction(0)) / len(parents)

    # topological order keeps the recursion shallow
    flow = [[Fraction(0)] * dag.m for _ in range(dag.m)]
    for j in dag.order:
        for i in range(dag.m):
            flow[i][j] = s(i, j)
    return flow


def leaf_flow_exact(dag: Dag) -> List[Fraction]:
    flow = flow_recursive(dag)
    leaves = [j for j in range(dag.m) if not dag.children[j]]
    return [sum((flow[i][j] for j in leaves), Fraction(0)) for i in range(dag.m)]


@dataclass(frozen=True, eq=False)
class CoefficientTable:
    values: np.ndarray
    truth: np.ndarray
    lam: float

    @property
    def total(self) -> float:
        return float(self.values.sum())


def sum_c_check(metrics: DagMetrics, truth: Sequence[bool], lam: float) -> Tuple[CoefficientTable, float]:
    """
    c_i = l_i / (l (1 + lam l_i)^[non-leaf]) * prod over true j in D_i, j != i, of lam l_j / (1 + lam l_j);
    c_i = 0 for false nulls. The DAG PFER bound needs the sum to stay at or below one.
    """
    if not metrics.has_flow:
        raise InputValidationError("sum_c_check needs metrics with leaf flows")
    truth = np.asarray(truth, dtype=bool)
    if truth.shape != (metrics.m,):
        raise LengthMismatch(f"Truth mask has shape {truth.shape}, expected ({metrics.m},)")

    li = metrics.leaf_flow
    ratio = lam * li / (1.0 + lam * li)
    ell = metrics.leaf_count
    values = np.zeros(metrics.m, dtype=np.float64)
    for i in np.flatnonzero(truth):
        c = li[i] / ell
        if not metrics.is_leaf[i]:
            c /= 1.0 + lam * li[i]
        for j in metrics.ancestors[i]:
            if j != i and truth[j]:
                c *= ratio[j]
        values[i] = c
    table = CoefficientTable(values=values, truth=truth, lam=float(lam))
    return table, table.total


def counterexample_fdr(alpha: float) -> float:
    """Exact FDR of GELS over CounterexampleBase with two independent uniform true nulls."""
    alpha = float(alpha)
    if not 0.0 < alpha < 0.5:
        raise AlphaOutOfRange(f"alpha must lie in (0, 1/2), got {alpha!r}")
    return alpha * (4.0 * alpha + 1.0) / ((1.0 + 2.0 * alpha) * (1.0 + alpha))


class CounterexampleBase(BaseProcedure):
    """
    A two-hypothesis PFER-controlling base that is not a sum of per-hypothesis bounds:
    reject H_1 if P_1 <= b/(1+b); reject H_2 if H_1 was rejected and P_2 <= b.
    GELS over it with the FDR weight exceeds the nominal FDR.
    """

    name = "counterexample"

    def __init__(self, pvalues: Sequence[float]):
        super().__init__(pvalues)
        if self.m != 2:
            raise LengthMismatch(f"The counterexample base takes exactly 2 p-values, got {self.m}")

    @staticmethod
    def thresholds(level) -> Tuple[np.ndarray, np.ndarray]:
        level = np.asarray(level, dtype=np.float64)
        return np.minimum(1.0, level / (1.0 + level)), np.minimum(1.0, level)

    def reject(self, level: float) -> RejectionSet:
        t1, t2 = self.thresholds(level)
        first = bool(self.pvalues[0] <= t1)
        second = first and bool(self.pvalues[1] <= t2)
        return RejectionSet(
            rejected=np.array([first, second]),
            thresholds=np.array([float(t1), float(t2)]),
        )

    @staticmethod
    def batch_counts(pvalues: np.ndarray, levels: np.ndarray) -> np.ndarray:
        """Rejection counts for an (n, 2) p-value matrix at one level per row."""
        t1, t2 = CounterexampleBase.thresholds(levels)
        first = pvalues[:, 0] <= t1
        second = first & (pvalues[:, 1] <= t2)
        return first.astype(np.int64) + second.astype(np.int64)


def dag_test_fixed_point(dag: Dag, pvalues: Sequence[float], constants: Sequence[float]) -> RejectionSet:
    """DAG testing rule applied by whole-graph sweeps until no rejection is added."""
    p = as_pvalues(pvalues)
    c = np.asarray(constants, dtype=np.float64)
    if p.shape != (dag.m,) or c.shape != (dag.m,):
        raise LengthMismatch(f"Graph has {dag.m} nodes; got {p.size} p-values and {c.size} constants")

    rejected = [False] * dag.m
    sweeps = 0
    while True:
        sweeps += 1
        added = False
        for i in range(dag.m):
            if rejected[i]:
                continue
            if all(rejected[k] for k in dag.parents[i]) and p[i] <= c[i]:
                rejected[i] = True
                added = True
        if not added:
            break
    logger.debug("Fixed-point DAG test settled after %d sweeps", sweeps)
    return RejectionSet(rejected=np.array(rejected, dtype=bool), thresholds=c.copy())
