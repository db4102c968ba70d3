"""
design.py: Graph, truth and p-value generators for the Monte Carlo study.

The study graph is a braid: layer k+1 is one node wider than layer k and node i of layer k
points at nodes i and i+1 of the next layer. Truth is seeded at the leaves and pushed upward:
a non-leaf is a true null exactly when all of its children are.
"""

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import norm

from dag_core.graph import Dag, build_dag
from utils.errors import BadLayerWidths, InputValidationError, LengthMismatch

logger = logging.getLogger(__name__)

TOP, MIDDLE, LEAF = 0, 1, 2
TRUE_LEAF_EPSILON = 1e-9


def build_layered_dag(layer_widths: Sequence[int]) -> Dag:
    widths = [int(w) for w in layer_widths]
    if not widths or any(w < 1 for w in widths):
        raise BadLayerWidths(f"Layer widths must be a non-empty list of positive integers, got {list(layer_widths)}")
    for k in range(len(widths) - 1):
        if widths[k + 1] != widths[k] + 1:
            raise BadLayerWidths(
                f"Layer {k + 1} has width {widths[k + 1]}; the braid needs exactly {widths[k] + 1}"
            )

    offsets = np.concatenate(([0], np.cumsum(widths)))
    edges = []
    for k in range(len(widths) - 1):
        for i in range(widths[k]):
            parent = int(offsets[k]) + i
            child = int(offsets[k + 1]) + i
            edges.append((parent, child))
            edges.append((parent, child + 1))
    return build_dag(int(offsets[-1]), edges)


def node_roles(dag: Dag) -> np.ndarray:
    """TOP for parentless nodes, LEAF for childless nodes with parents, MIDDLE otherwise."""
    roles = np.full(dag.m, MIDDLE, dtype=np.int64)
    for i in range(dag.m):
        if not dag.parents[i]:
            roles[i] = TOP
        elif not dag.children[i]:
            roles[i] = LEAF
    return roles


@dataclass(frozen=True, eq=False)
class TruthAssignment:
    truth: np.ndarray

    @property
    def m(self) -> int:
        return int(self.truth.shape[0])

    @property
    def m0(self) -> int:
        return int(np.count_nonzero(self.truth))

    @property
    def false_count(self) -> int:
        return self.m - self.m0


def assign_truth(dag: Dag, leaf_null_proportion: float, rng: np.random.Generator) -> TruthAssignment:
    pi = float(leaf_null_proportion)
    if not 0.0 <= pi <= 1.0:
        raise InputValidationError(f"Leaf null proportion must lie in [0, 1], got {pi!r}")

    leaves = np.asarray([i for i in range(dag.m) if not dag.children[i]], dtype=np.int64)
    n_true = min(leaves.size, math.floor(pi * leaves.size + TRUE_LEAF_EPSILON))
    truth = np.zeros(dag.m, dtype=bool)
    truth[rng.choice(leaves, size=n_true, replace=False)] = True

    for i in reversed(dag.order):
        children = dag.children[i]
        if children:
            truth[i] = all(truth[c] for c in children)
    return TruthAssignment(truth=truth)


def generate_pvalues(
    truth: TruthAssignment,
    roles: np.ndarray,
    mu: Sequence[float],
    rho: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """
    One-sided Z-test p-values from equicorrelated normals:
    X_i = sqrt(rho) Z_0 + sqrt(1 - rho) Z_i + mu_i, P_i = 1 - Phi(X_i), mu_i = 0 for true nulls.
    """
    rho = float(rho)
    if not 0.0 <= rho < 1.0:
        raise InputValidationError(f"rho must lie in [0, 1), got {rho!r}")
    roles = np.asarray(roles, dtype=np.int64)
    if roles.shape != truth.truth.shape:
        raise LengthMismatch(f"{roles.size} roles for {truth.m} hypotheses")

    means = np.where(truth.truth, 0.0, np.asarray(mu, dtype=np.float64)[roles])
    z0 = rng.standard_normal()
    z = rng.standard_normal(truth.m)
    x = math.sqrt(rho) * z0 + math.sqrt(1.0 - rho) * z + means
    return norm.sf(x)
