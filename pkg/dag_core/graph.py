"""
graph.py: Immutable parent-list representation of the hypothesis graph.
Nodes are dense 0-based indices; external string ids are mapped by storage.file_formats.
"""

import logging
import operator
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from utils.errors import CycleDetected, IndexOutOfRange, LengthMismatch

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LayerPlan:
    """Nodes of one family plus the parent edges that gate them."""
    nodes: np.ndarray
    edge_child_pos: np.ndarray
    edge_parent: np.ndarray
    parent_count: np.ndarray


@dataclass(frozen=True)
class Dag:
    m: int
    parents: Tuple[Tuple[int, ...], ...]
    children: Tuple[Tuple[int, ...], ...]
    order: Tuple[int, ...]

    @cached_property
    def depth(self) -> np.ndarray:
        """Longest-path depth of every node, 1-based (roots are 1)."""
        depth = np.ones(self.m, dtype=np.int64)
        for j in self.order:
            if self.parents[j]:
                depth[j] = 1 + max(depth[k] for k in self.parents[j])
        return depth

    @cached_property
    def edge_arrays(self) -> Tuple[np.ndarray, np.ndarray]:
        parent_idx = [k for j in range(self.m) for k in self.parents[j]]
        child_idx = [j for j in range(self.m) for _ in self.parents[j]]
        return np.asarray(parent_idx, dtype=np.int64), np.asarray(child_idx, dtype=np.int64)

    @cached_property
    def layer_plans(self) -> Tuple[LayerPlan, ...]:
        """Families in increasing depth; every parent of a layer lies in an earlier one."""
        if self.m == 0:
            return ()
        depth = self.depth
        plans = []
        for level in range(1, int(depth.max()) + 1):
            nodes = np.flatnonzero(depth == level)
            child_pos, parent = [], []
            for pos, j in enumerate(nodes):
                for k in self.parents[j]:
                    child_pos.append(pos)
                    parent.append(k)
            counts = np.asarray([len(self.parents[j]) for j in nodes], dtype=np.int64)
            plans.append(LayerPlan(
                nodes=nodes,
                edge_child_pos=np.asarray(child_pos, dtype=np.int64),
                edge_parent=np.asarray(parent, dtype=np.int64),
                parent_count=counts,
            ))
        return tuple(plans)

    @property
    def edge_count(self) -> int:
        return sum(len(ps) for ps in self.parents)

    def edges(self) -> List[Tuple[int, int]]:
        return [(k, j) for j in range(self.m) for k in self.parents[j]]


def _topological_order(m: int, parents: Sequence[Sequence[int]], children: Sequence[Sequence[int]]) -> Tuple[int, ...]:
    indegree = [len(ps) for ps in parents]
    ready = [i for i in range(m) if indegree[i] == 0]
    ready.reverse()
    order = []
    while ready:
        node = ready.pop()
        order.append(node)
        for child in children[node]:
            indegree[child] -= 1
            if indegree[child] == 0:
                ready.append(child)
    if len(order) < m:
        remaining = {i for i in range(m) if indegree[i] > 0}
        # every remaining node still has a remaining parent, so walking parents must revisit a node
        node = min(remaining)
        seen = set()
        while node not in seen:
            seen.add(node)
            node = next(k for k in parents[node] if k in remaining)
        raise CycleDetected(node)
    return tuple(order)


def build_dag(m: int, edges: Iterable[Tuple[int, int]]) -> Dag:
    """
    Build a validated Dag from (parent, child) index pairs.
    Duplicate edges are collapsed; a cycle raises CycleDetected naming a node on it.
    """
    m = operator.index(m)
    if m < 0:
        raise IndexOutOfRange(f"Node count must be nonnegative, got {m}")

    parent_sets = [set() for _ in range(m)]
    for edge in edges:
        if len(edge) != 2:
            raise LengthMismatch(f"Edge {edge!r} is not a (parent, child) pair")
        parent, child = operator.index(edge[0]), operator.index(edge[1])
        for idx in (parent, child):
            if not 0 <= idx < m:
                raise IndexOutOfRange(f"Node index {idx} outside [0, {m})")
        parent_sets[child].add(parent)

    parents = tuple(tuple(sorted(ps)) for ps in parent_sets)
    child_lists = [[] for _ in range(m)]
    for j in range(m):
        for k in parents[j]:
            child_lists[k].append(j)
    children = tuple(tuple(cs) for cs in child_lists)

    order = _topological_order(m, parents, children)
    logger.debug("Built DAG with %d nodes and %d edges", m, sum(len(p) for p in parents))
    return Dag(m=m, parents=parents, children=children, order=order)


def chain_dag(m: int) -> Dag:
    """Fixed-sequence graph 0 -> 1 -> ... -> m-1."""
    return build_dag(m, [(i, i + 1) for i in range(m - 1)])


def edgeless_dag(m: int) -> Dag:
    return build_dag(m, [])


def is_ancestor_closed(dag: Dag, rejected: np.ndarray) -> bool:
    """True when every rejected node has all of its parents rejected (hence all ancestors)."""
    rejected = np.asarray(rejected, dtype=bool)
    if rejected.shape != (dag.m,):
        raise LengthMismatch(f"Mask has shape {rejected.shape}, expected ({dag.m},)")
    parent_idx, child_idx = dag.edge_arrays
    return not bool(np.any(rejected[child_idx] & ~rejected[parent_idx]))
