"""
file_formats.py: Tab-separated DAG, p-value and weight files.

DAG file:     one `parent<TAB>child` edge per line; `node<TAB>-` declares a node with no edge.
P-value file: one `id<TAB>value` per line, value in [0, 1].
Weight file:  one `id<TAB>weight` per line, weight >= 0.
Blank lines are skipped. Node ids are arbitrary non-empty tab-free strings, indexed in order of
first appearance.
"""

import logging
import math
from typing import Callable, Dict, Iterator, List, Optional, Sequence, TextIO, Tuple

import numpy as np

from dag_core.graph import Dag, build_dag
from utils.errors import CycleDetected, MissingPValue, ParseError, UnknownNodeId

logger = logging.getLogger(__name__)

ISOLATED_MARKER = "-"


def _records(path: str) -> Iterator[Tuple[int, str, str]]:
    """(line number, left, right) for every non-blank line."""
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ParseError(path, lineno, f"expected 2 tab-separated fields, found {len(parts)}")
            left, right = parts
            if not left or not right:
                raise ParseError(path, lineno, "empty field")
            yield lineno, left, right


def read_dag_file(path: str) -> Tuple[Dag, List[str]]:
    ids: List[str] = []
    index: Dict[str, int] = {}
    edges = []

    def intern(node_id: str) -> int:
        if node_id not in index:
            index[node_id] = len(ids)
            ids.append(node_id)
        return index[node_id]

    for lineno, parent, child in _records(path):
        if parent == ISOLATED_MARKER:
            raise ParseError(path, lineno, f"{ISOLATED_MARKER!r} is not a valid node id")
        p = intern(parent)
        if child != ISOLATED_MARKER:
            edges.append((p, intern(child)))

    try:
        dag = build_dag(len(ids), edges)
    except CycleDetected as exc:
        raise CycleDetected(exc.node, label=ids[exc.node]) from exc
    logger.debug("Read %d nodes and %d edges from %s", dag.m, dag.edge_count, path)
    return dag, ids


def _read_values(path: str, kind: str, check: Callable[[float], Optional[str]]) -> Dict[str, float]:
    values: Dict[str, float] = {}
    for lineno, node_id, raw in _records(path):
        if node_id in values:
            raise ParseError(path, lineno, f"duplicate id {node_id!r}")
        try:
            value = float(raw)
        except ValueError:
            raise ParseError(path, lineno, f"{kind} {raw!r} is not a decimal number")
        problem = check(value)
        if problem:
            raise ParseError(path, lineno, f"{kind} {raw!r} for {node_id!r} {problem}")
        values[node_id] = value
    logger.debug("Read %d %s entries from %s", len(values), kind, path)
    return values


def read_pvalue_file(path: str) -> Dict[str, float]:
    return _read_values(path, "p-value", lambda v: None if 0.0 <= v <= 1.0 else "is outside [0, 1]")


def read_weight_file(path: str) -> Dict[str, float]:
    return _read_values(
        path, "weight", lambda v: None if 0.0 <= v and math.isfinite(v) else "must be finite and nonnegative"
    )


def align_values(ids: Sequence[str], values: Dict[str, float], kind: str = "p-value") -> np.ndarray:
    """Order `values` by `ids`; every id needs a value and every value needs an id."""
    missing = [node_id for node_id in ids if node_id not in values]
    if missing:
        raise MissingPValue(f"No {kind} for node {missing[0]!r} ({len(missing)} missing)")
    known = set(ids)
    extra = [node_id for node_id in values if node_id not in known]
    if extra:
        raise UnknownNodeId(f"{kind} given for {extra[0]!r}, which is not a node of the graph")
    return np.asarray([values[node_id] for node_id in ids], dtype=np.float64)


def write_edges(dag: Dag, ids: Sequence[str], stream: TextIO) -> None:
    """Every node as `id<TAB>-` in index order, then every edge; re-reads to the same Dag."""
    for node_id in ids:
        stream.write(f"{node_id}\t{ISOLATED_MARKER}\n")
    for parent, child in dag.edges():
        stream.write(f"{ids[parent]}\t{ids[child]}\n")
