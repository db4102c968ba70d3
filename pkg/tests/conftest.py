import logging
import os

import numpy as np
import pytest

from dag_core.graph import Dag, build_dag, chain_dag, edgeless_dag
from dag_core.metrics import compute_flow, compute_metrics

DATA_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "data")
CONFIG_DIR = os.path.join(os.path.dirname(DATA_DIR), "configs")

# nine-node worked example, H1..H9 as indices 0..8
NINE_NODE_EDGES = [(0, 2), (0, 3), (1, 3), (1, 4), (2, 5), (2, 6), (3, 6), (3, 7), (4, 7), (4, 8)]
NINE_NODE_LEAF_FLOW = [2.0, 2.0, 1.5, 1.0, 1.5, 1.0, 1.0, 1.0, 1.0]


def nine_node() -> Dag:
    return build_dag(9, NINE_NODE_EDGES)


def with_flow(dag: Dag):
    return compute_flow(dag, compute_metrics(dag))


def random_dag(rng: np.random.Generator, m: int, density: float = None) -> Dag:
    """Random DAG on m nodes: edges only from earlier to later positions of a random permutation."""
    if density is None:
        density = min(1.0, 2.5 / max(m, 1))
    perm = rng.permutation(m)
    edges = []
    for a in range(m):
        for b in range(a + 1, m):
            if rng.random() < density:
                edges.append((int(perm[a]), int(perm[b])))
    return build_dag(m, edges)


@pytest.fixture
def nine_node_dag() -> Dag:
    return nine_node()


@pytest.fixture
def nine_node_metrics(nine_node_dag):
    return with_flow(nine_node_dag)


@pytest.fixture
def chain3() -> Dag:
    return chain_dag(3)


@pytest.fixture
def edgeless5() -> Dag:
    return edgeless_dag(5)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)


@pytest.fixture(autouse=True)
def _restore_root_logging():
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield
    root.handlers[:] = handlers
    root.setLevel(level)
