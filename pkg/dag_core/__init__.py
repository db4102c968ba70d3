from dag_core.graph import Dag, build_dag, chain_dag, edgeless_dag, is_ancestor_closed
from dag_core.metrics import DagMetrics, compute_flow, compute_metrics, flow_residuals

__all__ = [
    "Dag",
    "DagMetrics",
    "build_dag",
    "chain_dag",
    "compute_flow",
    "compute_metrics",
    "edgeless_dag",
    "is_ancestor_closed",
    "flow_residuals",
]
