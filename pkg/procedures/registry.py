"""
registry.py: Procedure names and a single dispatcher shared by the CLI and the simulation harness.
Each entry takes the p-values plus whatever tuning the procedure needs and returns R and the rejection set.
"""

from dataclasses import dataclass
from typing import Callable, Dict, Optional, Sequence

from dag_core.graph import Dag
from dag_core.metrics import DagMetrics
from procedures.base_procedures import (
    RejectionSet,
    adaptive_bonferroni,
    bonferroni,
    kfdr_single_step,
    weighted_bonferroni,
)
from procedures.dag_procedures import dag_bh, dag_bonferroni, dag_gels, dag_pfer
from procedures.gels import BHMode, bh_variant, kfdr_stepup
from utils.errors import InputValidationError, UnknownProcedure

# =========================
# Procedure Names
# =========================
BONFERRONI = "bonferroni"
WEIGHTED_BONFERRONI = "weighted-bonferroni"
ADAPTIVE_BONFERRONI = "adaptive-bonferroni"
KFDR_SINGLE_STEP = "kfdr-single-step"

BH = "bh"
ADAPTIVE_BH = "adaptive-bh"
WEIGHTED_BH = "weighted-bh"
ORACLE_BH = "oracle-bh"
KFDR = "kfdr"

DAG_PFER = "dag-pfer"
DAG_BONFERRONI = "dag-bonferroni"
DAG_GELS = "dag-gels"
DAG_BH = "dag-bh"

DAG_PROCEDURES = frozenset({DAG_PFER, DAG_BONFERRONI, DAG_GELS, DAG_BH})
DEFAULT_GAMMA = 0.5


@dataclass(frozen=True)
class ProcedureOutcome:
    name: str
    R: int
    rejection: RejectionSet
    lam: Optional[float] = None


@dataclass(frozen=True)
class _Call:
    p: Sequence[float]
    alpha: float
    dag: Optional[Dag]
    metrics: Optional[DagMetrics]
    lam: Optional[float]
    gamma: Optional[float]
    m0: Optional[float]
    k: Optional[int]
    weights: Optional[Sequence[float]]

    def need(self, field: str, procedure: str):
        value = getattr(self, field)
        if value is None:
            raise InputValidationError(f"Procedure {procedure!r} requires {field}")
        return value


def _bonferroni(c: _Call) -> RejectionSet:
    return bonferroni(c.p, c.alpha, c.m0)


def _weighted_bonferroni(c: _Call) -> RejectionSet:
    return weighted_bonferroni(c.p, c.need("weights", WEIGHTED_BONFERRONI), c.alpha)


def _adaptive_bonferroni(c: _Call) -> RejectionSet:
    return adaptive_bonferroni(c.p, c.gamma if c.gamma is not None else DEFAULT_GAMMA, c.alpha)


def _kfdr_single_step(c: _Call) -> RejectionSet:
    return kfdr_single_step(c.p, c.need("k", KFDR_SINGLE_STEP), c.alpha)


def _bh(c: _Call) -> RejectionSet:
    return bh_variant(c.p, c.alpha, BHMode.plain())


def _adaptive_bh(c: _Call) -> RejectionSet:
    return bh_variant(c.p, c.alpha, BHMode.adaptive(c.gamma if c.gamma is not None else DEFAULT_GAMMA))


def _weighted_bh(c: _Call) -> RejectionSet:
    return bh_variant(c.p, c.alpha, BHMode.weighted(c.need("weights", WEIGHTED_BH)))


def _oracle_bh(c: _Call) -> RejectionSet:
    return bh_variant(c.p, c.alpha, BHMode.oracle(c.need("m0", ORACLE_BH)))


def _kfdr(c: _Call) -> RejectionSet:
    return kfdr_stepup(c.p, c.need("k", KFDR), c.alpha)


def _dag_pfer(c: _Call) -> RejectionSet:
    return dag_pfer(c.need("dag", DAG_PFER), c.metrics, c.p, c.alpha, c.lam)


def _dag_bonferroni(c: _Call) -> RejectionSet:
    return dag_bonferroni(c.need("dag", DAG_BONFERRONI), c.p, c.alpha, c.metrics)


def _dag_gels(c: _Call) -> RejectionSet:
    return dag_gels(c.need("dag", DAG_GELS), c.metrics, c.p, c.alpha, c.lam)[1]


def _dag_bh(c: _Call) -> RejectionSet:
    return dag_bh(c.need("dag", DAG_BH), c.p, c.alpha, c.metrics)[1]


PROCEDURES: Dict[str, Callable[[_Call], RejectionSet]] = {
    BONFERRONI: _bonferroni,
    WEIGHTED_BONFERRONI: _weighted_bonferroni,
    ADAPTIVE_BONFERRONI: _adaptive_bonferroni,
    KFDR_SINGLE_STEP: _kfdr_single_step,
    BH: _bh,
    ADAPTIVE_BH: _adaptive_bh,
    WEIGHTED_BH: _weighted_bh,
    ORACLE_BH: _oracle_bh,
    KFDR: _kfdr,
    DAG_PFER: _dag_pfer,
    DAG_BONFERRONI: _dag_bonferroni,
    DAG_GELS: _dag_gels,
    DAG_BH: _dag_bh,
}

PROCEDURE_NAMES = tuple(PROCEDURES)


def check_procedure(name: str) -> str:
    if name not in PROCEDURES:
        raise UnknownProcedure(f"Unknown procedure {name!r}; choose from {', '.join(PROCEDURE_NAMES)}")
    return name


def run_procedure(
    name: str,
    *,
    p: Sequence[float],
    alpha: float,
    dag: Optional[Dag] = None,
    metrics: Optional[DagMetrics] = None,
    lam: Optional[float] = None,
    gamma: Optional[float] = None,
    m0: Optional[float] = None,
    k: Optional[int] = None,
    weights: Optional[Sequence[float]] = None,
) -> ProcedureOutcome:
    check_procedure(name)
    if name == DAG_GELS and lam is None:
        lam = 2.0 * float(alpha)
    call = _Call(p=p, alpha=alpha, dag=dag, metrics=metrics, lam=lam, gamma=gamma, m0=m0, k=k, weights=weights)
    rejection = PROCEDURES[name](call)
    used_lam = lam if name in (DAG_GELS, DAG_PFER) else None
    return ProcedureOutcome(name=name, R=rejection.count, rejection=rejection, lam=used_lam)
