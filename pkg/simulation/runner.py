"""
runner.py: Monte Carlo replication loop, parallel dispatch and summary statistics.

Replication `rep` always draws from SeedSequence(seed, spawn_key=(0, rep)), so results do not
depend on how replications are split across worker processes. Per-replication statistics are
gathered in replication order before any averaging.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from dag_core.graph import Dag, edgeless_dag
from dag_core.metrics import DagMetrics, compute_flow, compute_metrics
from procedures import registry
from reference_oracles.oracles import CounterexampleBase, counterexample_fdr
from simulation.config import SimulationConfig, SweepConfig
from simulation.design import TruthAssignment, assign_truth, build_layered_dag, generate_pvalues, node_roles
from utils.errors import InvalidReplications, NonConvergence
from utils.settings import get_settings

logger = logging.getLogger(__name__)

# columns of the per-replication statistics array
FDP, POWER, FALSE_REJECTIONS, REJECTIONS = range(4)


def _mean_and_stderr(samples: np.ndarray) -> Tuple[float, float]:
    n = samples.shape[0]
    mean = float(samples.mean())
    if n < 2:
        return mean, 0.0
    return mean, float(samples.std(ddof=1) / math.sqrt(n))


@dataclass(frozen=True)
class ProcedureSummary:
    procedure: str
    fdr_estimate: float
    fdr_stderr: float
    power_estimate: float
    power_stderr: float
    fwer_estimate: float
    fwer_stderr: float
    pfer_estimate: float
    pfer_stderr: float
    mean_rejections: float
    replications: int

    @classmethod
    def from_samples(cls, procedure: str, samples: np.ndarray) -> "ProcedureSummary":
        fdr, fdr_se = _mean_and_stderr(samples[:, FDP])
        power, power_se = _mean_and_stderr(samples[:, POWER])
        fwer, fwer_se = _mean_and_stderr((samples[:, FALSE_REJECTIONS] > 0).astype(np.float64))
        pfer, pfer_se = _mean_and_stderr(samples[:, FALSE_REJECTIONS])
        return cls(
            procedure=procedure,
            fdr_estimate=fdr,
            fdr_stderr=fdr_se,
            power_estimate=power,
            power_stderr=power_se,
            fwer_estimate=fwer,
            fwer_stderr=fwer_se,
            pfer_estimate=pfer,
            pfer_stderr=pfer_se,
            mean_rejections=float(samples[:, REJECTIONS].mean()),
            replications=int(samples.shape[0]),
        )


@dataclass(frozen=True)
class SimulationResult:
    config: SimulationConfig
    summaries: Tuple[ProcedureSummary, ...]

    def summary(self, procedure: str) -> ProcedureSummary:
        for s in self.summaries:
            if s.procedure == procedure:
                return s
        raise KeyError(procedure)

    def rows(self) -> List[Dict[str, object]]:
        rows = []
        for s in self.summaries:
            rows.append({
                "rho": self.config.rho,
                "leaf_null_proportion": self.config.leaf_null_proportion,
                "lam": self.config.lam,
                "alpha": self.config.alpha,
                "procedure": s.procedure,
                "fdr": s.fdr_estimate,
                "fdr_stderr": s.fdr_stderr,
                "power": s.power_estimate,
                "power_stderr": s.power_stderr,
                "fwer": s.fwer_estimate,
                "fwer_stderr": s.fwer_stderr,
                "pfer": s.pfer_estimate,
                "pfer_stderr": s.pfer_stderr,
                "mean_rejections": s.mean_rejections,
                "replications": s.replications,
            })
        return rows


@dataclass(frozen=True, eq=False)
class _Context:
    config: SimulationConfig
    dag: Dag
    metrics: Optional[DagMetrics]
    roles: np.ndarray
    fixed_truth: Optional[TruthAssignment]


_CONTEXT: Optional[_Context] = None


def _prepare(config: SimulationConfig) -> _Context:
    if config.graph == "edgeless":
        dag = edgeless_dag(config.m)
    else:
        dag = build_layered_dag(config.layer_widths)

    metrics = None
    if any(name in registry.DAG_PROCEDURES for name in config.procedures):
        metrics = compute_flow(dag, compute_metrics(dag))

    fixed_truth = None
    if config.fixed_truth:
        rng = np.random.default_rng(np.random.SeedSequence(config.seed, spawn_key=(1,)))
        fixed_truth = assign_truth(dag, config.leaf_null_proportion, rng)
    return _Context(config=config, dag=dag, metrics=metrics, roles=node_roles(dag), fixed_truth=fixed_truth)


def _init_worker(context: _Context) -> None:
    global _CONTEXT
    _CONTEXT = context


def replicate(context: _Context, rep: int) -> np.ndarray:
    """Statistics (FDP, power, V, R) of every configured procedure for replication `rep`."""
    config = context.config
    rng = np.random.default_rng(np.random.SeedSequence(config.seed, spawn_key=(0, rep)))
    truth = context.fixed_truth or assign_truth(context.dag, config.leaf_null_proportion, rng)
    p = generate_pvalues(truth, context.roles, config.mu, config.rho, rng)

    stats = np.zeros((len(config.procedures), 4), dtype=np.float64)
    false_count = truth.false_count
    for row, name in enumerate(config.procedures):
        # an oracle with no true nulls is handed m0 = 1; nothing it rejects can be false
        m0 = max(truth.m0, 1) if name == registry.ORACLE_BH else None
        outcome = registry.run_procedure(
            name,
            p=p,
            alpha=config.alpha,
            dag=context.dag,
            metrics=context.metrics,
            lam=config.lam,
            m0=m0,
        )
        r = outcome.R
        v = int(np.count_nonzero(outcome.rejection.rejected & truth.truth))
        stats[row, FDP] = v / max(r, 1)
        stats[row, POWER] = (r - v) / false_count if false_count else 0.0
        stats[row, FALSE_REJECTIONS] = v
        stats[row, REJECTIONS] = r
    return stats


def _run_chunk(reps: range) -> np.ndarray:
    return np.stack([replicate(_CONTEXT, rep) for rep in reps])


def run_experiment(
    config: SimulationConfig,
    workers: Optional[int] = None,
    chunk_size: Optional[int] = None,
) -> SimulationResult:
    settings = get_settings()
    workers = workers or settings.workers
    chunk_size = chunk_size or settings.chunk_size
    n = config.replications
    chunks = [range(start, min(start + chunk_size, n)) for start in range(0, n, chunk_size)]

    context = _prepare(config)
    logger.info(
        "Running %d replications (rho=%g, pi=%g, lambda=%g) on %d worker(s)",
        n, config.rho, config.leaf_null_proportion, config.lam, workers,
    )
    if workers == 1:
        _init_worker(context)
        blocks = [_run_chunk(chunk) for chunk in chunks]
    else:
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker, initargs=(context,)) as pool:
            blocks = list(pool.map(_run_chunk, chunks))

    samples = np.concatenate(blocks, axis=0)
    summaries = tuple(
        ProcedureSummary.from_samples(name, samples[:, row, :])
        for row, name in enumerate(config.procedures)
    )
    for s in summaries:
        logger.info("✅ %s: FDR=%.4f (se %.4f) power=%.4f", s.procedure, s.fdr_estimate, s.fdr_stderr, s.power_estimate)
    return SimulationResult(config=config, summaries=summaries)


def run_sweep(
    sweep: SweepConfig,
    workers: Optional[int] = None,
    chunk_size: Optional[int] = None,
) -> List[SimulationResult]:
    points = sweep.points()
    logger.info("Experiment %r: %d grid points", sweep.name, len(points))
    return [run_experiment(point, workers=workers, chunk_size=chunk_size) for point in points]


@dataclass(frozen=True)
class CounterexampleResult:
    simulated_fdr: float
    stderr: float
    analytic_fdr: float
    replications: int


def gels_descent_batch(pvalues: np.ndarray, alpha: float) -> np.ndarray:
    """GELS with the FDR weight over CounterexampleBase, run for every row at once."""
    r = np.full(pvalues.shape[0], pvalues.shape[1], dtype=np.int64)
    while True:
        nxt = CounterexampleBase.batch_counts(pvalues, alpha * np.maximum(r, 1).astype(np.float64))
        if np.any(nxt > r):
            raise NonConvergence("Rejection count rose during the batched descent")
        if np.array_equal(nxt, r):
            return r
        r = nxt


def counterexample_experiment(alpha: float, replications: int, rng: np.random.Generator) -> CounterexampleResult:
    """Empirical FDR of GELS over CounterexampleBase with two independent uniform true nulls."""
    analytic = counterexample_fdr(alpha)
    if isinstance(replications, bool) or int(replications) != replications or replications < 1:
        raise InvalidReplications(f"replications must be a positive integer, got {replications!r}")

    p = rng.random((int(replications), 2))
    r = gels_descent_batch(p, float(alpha))
    # both hypotheses are true nulls, so every rejection is false
    fdp = (r > 0).astype(np.float64)
    simulated, stderr = _mean_and_stderr(fdp)
    logger.info("Counterexample at alpha=%g: simulated FDR %.6f (se %.6f), exact %.6f", alpha, simulated, stderr, analytic)
    return CounterexampleResult(
        simulated_fdr=simulated,
        stderr=stderr,
        analytic_fdr=analytic,
        replications=int(replications),
    )
