"""
gels.py: The GELS meta-procedure and the stepup procedures it reduces to.

gels_run applies a base procedure at the self-consistent level alpha / W(R), where R is the
largest r with r <= R_base(alpha / W(r)). R is found by descending from r = m; every step must
strictly decrease r until a fixed point, otherwise the base is not alpha-monotone.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from procedures.base_procedures import (
    RejectionSet,
    as_pvalues,
    check_k,
    check_level,
    kfdr_critical_value,
    adaptive_m0,
    normalize_weights,
    weighted_pvalues,
)
from procedures.weights import WeightFunction
from utils.errors import InputValidationError, LengthMismatch, NonConvergence, NonMonotoneConstants

logger = logging.getLogger(__name__)


def gels_run(base, weight: WeightFunction, alpha: float, m: Optional[int] = None) -> Tuple[int, RejectionSet]:
    alpha = check_level(alpha, "alpha")
    if m is None:
        m = base.m
    elif m != base.m:
        raise LengthMismatch(f"m={m} does not match the base procedure's {base.m} hypotheses")
    weight.check_domain(m)

    r = m
    steps = 0
    while True:
        nxt = base.count(weight.level(alpha, r))
        if nxt == r:
            break
        if nxt > r:
            raise NonConvergence(
                f"{base.name}: rejection count rose from {r} to {nxt} at a lower level; "
                "the base procedure is not alpha-monotone"
            )
        r = nxt
        steps += 1

    rejection = base.reject(weight.level(alpha, r))
    if rejection.count != r:
        raise NonConvergence(f"{base.name}: count() says {r} but reject() rejected {rejection.count}")
    logger.debug("GELS %s with %s: R=%d after %d descent steps", base.name, weight.label, r, steps)
    return r, rejection


def stepup(pvalues: Sequence[float], constants: Sequence[float]) -> RejectionSet:
    """R = max{r : P_(r) <= c_r}; rejects every P_i <= c_R. With R = 0 nothing is rejected and c_1 is reported."""
    p = as_pvalues(pvalues)
    c = np.asarray(constants, dtype=np.float64)
    if c.shape != p.shape:
        raise LengthMismatch(f"{c.size} constants for {p.size} p-values")
    if np.any(np.isnan(c)) or np.any(np.diff(c) < 0):
        raise NonMonotoneConstants("Stepup critical constants must be non-decreasing")

    hits = np.flatnonzero(np.sort(p) <= c)
    if hits.size == 0:
        floor = float(c[0]) if c.size else 0.0
        return RejectionSet(rejected=np.zeros(p.size, dtype=bool), thresholds=np.full(p.size, floor))
    cut = float(c[hits[-1]])
    return RejectionSet(rejected=p <= cut, thresholds=np.full(p.size, cut))


def _linear_constants(m: int, alpha: float, denominator: float) -> np.ndarray:
    return np.minimum(1.0, np.arange(1, m + 1) * alpha / denominator)


@dataclass(frozen=True)
class BHMode:
    kind: str = "plain"
    gamma: Optional[float] = None
    weights: Optional[Tuple[float, ...]] = None
    m0: Optional[float] = None

    @classmethod
    def plain(cls) -> "BHMode":
        return cls("plain")

    @classmethod
    def adaptive(cls, gamma: float) -> "BHMode":
        return cls("adaptive", gamma=float(gamma))

    @classmethod
    def weighted(cls, weights: Sequence[float]) -> "BHMode":
        return cls("weighted", weights=tuple(float(w) for w in weights))

    @classmethod
    def oracle(cls, m0: float) -> "BHMode":
        return cls("oracle", m0=float(m0))


def bh_variant(pvalues: Sequence[float], alpha: float, mode: BHMode = BHMode()) -> RejectionSet:
    p = as_pvalues(pvalues)
    alpha = check_level(alpha, "alpha")
    m = p.size

    if mode.kind == "plain":
        return stepup(p, _linear_constants(m, alpha, max(m, 1)))
    if mode.kind == "adaptive":
        return stepup(p, _linear_constants(m, alpha, adaptive_m0(p, mode.gamma)))
    if mode.kind == "oracle":
        m0 = check_level(mode.m0, "m0")
        return stepup(p, _linear_constants(m, alpha, m0))
    if mode.kind == "weighted":
        w = normalize_weights(mode.weights, m)
        q = weighted_pvalues(p, w)
        hits = np.flatnonzero(np.sort(q) <= np.arange(1, m + 1) * alpha / max(m, 1))
        if hits.size == 0:
            return RejectionSet(rejected=np.zeros(m, dtype=bool), thresholds=np.minimum(1.0, w * alpha / m))
        cut = (hits[-1] + 1) * alpha / m
        return RejectionSet(rejected=q <= cut, thresholds=np.minimum(1.0, w * cut))
    raise InputValidationError(f"Unknown BH mode {mode.kind!r}")


def kfdr_constants(m: int, k: int, alpha: float) -> np.ndarray:
    """alpha_i = [(k-1)! max(k, i) alpha / C(m, k)]^(1/k), i = 1..m."""
    alpha = check_level(alpha, "alpha")
    k = check_k(k, m)
    return np.fromiter(
        (kfdr_critical_value(alpha * float(max(k, i)), m, k) for i in range(1, m + 1)),
        dtype=np.float64,
        count=m,
    )


def kfdr_stepup(pvalues: Sequence[float], k: int, alpha: float) -> RejectionSet:
    p = as_pvalues(pvalues)
    return stepup(p, kfdr_constants(p.size, k, alpha))
