"""
base_procedures.py: Single-step base procedures and the shared p-value / rejection types.

A base procedure is evaluated at a level beta and must be alpha-monotone: its rejection count
never decreases when beta grows. GELS (procedures.gels) only ever talks to bases through
`count(level)` and `reject(level)`.
"""

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.special import gammaln

from utils.errors import (
    GammaOutOfRange,
    InvalidPValue,
    KOutOfRange,
    LengthMismatch,
    NonPositiveLevel,
    WeightNormalization,
)

WEIGHT_SUM_TOLERANCE = 1e-9


def as_pvalues(values: Sequence[float]) -> np.ndarray:
    """Validated read-only float64 copy of a p-value vector."""
    arr = np.array(values, dtype=np.float64, copy=True)
    if arr.ndim != 1:
        raise InvalidPValue(f"p-values must be one-dimensional, got shape {arr.shape}")
    bad = ~((arr >= 0.0) & (arr <= 1.0))
    if np.any(bad):
        first = int(np.flatnonzero(bad)[0])
        raise InvalidPValue(f"p-value at index {first} is {arr[first]!r}, outside [0, 1]")
    arr.setflags(write=False)
    return arr


def check_level(level: float, name: str = "level") -> float:
    level = float(level)
    if not (level > 0.0 and math.isfinite(level)):
        raise NonPositiveLevel(f"{name} must be a positive finite number, got {level!r}")
    return level


@dataclass(frozen=True, eq=False)
class RejectionSet:
    rejected: np.ndarray
    thresholds: Optional[np.ndarray] = None

    @property
    def m(self) -> int:
        return int(self.rejected.shape[0])

    @property
    def count(self) -> int:
        return int(np.count_nonzero(self.rejected))

    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.rejected)

    def same_as(self, other: "RejectionSet") -> bool:
        return bool(np.array_equal(self.rejected, other.rejected))

    @classmethod
    def empty(cls, m: int) -> "RejectionSet":
        return cls(rejected=np.zeros(m, dtype=bool), thresholds=np.zeros(m, dtype=np.float64))


class BaseProcedure(ABC):
    """A level-parameterized rejection rule over fixed p-values."""

    name = "base"

    def __init__(self, pvalues: Sequence[float]):
        self.pvalues = as_pvalues(pvalues)

    @property
    def m(self) -> int:
        return int(self.pvalues.shape[0])

    @abstractmethod
    def reject(self, level: float) -> RejectionSet:
        ...

    def count(self, level: float) -> int:
        return self.reject(level).count


class SingleStepBase(BaseProcedure):
    """Rejects every H_i with P_i <= t(level) for one common critical value t."""

    def __init__(self, pvalues: Sequence[float]):
        super().__init__(pvalues)
        self._sorted = np.sort(self.pvalues)

    @abstractmethod
    def critical_value(self, level: float) -> float:
        ...

    def count(self, level: float) -> int:
        return int(np.searchsorted(self._sorted, self.critical_value(level), side="right"))

    def reject(self, level: float) -> RejectionSet:
        t = self.critical_value(level)
        return RejectionSet(rejected=self.pvalues <= t, thresholds=np.full(self.m, t))


class BonferroniBase(SingleStepBase):
    """Threshold level/denominator; denominator m0 gives the oracle variant."""

    name = "bonferroni"

    def __init__(self, pvalues: Sequence[float], denominator: Optional[float] = None):
        super().__init__(pvalues)
        if denominator is None:
            denominator = max(self.m, 1)
        self.denominator = check_level(denominator, "denominator")

    def critical_value(self, level: float) -> float:
        return min(1.0, level / self.denominator)


def adaptive_m0(pvalues: Sequence[float], gamma: float) -> float:
    """Estimated true-null count (#{P_i > gamma} + 1) / (1 - gamma)."""
    gamma = float(gamma)
    if not 0.0 < gamma < 1.0:
        raise GammaOutOfRange(f"gamma must lie in (0, 1), got {gamma!r}")
    p = as_pvalues(pvalues)
    return (int(np.count_nonzero(p > gamma)) + 1) / (1.0 - gamma)


class AdaptiveBonferroniBase(SingleStepBase):
    """Bonferroni with m replaced by m0_hat, frozen at construction so only the level varies."""

    name = "adaptive-bonferroni"

    def __init__(self, pvalues: Sequence[float], gamma: float):
        super().__init__(pvalues)
        self.gamma = float(gamma)
        self.m0_hat = adaptive_m0(self.pvalues, gamma)

    def critical_value(self, level: float) -> float:
        return min(1.0, level / self.m0_hat)


def log_binomial(m: int, k: int) -> float:
    return float(gammaln(m + 1) - gammaln(k + 1) - gammaln(m - k + 1))


def kfdr_critical_value(level: float, m: int, k: int) -> float:
    """t = [(k-1)! level / C(m, k)]^(1/k), evaluated in log space and clamped to [0, 1]."""
    if k == 1:
        return min(1.0, level / m)
    log_t = (float(gammaln(k)) + math.log(level) - log_binomial(m, k)) / k
    return min(1.0, math.exp(log_t))


def check_k(k: int, m: int) -> int:
    if isinstance(k, bool) or int(k) != k or not 1 <= int(k) <= m:
        raise KOutOfRange(f"k must be an integer in [1, {m}], got {k!r}")
    return int(k)


class KFdrSingleStepBase(SingleStepBase):
    name = "kfdr-single-step"

    def __init__(self, pvalues: Sequence[float], k: int):
        super().__init__(pvalues)
        self.k = check_k(k, self.m)

    def critical_value(self, level: float) -> float:
        return kfdr_critical_value(level, self.m, self.k)


def check_weights(weights: Sequence[float], m: int) -> np.ndarray:
    w = np.array(weights, dtype=np.float64, copy=True)
    if w.shape != (m,):
        raise LengthMismatch(f"Expected {m} weights, got shape {w.shape}")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise WeightNormalization("Weights must be finite and nonnegative")
    if abs(float(w.sum()) - m) > WEIGHT_SUM_TOLERANCE * max(1, m):
        raise WeightNormalization(f"Weights sum to {w.sum()!r}; they must sum to m={m}")
    w.setflags(write=False)
    return w


def normalize_weights(weights: Sequence[float], m: int) -> np.ndarray:
    """Rescale nonnegative weights to sum to m (mean one)."""
    w = np.array(weights, dtype=np.float64, copy=True)
    if w.shape != (m,):
        raise LengthMismatch(f"Expected {m} weights, got shape {w.shape}")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise WeightNormalization("Weights must be finite and nonnegative")
    total = float(w.sum())
    if m and total <= 0.0:
        raise WeightNormalization("Weights must have a positive sum")
    if m:
        w = w * (m / total)
    w.setflags(write=False)
    return w


def weighted_pvalues(pvalues: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """P_i / w_i, with +inf where w_i = 0 so those hypotheses are never rejected."""
    q = np.full(pvalues.shape, np.inf)
    positive = weights > 0
    q[positive] = pvalues[positive] / weights[positive]
    return q


class WeightedBonferroniBase(BaseProcedure):
    """Rejects H_i when P_i / w_i <= level / m, i.e. P_i <= w_i level / m."""

    name = "weighted-bonferroni"

    def __init__(self, pvalues: Sequence[float], weights: Sequence[float]):
        super().__init__(pvalues)
        self.weights = check_weights(weights, self.m)
        self._q = weighted_pvalues(self.pvalues, self.weights)
        self._sorted_q = np.sort(self._q)

    def count(self, level: float) -> int:
        return int(np.searchsorted(self._sorted_q, level / max(self.m, 1), side="right"))

    def reject(self, level: float) -> RejectionSet:
        cut = level / max(self.m, 1)
        return RejectionSet(
            rejected=self._q <= cut,
            thresholds=np.minimum(1.0, self.weights * cut),
        )


def bonferroni(pvalues: Sequence[float], alpha: float, denominator: Optional[float] = None) -> RejectionSet:
    return BonferroniBase(pvalues, denominator).reject(check_level(alpha, "alpha"))


def weighted_bonferroni(pvalues: Sequence[float], weights: Sequence[float], beta: float) -> RejectionSet:
    return WeightedBonferroniBase(pvalues, weights).reject(check_level(beta, "beta"))


def adaptive_bonferroni(pvalues: Sequence[float], gamma: float, beta: float) -> RejectionSet:
    return AdaptiveBonferroniBase(pvalues, gamma).reject(check_level(beta, "beta"))


def kfdr_single_step(pvalues: Sequence[float], k: int, beta: float) -> RejectionSet:
    return KFdrSingleStepBase(pvalues, k).reject(check_level(beta, "beta"))
