"""
weights.py: Weight functions W(r) turning a simple error measure E[L] into E[W(R) L].
PFER uses W = 1, FDR uses W = 1/(r v 1), k-FDR uses W = 1/(r v k); anything else is tabulated.
"""

from typing import Callable, Optional, Sequence

import numpy as np

from utils.errors import InvalidWeightFunction, KOutOfRange

PFER = "pfer"
FDR = "fdr"
KFDR = "kfdr"
CUSTOM = "custom"


class WeightFunction:
    """
    Non-increasing, strictly positive W on {0, ..., m}.

    GELS needs alpha / W(r); `level` computes it as alpha * (1 / W(r)) with the reciprocal
    kept exact for the predefined kinds, so FDR levels are exactly alpha * max(r, 1).
    """

    def __init__(self, kind: str, reciprocal: Callable[[int], float], label: str, max_r: Optional[int] = None):
        self.kind = kind
        self._reciprocal = reciprocal
        self.label = label
        self.max_r = max_r

    def __repr__(self) -> str:
        return f"WeightFunction({self.label})"

    def __call__(self, r: int) -> float:
        return 1.0 / self.reciprocal(r)

    def reciprocal(self, r: int) -> float:
        if r < 0 or (self.max_r is not None and r > self.max_r):
            raise InvalidWeightFunction(f"{self.label} is not defined at r={r}")
        return self._reciprocal(r)

    def level(self, alpha: float, r: int) -> float:
        return alpha * self.reciprocal(r)

    def check_domain(self, m: int) -> None:
        if self.max_r is not None and self.max_r < m:
            raise InvalidWeightFunction(f"{self.label} covers r <= {self.max_r}, need r <= {m}")

    @classmethod
    def pfer(cls) -> "WeightFunction":
        return cls(PFER, lambda r: 1.0, "PFER")

    @classmethod
    def fdr(cls) -> "WeightFunction":
        return cls(FDR, lambda r: float(max(r, 1)), "FDR")

    @classmethod
    def kfdr(cls, k: int) -> "WeightFunction":
        if isinstance(k, bool) or int(k) != k or k < 1:
            raise KOutOfRange(f"k must be a positive integer, got {k!r}")
        k = int(k)
        return cls(KFDR, lambda r: float(max(r, k)), f"kFDR(k={k})")

    @classmethod
    def custom(cls, table: Sequence[float]) -> "WeightFunction":
        """Tabulated W(0), ..., W(m); entries must be in (0, 1] and non-increasing."""
        values = np.array(table, dtype=np.float64, copy=True)
        if values.ndim != 1 or values.size == 0:
            raise InvalidWeightFunction("Custom weight table must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(values)) or np.any(values <= 0.0) or np.any(values > 1.0):
            raise InvalidWeightFunction("Custom weights must lie in (0, 1]")
        if np.any(np.diff(values) > 0.0):
            raise InvalidWeightFunction("Custom weights must be non-increasing in r")
        reciprocals = 1.0 / values
        return cls(CUSTOM, lambda r: float(reciprocals[r]), "custom", max_r=values.size - 1)

    @classmethod
    def penalized(cls, fn: Callable[[int], float], m: int) -> "WeightFunction":
        """Tabulate an arbitrary penalty fn(r) for r = 0..m, e.g. for penalized FDR E[W(R) V]."""
        return cls.custom([fn(r) for r in range(m + 1)])
