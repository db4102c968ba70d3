"""
config.py: Experiment configuration models and the JSON loader.

Experiment files carry "schema": 1 and may add a "sweep" block listing values of rho, the leaf
null proportion and lambda; every combination becomes one SimulationConfig. Unknown fields are
rejected. Validation failures surface as ConfigError with a JSON path such as $.sweep.rho[1].
"""

import itertools
import json
import logging
from typing import Annotated, Any, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from procedures import registry
from utils.errors import ConfigError

logger = logging.getLogger(__name__)

# need per-hypothesis weights or k, which a generated experiment does not supply
UNSUPPORTED_IN_SIMULATION = frozenset({
    registry.WEIGHTED_BONFERRONI,
    registry.WEIGHTED_BH,
    registry.KFDR,
    registry.KFDR_SINGLE_STEP,
})

Rho = Annotated[float, Field(ge=0.0, lt=1.0)]
Proportion = Annotated[float, Field(ge=0.0, le=1.0)]
Lambda = Annotated[float, Field(gt=0.0)]


class SimulationConfig(BaseModel):
    """One grid point of the Monte Carlo study."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    layer_widths: List[int] = Field(default_factory=lambda: [1000, 1001, 1002], min_length=1)
    graph: Literal["layered", "edgeless"] = "layered"
    leaf_null_proportion: Proportion = 0.9
    rho: Rho = 0.0
    mu: Tuple[float, float, float] = (3.0, 2.0, 1.0)
    alpha: float = Field(0.05, gt=0.0, lt=1.0)
    lam: Lambda = 0.1
    replications: int = Field(1000, ge=1)
    seed: int = Field(0, ge=0)
    procedures: List[str] = Field(
        default_factory=lambda: [registry.DAG_GELS, registry.DAG_BH, registry.BH],
        min_length=1,
    )
    fixed_truth: bool = False

    @field_validator("layer_widths")
    @classmethod
    def _positive_widths(cls, widths: List[int]) -> List[int]:
        if any(w < 1 for w in widths):
            raise ValueError("every layer width must be at least 1")
        return widths

    @field_validator("procedures")
    @classmethod
    def _known_procedures(cls, names: List[str]) -> List[str]:
        for name in names:
            registry.check_procedure(name)
            if name in UNSUPPORTED_IN_SIMULATION:
                raise ValueError(f"procedure {name!r} cannot be simulated")
        if len(set(names)) != len(names):
            raise ValueError("procedures must not repeat")
        return names

    @model_validator(mode="after")
    def _braid_widths(self) -> "SimulationConfig":
        if self.graph == "layered":
            for k in range(len(self.layer_widths) - 1):
                if self.layer_widths[k + 1] != self.layer_widths[k] + 1:
                    raise ValueError("layered graphs need each layer exactly one node wider than the previous")
        return self

    @property
    def m(self) -> int:
        return sum(self.layer_widths)

    def with_overrides(self, **overrides: Any) -> "SimulationConfig":
        """Re-validated copy with the given fields replaced; None values are ignored."""
        data = self.model_dump()
        data.update({k: v for k, v in overrides.items() if v is not None})
        return SimulationConfig.model_validate(data)


class SweepGrid(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    rho: Optional[List[Rho]] = Field(None, min_length=1)
    leaf_null_proportion: Optional[List[Proportion]] = Field(None, min_length=1)
    lam: Optional[List[Lambda]] = Field(None, min_length=1)


class SweepConfig(SimulationConfig):
    """A versioned experiment file: base settings plus an optional sweep grid."""

    model_config = ConfigDict(extra="forbid", frozen=True, populate_by_name=True)

    schema_version: Literal[1] = Field(alias="schema")
    name: str = Field("experiment", min_length=1)
    sweep: SweepGrid = Field(default_factory=SweepGrid)

    def base(self) -> SimulationConfig:
        return SimulationConfig.model_validate(self.model_dump(exclude={"schema_version", "name", "sweep"}))

    def points(self) -> List[SimulationConfig]:
        """Grid points in rho-major, then proportion, then lambda order."""
        base = self.base()
        rhos = self.sweep.rho or [base.rho]
        pis = self.sweep.leaf_null_proportion or [base.leaf_null_proportion]
        lams = self.sweep.lam or [base.lam]
        return [
            base.with_overrides(rho=rho, leaf_null_proportion=pi, lam=lam)
            for rho, pi, lam in itertools.product(rhos, pis, lams)
        ]

    def with_overrides(self, **overrides: Any) -> "SweepConfig":
        data = self.model_dump(by_alias=True)
        data.update({k: v for k, v in overrides.items() if v is not None})
        return SweepConfig.model_validate(data)


def json_path(loc: Tuple[Any, ...]) -> str:
    path = "$"
    for part in loc:
        path += f"[{part}]" if isinstance(part, int) else f".{part}"
    return path


def _config_error(exc: ValidationError) -> ConfigError:
    first = exc.errors()[0]
    message = first["msg"]
    if len(exc.errors()) > 1:
        message += f" (and {len(exc.errors()) - 1} more)"
    return ConfigError(json_path(tuple(first["loc"])), message)


def parse_sweep_config(data: Any) -> SweepConfig:
    try:
        return SweepConfig.model_validate(data)
    except ValidationError as exc:
        raise _config_error(exc) from exc


def load_sweep_config(path: str) -> SweepConfig:
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except FileNotFoundError as exc:
        raise ConfigError("$", f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError("$", f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc

    config = parse_sweep_config(data)
    logger.info("Loaded experiment %r from %s (%d grid points)", config.name, path, len(config.points()))
    return config
