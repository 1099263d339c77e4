"""
models.py

Pydantic models shared by the CLI, the pipeline and the experiments:
RunConfig (validated input), Criterion and TrendFit (pieces of a report) and
CocycleReport (the structured output of one experiment).
"""

from __future__ import annotations

from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator

from app.core.constants import CACHE_DIR, DEFAULT_OUTPUT_DIR, DEFAULT_SEED, SUPPORTED_GROUPS

COMMANDS = (
    "verify-group",
    "verify-cocycle",
    "growth",
    "witness",
    "integrability",
    "uniform-bounded",
    "lr-properness",
    "norm-equivalence",
    "lp-isometry",
    "cowling-scan",
)

Cell = Union[float, int, str]


class RunConfig(BaseModel):
    """One experiment invocation; every list left empty falls back to the experiment default."""

    model_config = ConfigDict(extra="forbid")

    command: str
    group: str = "so"
    n: int = 2
    experiment: Optional[Literal["visual", "busemann"]] = None
    backend: Optional[Literal["spectral", "chart"]] = None
    t_list: list[float] = Field(default_factory=list)
    k_list: list[float] = Field(default_factory=list)
    s_list: list[float] = Field(default_factory=list)
    eps_list: list[float] = Field(default_factory=list)
    xi_list: list[float] = Field(default_factory=list)
    m_list: list[int] = Field(default_factory=list)
    grid_L: Optional[float] = None
    grid_m: Optional[int] = None
    band: Optional[int] = None
    samples: Optional[int] = None
    lam: float = 0.0
    seed: int = DEFAULT_SEED
    out: str = DEFAULT_OUTPUT_DIR
    cache: str = CACHE_DIR

    @field_validator("command")
    @classmethod
    def _known_command(cls, value: str) -> str:
        if value not in COMMANDS:
            raise ValueError(f"unknown command '{value}'; expected one of {', '.join(COMMANDS)}")
        return value

    @field_validator("group")
    @classmethod
    def _known_group(cls, value: str) -> str:
        value = value.lower()
        if value not in SUPPORTED_GROUPS:
            raise ValueError(f"unknown group '{value}'; expected one of {', '.join(SUPPORTED_GROUPS)}")
        return value

    @field_validator("n")
    @classmethod
    def _positive_n(cls, value: int) -> int:
        if value < 1:
            raise ValueError("n must be >= 1")
        return value

    @field_validator("samples")
    @classmethod
    def _positive_samples(cls, value: Optional[int]) -> Optional[int]:
        if value is not None and value < 1:
            raise ValueError("samples must be >= 1")
        return value


class Criterion(BaseModel):
    """One pass/fail check with the measured value and the threshold it was held to."""

    name: str
    passed: bool
    value: float
    threshold: float
    detail: str = ""


class TrendFit(BaseModel):
    """Least-squares fit of a measured curve against a candidate growth law."""

    law: str
    slope: float
    intercept: float
    r_value: float
    derived_expectation: bool = True


class CocycleReport(BaseModel):
    """Structured output of one experiment: table, criteria, fits and provenance."""

    experiment: str
    group: str
    n: int
    label: str
    columns: list[str]
    rows: list[list[Cell]] = Field(default_factory=list)
    criteria: list[Criterion] = Field(default_factory=list)
    trends: list[TrendFit] = Field(default_factory=list)
    notes: list[str] = Field(default_factory=list)
    runtime_seconds: float = 0.0
    config: Optional[dict] = None
    logs: list[str] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.criteria)

    def column(self, name: str) -> list[Cell]:
        idx = self.columns.index(name)
        return [row[idx] for row in self.rows]

    def criterion(self, name: str) -> Criterion:
        for c in self.criteria:
            if c.name == name:
                return c
        raise KeyError(name)

    def add_row(self, *cells: Cell) -> None:
        if len(cells) != len(self.columns):
            raise ValueError(f"row has {len(cells)} cells, expected {len(self.columns)}")
        self.rows.append(list(cells))

    def check(self, name: str, passed: bool, value: float, threshold: float, detail: str = "") -> Criterion:
        crit = Criterion(name=name, passed=bool(passed), value=float(value), threshold=float(threshold), detail=detail)
        self.criteria.append(crit)
        return crit
