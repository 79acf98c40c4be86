from __future__ import annotations

import math
from enum import Enum

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from hamcount import __version__
from hamcount.core import (
    AllDistinctPairs,
    Composition,
    Count,
    EndpointSpec,
    Pair,
    SameEndpoint,
    check_endpoints,
    count_from_decimal,
)
from hamcount.errors import UsageError


class Strategy(str, Enum):
    auto = "auto"
    closed = "closed"
    recurrence = "recurrence"


class CountObject(str, Enum):
    smirnov_endpoint = "smirnov-endpoint"
    smirnov_total = "smirnov-total"
    admissible_words = "admissible-words"
    ham_paths = "ham-paths"
    ham_cycles = "ham-cycles"
    ham_cycles_directed = "ham-cycles-directed"
    circular_positioned = "circular-positioned"
    necklaces = "necklaces"
    cut_closure = "cut-closure"


class CacheKind(str, Enum):
    S = "S"
    H = "H"
    H_directed = "H_directed"
    W = "W"
    F = "F"
    necklace = "necklace"


class Quantity(str, Enum):
    S = "S"
    H = "H"


class OutputFormat(str, Enum):
    text = "text"
    csv = "csv"
    json = "json"


class Variant(str, Enum):
    paper = "paper"
    alternative = "alternative"


class CountQuery(BaseModel):
    model_config = ConfigDict(frozen=True)

    parts: Composition
    object: CountObject
    endpoints: EndpointSpec | None = None

    @model_validator(mode="after")
    def _check_endpoints(self) -> CountQuery:
        if self.object == CountObject.smirnov_endpoint:
            if self.endpoints is None:
                raise ValueError("smirnov-endpoint needs --endpoints")
        elif self.object == CountObject.cut_closure:
            if not isinstance(self.endpoints, SameEndpoint):
                raise ValueError("cut-closure needs a single endpoint color, e.g. --endpoints 1")
        elif self.endpoints is not None:
            raise ValueError(f"{self.object.value} takes no endpoints")
        if self.endpoints is not None:
            check_endpoints(self.endpoints, self.parts)
        if self.object in (CountObject.circular_positioned, CountObject.necklaces) and self.parts.total < 2:
            raise ValueError(f"{self.object.value} needs N >= 2")
        return self

    @classmethod
    def build(
        cls,
        parts: Composition,
        object: CountObject,
        endpoints: Pair | AllDistinctPairs | SameEndpoint | None = None,
    ) -> CountQuery:
        try:
            return cls(parts=parts, object=object, endpoints=endpoints)
        except ValidationError as exc:
            messages = "; ".join(error["msg"] for error in exc.errors())
            raise UsageError(messages) from exc


class CacheRecord(BaseModel):
    model_config = ConfigDict(extra="ignore")

    kind: CacheKind
    parts: list[int]
    endpoints: list[int] | None = None
    value: str = Field(pattern=r"^[0-9]+$")
    tool_version: str = __version__

    @property
    def key(self) -> tuple[str, tuple[int, ...], tuple[int, ...] | None]:
        endpoints = tuple(self.endpoints) if self.endpoints is not None else None
        return self.kind.value, tuple(self.parts), endpoints

    @property
    def count(self) -> Count:
        return count_from_decimal(self.value)


class TableRequest(BaseModel):
    quantity: Quantity
    m_range: tuple[int, int]
    n_range: tuple[int, int]
    format: OutputFormat = OutputFormat.text

    @field_validator("m_range", "n_range")
    @classmethod
    def _check_range(cls, value: tuple[int, int]) -> tuple[int, int]:
        low, high = value
        if low < 1 or high < low:
            raise ValueError(f"range {low}..{high} must be non-empty with lower bound >= 1")
        return value

    @property
    def m_values(self) -> list[int]:
        return list(range(self.m_range[0], self.m_range[1] + 1))

    @property
    def n_values(self) -> list[int]:
        return list(range(self.n_range[0], self.n_range[1] + 1))


class LogEstimate(BaseModel):
    model_config = ConfigDict(frozen=True)

    log_value: float
    variant: Variant | None = None
    m: int | None = None
    n: int | None = None
    parts: tuple[int, ...] | None = None


class ErrorReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    exact: int
    estimate: LogEstimate
    abs_log_error: float
    rel_log_error: float | None = None


class ProportionVector(BaseModel):
    model_config = ConfigDict(frozen=True)

    values: tuple[float, ...]

    @field_validator("values")
    @classmethod
    def _check_simplex(cls, value: tuple[float, ...]) -> tuple[float, ...]:
        if not value or any(p <= 0 for p in value):
            raise ValueError("proportions must be positive")
        if not math.isclose(math.fsum(value), 1.0, abs_tol=1e-12):
            raise ValueError("proportions must sum to 1")
        return value

    def collision(self) -> float:
        return math.fsum(p * p for p in self.values)


class CalibrationRecord(BaseModel):
    model_config = ConfigDict(extra="ignore")

    m: int
    n_low: int
    n_high: int
    c_m: float
    goldens: dict[Variant, float]
    tool_version: str = __version__

    @property
    def key(self) -> tuple[int, int, int]:
        return self.m, self.n_low, self.n_high


class SuiteResult(BaseModel):
    name: str
    checked: int = 0
    failures: int = 0
    counterexample: str | None = None

    @property
    def passed(self) -> bool:
        return self.failures == 0
