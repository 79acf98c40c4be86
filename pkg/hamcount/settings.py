from __future__ import annotations

import os
from functools import lru_cache
from pathlib import Path

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
        populate_by_name=True,
    )

    cache_path: Path = Field(default=Path("hamcount_cache.jsonl"), alias="HAMCOUNT_CACHE")
    results_path: Path = Field(default=Path("hamcount_results.jsonl"), alias="HAMCOUNT_RESULTS")
    time_budget: float = Field(default=300.0, gt=0, alias="HAMCOUNT_TIME_BUDGET")
    workers: int = Field(default=0, ge=0, alias="HAMCOUNT_WORKERS")
    word_oracle_bound: int = Field(default=12, ge=1, alias="HAMCOUNT_WORD_ORACLE_BOUND")
    graph_oracle_bound: int = Field(default=10, ge=1, alias="HAMCOUNT_GRAPH_ORACLE_BOUND")
    closed_formula_max_summands: int = Field(
        default=10**7, ge=1, alias="HAMCOUNT_CLOSED_MAX_SUMMANDS"
    )
    log_level: str = Field(default="WARNING", alias="HAMCOUNT_LOG_LEVEL")

    @field_validator("log_level")
    @classmethod
    def _check_log_level(cls, value: str) -> str:
        level = value.upper()
        if level not in LOG_LEVELS:
            raise ValueError(f"unknown log level {value!r}, expected one of {', '.join(LOG_LEVELS)}")
        return level

    def worker_count(self) -> int:
        return self.workers or os.cpu_count() or 1


@lru_cache
def get_settings() -> Settings:
    return Settings()
