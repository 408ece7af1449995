"""
Run and statistics records produced by the engine and consumed by the writers
"""

from __future__ import annotations

from datetime import datetime, timezone
from typing import Any, Dict, List, Optional

import pandas as pd
from pydantic import BaseModel, Field

from ea.stopper import StopReason


class RunHeader(BaseModel):
    """Identifies a run and echoes the parameters it used"""
    algorithm: str
    problem_id: int
    problem_name: str
    string_size: int
    population_size: int
    seed: int
    run_index: int = 0
    rng_algorithm: str
    sigma_k: float = 0.0
    parameters: Dict[str, Any] = Field(default_factory=dict)
    timestamp: datetime = Field(default_factory=lambda: datetime.now(timezone.utc))


class GenerationRow(BaseModel):
    generation: int
    fitness_calls: int
    best_fitness: float
    average_fitness: float
    best_so_far: float


class RunFooter(BaseModel):
    stop_reason: StopReason
    total_fitness_calls: int
    best_genome: str
    best_fitness: float
    wall_time_seconds: float = Field(..., ge=0)
    model_summary: Optional[str] = None


class RunRecord(BaseModel):
    """Full trace of one run"""
    header: RunHeader
    rows: List[GenerationRow]
    footer: RunFooter

    @property
    def successful(self) -> bool:
        return self.footer.stop_reason == StopReason.OPTIMUM_FOUND

    @property
    def final_generation(self) -> int:
        return self.rows[-1].generation if self.rows else 0

    @property
    def final_best_so_far(self) -> float:
        return self.rows[-1].best_so_far if self.rows else self.footer.best_fitness


class RunSummary(BaseModel):
    run_index: int
    stop_reason: StopReason
    generations: int
    total_fitness_calls: int
    final_best_so_far: float
    successful: bool


class StatsRecord(BaseModel):
    """Per-run summaries plus aggregates; None marks an undefined aggregate"""
    algorithm: str
    problem_id: int
    runs: List[RunSummary]
    n_runs: int
    success_count: int
    success_rate: float
    calls_mean: Optional[float] = None
    calls_std: Optional[float] = None
    calls_min: Optional[int] = None
    calls_max: Optional[int] = None
    best_mean: Optional[float] = None
    best_std: Optional[float] = None


def _defined(value: float) -> Optional[float]:
    return None if pd.isna(value) else float(value)


def summarize_runs(records: List[RunRecord]) -> StatsRecord:
    """Aggregate run records; std is the sample std (undefined for fewer than two values)"""
    if not records:
        raise ValueError("statistics need at least one run")
    runs = [
        RunSummary(
            run_index=r.header.run_index,
            stop_reason=r.footer.stop_reason,
            generations=r.final_generation,
            total_fitness_calls=r.footer.total_fitness_calls,
            final_best_so_far=r.final_best_so_far,
            successful=r.successful,
        )
        for r in records
    ]
    df = pd.DataFrame([s.model_dump() for s in runs])
    calls = df.loc[df["successful"], "total_fitness_calls"].astype(float)
    best = df["final_best_so_far"].astype(float)
    success_count = int(df["successful"].sum())
    first = records[0].header
    return StatsRecord(
        algorithm=first.algorithm,
        problem_id=first.problem_id,
        runs=runs,
        n_runs=len(runs),
        success_count=success_count,
        success_rate=success_count / len(runs),
        calls_mean=_defined(calls.mean()) if len(calls) else None,
        calls_std=_defined(calls.std(ddof=1)) if len(calls) else None,
        calls_min=int(calls.min()) if len(calls) else None,
        calls_max=int(calls.max()) if len(calls) else None,
        best_mean=_defined(best.mean()),
        best_std=_defined(best.std(ddof=1)),
    )
