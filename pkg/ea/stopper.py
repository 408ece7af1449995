"""
Stop criteria evaluated after every generation
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ea.core import Population

OPTIMUM_TOLERANCE = 1e-9


class StopReason(str, Enum):
    OPTIMUM_FOUND = "OptimumFound"
    MAX_FITNESS_CALLS = "MaxFitnessCalls"
    MAX_GENERATIONS = "MaxGenerations"
    CONVERGED = "Converged"
    NO_IMPROVEMENT = "NoImprovement"


class StopConfig(BaseModel):
    """Stopper settings; None means unlimited / disabled"""
    model_config = ConfigDict(frozen=True)

    max_generations: Optional[int] = Field(1000, ge=1)
    max_fitness_calls: Optional[int] = Field(10_000_000, ge=1)
    stop_on_optimum: bool = True
    convergence_threshold: Optional[float] = Field(None, ge=0.5, le=1.0)
    no_improvement_window: Optional[int] = Field(None, ge=1)

    @model_validator(mode="after")
    def _needs_bound(self) -> "StopConfig":
        if self.max_generations is None and self.max_fitness_calls is None:
            raise ValueError("at least one of maxGenerations / maxFitnessCalls must be bounded")
        return self


@dataclass(frozen=True)
class StopState:
    """Snapshot the stopper looks at; optimum is None when unknown or the problem is noisy"""
    generation: int
    fitness_calls: int
    population: Population
    best_so_far: float
    optimum: Optional[float]
    last_improvement: int = 0


def is_converged(population: Population, threshold: float) -> bool:
    freq = population.allele_frequencies()
    majority = np.maximum(freq, 1.0 - freq)
    return bool(np.all(majority >= threshold - 1e-12))


def should_stop(state: StopState, cfg: StopConfig) -> Optional[StopReason]:
    """First matching criterion in fixed priority order, or None to continue"""
    if (
        cfg.stop_on_optimum
        and state.optimum is not None
        and state.best_so_far >= state.optimum - OPTIMUM_TOLERANCE
    ):
        return StopReason.OPTIMUM_FOUND
    if cfg.max_fitness_calls is not None and state.fitness_calls >= cfg.max_fitness_calls:
        return StopReason.MAX_FITNESS_CALLS
    if cfg.max_generations is not None and state.generation >= cfg.max_generations:
        return StopReason.MAX_GENERATIONS
    if cfg.convergence_threshold is not None and is_converged(
        state.population, cfg.convergence_threshold
    ):
        return StopReason.CONVERGED
    if (
        cfg.no_improvement_window is not None
        and state.generation - state.last_improvement >= cfg.no_improvement_window
    ):
        return StopReason.NO_IMPROVEMENT
    return None
