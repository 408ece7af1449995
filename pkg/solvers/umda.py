"""
Univariate Marginal Distribution Algorithm
"""

from __future__ import annotations

from enum import Enum
from typing import Any, Dict, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ea.core import Genome, Population, RandomStream
from ea.engine import RunContext, Solver, elites_of
from ea.errors import ConfigurationError, EvaluationStateError
from ea.selection import SelectedSet, tournament_select, truncation_select


class SelectionKind(str, Enum):
    TRUNCATION = "truncation"
    TOURNAMENT = "tournament"


class UmdaParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    tau: float = Field(0.5, gt=0, le=1)
    selection: SelectionKind = SelectionKind.TRUNCATION
    tournament_size: int = Field(2, ge=1)
    clamp_margins: bool = False
    elitism: int = Field(1, ge=0)


class MarginalVector:
    """Per-position probability of allele 1"""

    def __init__(self, p: np.ndarray):
        p = np.asarray(p, dtype=float)
        if np.any((p < 0) | (p > 1)):
            raise ValueError("marginal probabilities must lie in [0, 1]")
        self.p = p

    def __len__(self) -> int:
        return int(self.p.size)

    def clamped(self) -> "MarginalVector":
        """Bounded to [1/n, 1 - 1/n] so no allele is lost for good"""
        n = len(self)
        lo = 1.0 / n if n > 1 else 0.0
        return MarginalVector(np.clip(self.p, lo, 1.0 - lo))


def build_marginals(sel: SelectedSet | Population, clamp: bool = False) -> MarginalVector:
    if len(sel) == 0:
        raise EvaluationStateError("cannot build marginals from an empty selected set")
    m = MarginalVector(sel.matrix().mean(axis=0))
    return m.clamped() if clamp else m


def sample_population(
    m: MarginalVector,
    N: int,
    rng: RandomStream,
    elites: Sequence[Genome] = (),
) -> Population:
    """N genomes sampled position-wise; elites (already evaluated) fill the leading slots"""
    if N < 1:
        raise ConfigurationError("population size must be at least 1")
    elites = list(elites)[:N]
    bits = (rng.random((N - len(elites), len(m))) < m.p).astype(np.uint8)
    return Population(elites + [Genome(row) for row in bits])


class UMDA(Solver):
    name = "UMDA"

    def __init__(self, params: Optional[UmdaParams] = None):
        self.params = params or UmdaParams()

    def setup(self, ctx: RunContext) -> None:
        if self.params.elitism > ctx.population_size:
            raise ConfigurationError(
                f"umdaElitism ({self.params.elitism}) exceeds populationSize ({ctx.population_size})"
            )

    def select(self, p: Population, rng: RandomStream) -> SelectedSet:
        if self.params.selection == SelectionKind.TOURNAMENT:
            return tournament_select(p, self.params.tournament_size, len(p), True, rng)
        return truncation_select(p, self.params.tau, rng)

    def next_generation(self, population: Population, ctx: RunContext) -> Population:
        selected = self.select(population, ctx.rng)
        model = build_marginals(selected, clamp=self.params.clamp_margins)
        elites = elites_of(population, self.params.elitism)
        nxt = sample_population(model, len(population), ctx.rng, elites)
        nxt.counter = population.counter
        ctx.fitness.evaluate_many(nxt.members[len(elites):], ctx.rng)
        return nxt

    def parameter_echo(self) -> Dict[str, Any]:
        return {
            "umdaTau": self.params.tau,
            "umdaSelection": self.params.selection.value,
            "umdaTournamentSize": self.params.tournament_size,
            "umdaClampMargins": self.params.clamp_margins,
            "umdaElitism": self.params.elitism,
        }
