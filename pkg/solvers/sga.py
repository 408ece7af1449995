"""
Simple Genetic Algorithm: tournament selection, crossover, bit-flip mutation,
generational replacement with elitism
"""

from __future__ import annotations

from enum import Enum
from typing import Any, Dict, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ea.core import Genome, Population, RandomStream
from ea.engine import RunContext, Solver, elites_of
from ea.errors import ConfigurationError
from ea.selection import tournament_select


class CrossoverType(str, Enum):
    ONE_POINT = "onePoint"
    TWO_POINT = "twoPoint"
    UNIFORM = "uniform"


class SgaParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    tournament_size: int = Field(2, ge=1)
    crossover_type: CrossoverType = CrossoverType.UNIFORM
    crossover_probability: float = Field(0.9, ge=0, le=1)
    mutation_probability: Optional[float] = Field(None, ge=0, le=1)  # None -> 1/n
    elitism: int = Field(1, ge=0)


def default_mutation_probability(params: SgaParams, n: int) -> float:
    if params.mutation_probability is not None:
        return params.mutation_probability
    return 1.0 / n


def _check_lengths(a: Genome, b: Genome) -> None:
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} vs {len(b)}")


def _swap(a: Genome, b: Genome, mask: np.ndarray) -> Tuple[Genome, Genome]:
    x, y = a.alleles, b.alleles
    return Genome(np.where(mask, y, x)), Genome(np.where(mask, x, y))


def one_point_crossover(a: Genome, b: Genome, cut: int) -> Tuple[Genome, Genome]:
    """Swap suffixes starting at position `cut`"""
    _check_lengths(a, b)
    return _swap(a, b, np.arange(len(a)) >= cut)


def two_point_crossover(a: Genome, b: Genome, first: int, second: int) -> Tuple[Genome, Genome]:
    """Swap the segment [first, second)"""
    _check_lengths(a, b)
    lo, hi = sorted((first, second))
    idx = np.arange(len(a))
    return _swap(a, b, (idx >= lo) & (idx < hi))


def uniform_crossover(a: Genome, b: Genome, mask: np.ndarray) -> Tuple[Genome, Genome]:
    _check_lengths(a, b)
    return _swap(a, b, np.asarray(mask, dtype=bool))


def crossover(
    a: Genome, b: Genome, kind: CrossoverType | str, pc: float, rng: RandomStream
) -> Tuple[Genome, Genome]:
    _check_lengths(a, b)
    kind = CrossoverType(kind)
    n = len(a)
    if rng.random() >= pc:
        return Genome(a.alleles), Genome(b.alleles)
    if n < 2 and kind != CrossoverType.UNIFORM:
        # no cut point exists in a single-bit string
        return Genome(a.alleles), Genome(b.alleles)
    if kind == CrossoverType.ONE_POINT:
        return one_point_crossover(a, b, int(rng.integers(1, n)))
    if kind == CrossoverType.TWO_POINT:
        if n < 3:
            return one_point_crossover(a, b, int(rng.integers(1, n)))
        first, second = rng.choice(n - 1, 2, replace=False) + 1
        return two_point_crossover(a, b, int(first), int(second))
    return uniform_crossover(a, b, rng.random(n) < 0.5)


def mutate(g: Genome, pm: float, rng: RandomStream) -> Genome:
    """Flip each allele independently with probability pm"""
    flips = rng.random(len(g)) < pm
    return Genome(np.where(flips, 1 - g.alleles, g.alleles))


class SGA(Solver):
    name = "SGA"

    def __init__(self, params: Optional[SgaParams] = None):
        self.params = params or SgaParams()
        self.pm = self.params.mutation_probability

    def setup(self, ctx: RunContext) -> None:
        if self.params.elitism > ctx.population_size:
            raise ConfigurationError(
                f"sgaElitism ({self.params.elitism}) exceeds populationSize ({ctx.population_size})"
            )
        self.pm = default_mutation_probability(self.params, ctx.string_size)

    def next_generation(self, population: Population, ctx: RunContext) -> Population:
        return sga_generation(population, self.params, ctx, pm=self.pm)

    def parameter_echo(self) -> Dict[str, Any]:
        return {
            "sgaTournamentSize": self.params.tournament_size,
            "sgaCrossoverType": self.params.crossover_type.value,
            "sgaPc": self.params.crossover_probability,
            "sgaPm": self.pm,
            "sgaElitism": self.params.elitism,
        }


def sga_generation(
    p: Population, params: SgaParams, ctx: RunContext, pm: Optional[float] = None
) -> Population:
    """Elites copied unchanged; remaining slots filled pairwise in slot order"""
    rng = ctx.rng
    N = len(p)
    if pm is None:
        pm = default_mutation_probability(params, p.string_size)
    nxt = elites_of(p, min(params.elitism, N))
    offspring = []
    while len(nxt) + len(offspring) < N:
        pa = tournament_select(p, params.tournament_size, 1, True, rng)[0]
        pb = tournament_select(p, params.tournament_size, 1, True, rng)[0]
        ca, cb = crossover(pa, pb, params.crossover_type, params.crossover_probability, rng)
        ca, cb = mutate(ca, pm, rng), mutate(cb, pm, rng)
        offspring.append(ca)
        if len(nxt) + len(offspring) < N:
            offspring.append(cb)
    ctx.fitness.evaluate_many(offspring, rng)
    return Population(nxt + offspring, counter=p.counter)
