"""
Extended Compact Genetic Algorithm

Model search is greedy over marginal product models, scored by the combined
(model + compressed population) complexity in bits.
"""

from __future__ import annotations

import logging
import math
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ea.core import Genome, Population, RandomStream
from ea.engine import RunContext, Solver, elites_of
from ea.errors import ConfigurationError, EvaluationStateError
from ea.selection import SelectedSet, rtr_replace, tournament_select

logger = logging.getLogger(__name__)

Group = Tuple[int, ...]


class EcgaReplacement(str, Enum):
    RTR = "rtr"
    FULL = "full"


class EcgaParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    tournament_size: int = Field(8, ge=1)
    max_group_size: int = Field(12, ge=1)
    elitism: int = Field(1, ge=0)  # full replacement only
    replacement: EcgaReplacement = EcgaReplacement.RTR
    rtr_window: Optional[int] = Field(None, ge=1)  # None -> N/2


def group_counts(matrix: np.ndarray, group: Group) -> np.ndarray:
    """Cell counts of a group; cell index reads the group's alleles as a binary number"""
    weights = 1 << np.arange(len(group) - 1, -1, -1)
    cells = matrix[:, list(group)].astype(np.int64) @ weights
    return np.bincount(cells, minlength=1 << len(group))


def entropy(counts: np.ndarray) -> float:
    """Base-2 Shannon entropy of an empirical distribution (0 log 0 = 0)"""
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts[counts > 0] / total
    return float(-(p * np.log2(p)).sum())


def group_complexity(counts: np.ndarray, S: int) -> float:
    """Model bits plus compressed population bits contributed by one group"""
    return math.log2(S + 1) * (counts.size - 1) + S * entropy(counts)


class MarginalProductModel:
    """Partition of gene indices with per-group frequency tables"""

    def __init__(self, groups: Sequence[Group], counts: Sequence[np.ndarray], S: int):
        self.groups: List[Group] = [tuple(g) for g in groups]
        self.counts: List[np.ndarray] = list(counts)
        self.S = S

    @classmethod
    def from_selected(cls, matrix: np.ndarray, groups: Sequence[Group]) -> "MarginalProductModel":
        return cls(groups, [group_counts(matrix, g) for g in groups], matrix.shape[0])

    @property
    def string_size(self) -> int:
        return sum(len(g) for g in self.groups)

    def is_partition(self, n: int) -> bool:
        seen = sorted(i for g in self.groups for i in g)
        return all(self.groups) and seen == list(range(n))

    def describe(self) -> str:
        return "".join("[" + ",".join(str(i) for i in g) + "]" for g in self.groups)

    def __repr__(self) -> str:
        return f"MarginalProductModel({self.describe()})"


def combined_complexity(mpm: MarginalProductModel, S: Optional[int] = None) -> float:
    S = mpm.S if S is None else S
    for c in mpm.counts:
        if int(c.sum()) != S:
            raise ValueError("group counts are inconsistent with the selected-set size")
    return sum(group_complexity(c, S) for c in mpm.counts)


def model_complexity(mpm: MarginalProductModel) -> float:
    return math.log2(mpm.S + 1) * sum(c.size - 1 for c in mpm.counts)


def compressed_population_complexity(mpm: MarginalProductModel) -> float:
    return mpm.S * sum(entropy(c) for c in mpm.counts)


def greedy_mpm_search(
    sel: SelectedSet | Population | np.ndarray,
    max_group_size: int = 12,
    on_merge: Optional[Callable[[List[Group], float], None]] = None,
) -> MarginalProductModel:
    """
    Start from singletons and apply the best strictly improving pairwise merge
    until none is left. Ties go to the pair with the smallest (min index of
    first group, min index of second group). Merged-group scores are cached and
    only pairs touching the new group are scored after a merge.
    """
    matrix = sel if isinstance(sel, np.ndarray) else sel.matrix()
    if matrix.shape[0] == 0:
        raise EvaluationStateError("cannot build a model from an empty selected set")
    S, n = matrix.shape
    groups: List[Group] = [(i,) for i in range(n)]
    score: Dict[Group, float] = {g: group_complexity(group_counts(matrix, g), S) for g in groups}
    merged: Dict[Tuple[Group, Group], float] = {}

    def pair_gain(a: Group, b: Group) -> Optional[float]:
        if len(a) + len(b) > max_group_size:
            return None
        key = (a, b)
        if key not in merged:
            union = tuple(sorted(a + b))
            merged[key] = group_complexity(group_counts(matrix, union), S)
        return score[a] + score[b] - merged[key]

    while len(groups) > 1:
        best: Optional[Tuple[float, int, int]] = None
        for x in range(len(groups)):
            for y in range(x + 1, len(groups)):
                gain = pair_gain(groups[x], groups[y])
                if gain is not None and gain > 0 and (best is None or gain > best[0]):
                    best = (gain, x, y)
        if best is None:
            break
        _, x, y = best
        a, b = groups[x], groups[y]
        union = tuple(sorted(a + b))
        score[union] = merged[(a, b)]
        groups = [g for g in groups if g not in (a, b)] + [union]
        # keep groups ordered by their smallest index so ties resolve by min index
        groups.sort(key=lambda g: g[0])
        merged = {k: v for k, v in merged.items() if a not in k and b not in k}
        if on_merge is not None:
            on_merge(list(groups), sum(score[g] for g in groups))

    return MarginalProductModel.from_selected(matrix, groups)


def sample_mpm(
    mpm: MarginalProductModel,
    sel: SelectedSet | Population,
    N: int,
    rng: RandomStream,
    elites: Sequence[Genome] = (),
) -> Population:
    """Each group of each new genome is copied from one uniformly chosen selected member"""
    matrix = sel.matrix()
    elites = list(elites)[:N]
    count = N - len(elites)
    children = np.empty((count, matrix.shape[1]), dtype=np.uint8)
    donors = rng.integers(0, matrix.shape[0], size=(count, len(mpm.groups)))
    for k, group in enumerate(mpm.groups):
        cols = list(group)
        children[:, cols] = matrix[donors[:, k]][:, cols]
    return Population(elites + [Genome(row) for row in children])


def default_window(N: int) -> int:
    return max(1, N // 2)


class ECGA(Solver):
    """
    Offspring are inserted by restricted tournament replacement by default;
    `replacement = full` swaps in a whole new population behind the elites.
    """

    name = "ECGA"

    def __init__(self, params: Optional[EcgaParams] = None):
        self.params = params or EcgaParams()
        self.model: Optional[MarginalProductModel] = None
        self.window = self.params.rtr_window or 1

    def setup(self, ctx: RunContext) -> None:
        N = ctx.population_size
        if self.params.tournament_size > N:
            raise ConfigurationError(
                f"ecgaTournamentSize ({self.params.tournament_size}) exceeds populationSize ({N})"
            )
        if self.params.elitism > N:
            raise ConfigurationError(f"ecgaElitism ({self.params.elitism}) exceeds populationSize ({N})")
        self.window = self.params.rtr_window or default_window(N)
        if self.window > N:
            raise ConfigurationError(f"ecgaRtrWindow ({self.window}) exceeds populationSize ({N})")
        self.model = None

    def next_generation(self, population: Population, ctx: RunContext) -> Population:
        selected = tournament_select(
            population, self.params.tournament_size, len(population), False, ctx.rng
        )
        self.model = greedy_mpm_search(selected, self.params.max_group_size)
        logger.debug(f"ECGA model: {self.model.describe()}")

        if self.params.replacement == EcgaReplacement.FULL:
            elites = elites_of(population, self.params.elitism)
            nxt = sample_mpm(self.model, selected, len(population), ctx.rng, elites)
            nxt.counter = population.counter
            ctx.fitness.evaluate_many(nxt.members[len(elites):], ctx.rng)
            return nxt

        offspring = sample_mpm(self.model, selected, len(population), ctx.rng)
        ctx.fitness.evaluate_many(offspring.members, ctx.rng)
        for child in offspring:
            rtr_replace(population, child, self.window, ctx.rng)
        return population

    def model_summary(self) -> Optional[str]:
        return self.model.describe() if self.model is not None else None

    def parameter_echo(self) -> Dict[str, Any]:
        return {
            "ecgaTournamentSize": self.params.tournament_size,
            "ecgaMaxGroupSize": self.params.max_group_size,
            "ecgaElitism": self.params.elitism,
            "ecgaReplacement": self.params.replacement.value,
            "ecgaRtrWindow": self.window,
        }
