"""
Selection operators producing the selected set, and restricted tournament
replacement
"""

from __future__ import annotations

import math
from typing import List

import numpy as np

from ea.core import Genome, Population, RandomStream
from ea.errors import ConfigurationError, EvaluationStateError

# Guards ceil() against representation error (0.1 * 30 == 3.0000000000000004)
_CEIL_SLACK = 1e-9


class SelectedSet(Population):
    """Selection output; its size may differ from the population size"""


def _require_evaluated(p: Population) -> np.ndarray:
    if not p.is_evaluated():
        raise EvaluationStateError("selection needs a fully evaluated population")
    return p.fitnesses()


def _winner(contestants: np.ndarray, fitness: np.ndarray) -> int:
    # max fitness, lowest population index among equals
    order = np.lexsort((contestants, -fitness[contestants]))
    return int(contestants[order[0]])


def tournament_select(
    p: Population,
    s: int,
    S: int,
    with_replacement: bool,
    rng: RandomStream,
) -> SelectedSet:
    """
    Tournament selection.

    With replacement every tournament draws s distinct contestants afresh
    (contestants repeat only when s > N). Without replacement contestants come
    from consecutive slices of shuffled passes over the population, so each
    member competes once per pass. Members left over at the end of a pass
    open the next one, and that pass's own copies of them go to its end.
    """
    fitness = _require_evaluated(p)
    N = len(p)
    if s < 1:
        raise ConfigurationError(f"tournament size must be at least 1, got {s}")
    if S < 1:
        raise ConfigurationError(f"selected set size must be at least 1, got {S}")
    if not with_replacement and s > N:
        raise ConfigurationError(
            f"tournament size {s} exceeds population size {N} without replacement"
        )

    winners: List[int] = []
    if with_replacement:
        repeat = s > N
        for _ in range(S):
            winners.append(_winner(rng.choice(N, s, replace=repeat), fitness))
    else:
        queue = rng.permutation(N)
        pos = 0
        while len(winners) < S:
            if pos + s > len(queue):
                carried = queue[pos:]
                fresh = rng.permutation(N)
                repeat = np.isin(fresh, carried)
                queue = np.concatenate([carried, fresh[~repeat], fresh[repeat]])
                pos = 0
            winners.append(_winner(queue[pos:pos + s], fitness))
            pos += s
    return SelectedSet([p[i] for i in winners], counter=p.counter)


def truncation_count(tau: float, N: int) -> int:
    return max(1, min(N, math.ceil(tau * N - _CEIL_SLACK)))


def truncation_select(p: Population, tau: float, rng: RandomStream | None = None) -> SelectedSet:
    """The ceil(tau * N) best members, lowest index first among ties"""
    if not 0 < tau <= 1:
        raise ConfigurationError(f"truncation fraction must lie in (0, 1], got {tau}")
    _require_evaluated(p)
    keep = p.ranked_indices()[: truncation_count(tau, len(p))]
    return SelectedSet([p[int(i)] for i in keep], counter=p.counter)


def rtr_replace(p: Population, offspring: Genome, w: int, rng: RandomStream) -> Population:
    """Offspring replaces the closest member of a random window iff strictly fitter"""
    N = len(p)
    if not 1 <= w <= N:
        raise ConfigurationError(f"RTR window must lie in [1, {N}], got {w}")
    window = np.sort(rng.choice(N, w, replace=False))
    members = np.stack([p[int(k)].alleles for k in window])
    distances = np.count_nonzero(members != offspring.alleles, axis=1)
    closest = int(window[int(np.argmin(distances))])  # window sorted, so lowest index wins ties
    if offspring.fitness > p[closest].fitness:
        p.replace(closest, offspring)
    return p
