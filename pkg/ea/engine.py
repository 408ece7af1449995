"""
Generation loop shared by all algorithms
"""

from __future__ import annotations

import logging
import math
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Any, Dict, Optional

from ea.core import FitnessCounter, Genome, Population, RandomStream, random_population
from ea.problems import FitnessFunction, ProblemSpec, get_entry, optimum_value, validate_length
from ea.stopper import StopConfig, StopState, should_stop
from ea.telemetry import MetricsCollector, structured_logger
from reporting.records import GenerationRow, RunFooter, RunHeader, RunRecord

logger = logging.getLogger(__name__)


@dataclass
class RunContext:
    """Per-run resources handed to a solver"""
    fitness: FitnessFunction
    rng: RandomStream
    population_size: int
    string_size: int


class Solver(ABC):
    """One evolutionary algorithm; next_generation must keep the population size constant"""

    name: str = "EA"

    def setup(self, ctx: RunContext) -> None:
        """Resolve size-dependent defaults and check parameters against N and n"""

    @abstractmethod
    def next_generation(self, population: Population, ctx: RunContext) -> Population:
        ...

    def model_summary(self) -> Optional[str]:
        return None

    def parameter_echo(self) -> Dict[str, Any]:
        return {}


def elites_of(population: Population, count: int) -> list[Genome]:
    """Copies of the `count` best members, lowest index first among ties"""
    if count <= 0:
        return []
    return [population[int(i)].copy() for i in population.ranked_indices()[:count]]


def run(
    solver: Solver,
    problem: ProblemSpec,
    population_size: int,
    stop: StopConfig,
    rng: RandomStream,
    run_index: int = 0,
    parameters: Optional[Dict[str, Any]] = None,
    metrics: Optional[MetricsCollector] = None,
) -> RunRecord:
    """Execute one run and return its per-generation trace"""
    validate_length(problem)
    N, n = population_size, problem.string_size
    counter = FitnessCounter()
    fitness = FitnessFunction(problem, counter)
    ctx = RunContext(fitness=fitness, rng=rng, population_size=N, string_size=n)
    solver.setup(ctx)
    optimum = optimum_value(problem) if problem.sigma_k == 0 else None
    metrics = metrics or MetricsCollector()

    started_at = datetime.now(timezone.utc)
    started = time.perf_counter()
    structured_logger.info(
        "Run started", algorithm=solver.name, problem_id=problem.problem_id, run_index=run_index
    )

    population = random_population(N, n, rng, counter)
    fitness.evaluate_many(population.members, rng)
    metrics.record_generation(solver.name, time.perf_counter() - started, counter.count)

    generation = 0
    best_so_far = -math.inf
    best_genome: Optional[Genome] = None
    last_improvement = 0
    rows = []

    while True:
        stats = population.stats()
        if stats.best_fitness > best_so_far:
            best_so_far = stats.best_fitness
            best_genome = population[stats.best_index].copy()
            last_improvement = generation
        rows.append(
            GenerationRow(
                generation=generation,
                fitness_calls=counter.count,
                best_fitness=stats.best_fitness,
                average_fitness=stats.average_fitness,
                best_so_far=best_so_far,
            )
        )
        reason = should_stop(
            StopState(
                generation=generation,
                fitness_calls=counter.count,
                population=population,
                best_so_far=best_so_far,
                optimum=optimum,
                last_improvement=last_improvement,
            ),
            stop,
        )
        if reason is not None:
            break

        tick, calls_before = time.perf_counter(), counter.count
        population = solver.next_generation(population, ctx)
        if len(population) != N:
            raise RuntimeError(
                f"{solver.name} changed the population size from {N} to {len(population)}"
            )
        generation += 1
        metrics.record_generation(
            solver.name, time.perf_counter() - tick, counter.count - calls_before
        )

    wall = time.perf_counter() - started
    metrics.record_run(solver.name, reason.value)
    summary = solver.model_summary()
    if summary:
        logger.debug(f"{solver.name} final model: {summary}")
    structured_logger.info(
        "Run finished",
        algorithm=solver.name,
        problem_id=problem.problem_id,
        run_index=run_index,
        stop_reason=reason.value,
        generations=generation,
        fitness_calls=counter.count,
        wall_time_seconds=wall,
    )

    assert best_genome is not None
    return RunRecord(
        header=RunHeader(
            algorithm=solver.name,
            problem_id=problem.problem_id,
            problem_name=get_entry(problem.problem_id).name,
            string_size=n,
            population_size=N,
            seed=rng.seed,
            run_index=run_index,
            rng_algorithm=rng.algorithm,
            sigma_k=problem.sigma_k,
            parameters=parameters if parameters is not None else solver.parameter_echo(),
            timestamp=started_at,
        ),
        rows=rows,
        footer=RunFooter(
            stop_reason=reason,
            total_fitness_calls=counter.count,
            best_genome=best_genome.to_string(),
            best_fitness=best_so_far,
            wall_time_seconds=wall,
            model_summary=summary,
        ),
    )
