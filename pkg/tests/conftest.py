"""
Shared fixtures and helpers
"""

from typing import Sequence

import pytest

from ea.core import FitnessCounter, Genome, Population, RandomStream
from ea.engine import RunContext
from ea.problems import FitnessFunction, ProblemSpec
from ea.settings import reset_settings


def evaluated_population(fitnesses: Sequence[float], n: int = 8) -> Population:
    """Population whose members carry the given fitness values (alleles encode the index)"""
    members = []
    for k, f in enumerate(fitnesses):
        bits = [(k >> b) & 1 for b in range(n)]
        g = Genome(bits)
        g.set_fitness(f)
        members.append(g)
    return Population(members)


def population_of(*bits: str) -> Population:
    return Population([Genome.from_string(b) for b in bits])


def make_context(problem_id: int, n: int, N: int, seed: int = 0, **spec) -> RunContext:
    problem = ProblemSpec(problem_id=problem_id, string_size=n, **spec)
    return RunContext(
        fitness=FitnessFunction(problem, FitnessCounter()),
        rng=RandomStream(seed),
        population_size=N,
        string_size=n,
    )


@pytest.fixture
def rng() -> RandomStream:
    return RandomStream(12345)


@pytest.fixture(autouse=True)
def _fresh_settings(monkeypatch):
    for name in ("EA_OUT_DIR", "EA_LOG_LEVEL", "EA_LOG_JSON", "EA_N_JOBS", "EA_PROMETHEUS_PORT"):
        monkeypatch.delenv(name, raising=False)
    reset_settings()
    yield
    reset_settings()
