"""
Binary genomes, populations and the seeded random stream shared by all algorithms
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence

import numpy as np

from ea.errors import ConfigurationError, EvaluationStateError

RNG_ALGORITHM = "numpy.PCG64"


class RandomStream:
    """Seeded PCG64 stream; substreams are a pure function of (seed, run index)"""

    def __init__(self, seed: int, run_index: Optional[int] = None):
        if seed < 0 or seed >= 2**64:
            raise ConfigurationError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = int(seed)
        self.run_index = run_index
        spawn_key = () if run_index is None else (int(run_index),)
        self._seq = np.random.SeedSequence(entropy=self.seed, spawn_key=spawn_key)
        self.generator = np.random.Generator(np.random.PCG64(self._seq))

    @property
    def algorithm(self) -> str:
        return RNG_ALGORITHM

    def substream(self, run_index: int) -> "RandomStream":
        return RandomStream(self.seed, run_index)

    # Thin delegates so callers never reach into numpy directly
    def random(self, size=None):
        return self.generator.random(size)

    def integers(self, low, high=None, size=None):
        return self.generator.integers(low, high, size=size)

    def normal(self, loc: float = 0.0, scale: float = 1.0, size=None):
        return self.generator.normal(loc, scale, size)

    def permutation(self, n: int) -> np.ndarray:
        return self.generator.permutation(n)

    def choice(self, n: int, size: int, replace: bool = True) -> np.ndarray:
        return self.generator.choice(n, size=size, replace=replace)


class Genome:
    """Fixed-length binary string with a cached fitness value"""

    __slots__ = ("_alleles", "_fitness", "_evaluated")

    def __init__(self, alleles: Iterable[int] | np.ndarray):
        arr = np.array(alleles, dtype=np.uint8).ravel()
        if arr.size == 0:
            raise ValueError("genome length must be at least 1")
        if arr.max() > 1:
            raise ValueError("alleles must be 0 or 1")
        arr.flags.writeable = False
        self._alleles = arr
        self._fitness = 0.0
        self._evaluated = False

    @classmethod
    def from_string(cls, bits: str) -> "Genome":
        if not bits or any(c not in "01" for c in bits):
            raise ValueError(f"not a binary string: {bits!r}")
        return cls(np.frombuffer(bits.encode("ascii"), dtype=np.uint8) - ord("0"))

    @property
    def alleles(self) -> np.ndarray:
        """Read-only allele vector"""
        return self._alleles

    @property
    def fitness(self) -> float:
        return self._fitness

    @property
    def evaluated(self) -> bool:
        return self._evaluated

    def __len__(self) -> int:
        return int(self._alleles.size)

    def get_allele(self, i: int) -> int:
        if not 0 <= i < self._alleles.size:
            raise IndexError(f"allele index {i} out of range for length {self._alleles.size}")
        return int(self._alleles[i])

    def set_allele(self, i: int, value: int) -> None:
        if not 0 <= i < self._alleles.size:
            raise IndexError(f"allele index {i} out of range for length {self._alleles.size}")
        if value not in (0, 1):
            raise ValueError("alleles must be 0 or 1")
        arr = self._alleles.copy()
        arr[i] = value
        arr.flags.writeable = False
        self._alleles = arr
        self.invalidate()

    def set_fitness(self, value: float) -> None:
        self._fitness = float(value)
        self._evaluated = True

    def invalidate(self) -> None:
        self._fitness = 0.0
        self._evaluated = False

    def copy(self) -> "Genome":
        clone = Genome.__new__(Genome)
        clone._alleles = self._alleles
        clone._fitness = self._fitness
        clone._evaluated = self._evaluated
        return clone

    def complement(self) -> "Genome":
        return Genome(1 - self._alleles)

    def to_string(self) -> str:
        return (self._alleles + ord("0")).tobytes().decode("ascii")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Genome):
            return NotImplemented
        return np.array_equal(self._alleles, other._alleles)

    def __hash__(self) -> int:
        return hash(self._alleles.tobytes())

    def __repr__(self) -> str:
        fit = f"{self._fitness:g}" if self._evaluated else "?"
        return f"Genome({self.to_string()}, fitness={fit})"


def get_allele(g: Genome, i: int) -> int:
    return g.get_allele(i)


def hamming_distance(a: Genome, b: Genome) -> int:
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} vs {len(b)}")
    return int(np.count_nonzero(a.alleles != b.alleles))


class FitnessCounter:
    """Run-level count of problem evaluations; only ever increases"""

    __slots__ = ("count",)

    def __init__(self) -> None:
        self.count = 0

    def increment(self, by: int = 1) -> None:
        if by < 0:
            raise ValueError("fitness-call counter never decreases")
        self.count += by


@dataclass(frozen=True)
class PopulationStats:
    average_fitness: float
    best_fitness: float
    best_index: int


class Population:
    """Constant-size collection of equal-length genomes"""

    def __init__(self, members: Sequence[Genome], counter: Optional[FitnessCounter] = None):
        members = list(members)
        if not members:
            raise ValueError("population must contain at least one genome")
        length = len(members[0])
        if any(len(g) != length for g in members):
            raise ValueError("all members must share the same genome length")
        self.members: List[Genome] = members
        self.counter = counter if counter is not None else FitnessCounter()

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def string_size(self) -> int:
        return len(self.members[0])

    @property
    def fitness_calls_so_far(self) -> int:
        return self.counter.count

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __getitem__(self, i: int) -> Genome:
        return self.members[i]

    def replace(self, i: int, genome: Genome) -> None:
        if len(genome) != self.string_size:
            raise ValueError("replacement genome has the wrong length")
        self.members[i] = genome

    def is_evaluated(self) -> bool:
        return all(g.evaluated for g in self.members)

    def fitnesses(self) -> np.ndarray:
        if not self.is_evaluated():
            raise EvaluationStateError("population contains unevaluated members")
        return np.fromiter((g.fitness for g in self.members), dtype=float, count=len(self.members))

    def matrix(self) -> np.ndarray:
        """S x n uint8 matrix of alleles, one row per member"""
        return np.stack([g.alleles for g in self.members])

    def allele_frequencies(self) -> np.ndarray:
        """Frequency of allele 1 at each position"""
        return self.matrix().mean(axis=0)

    def ranked_indices(self) -> np.ndarray:
        """Indices by decreasing fitness, lowest index first among ties"""
        fit = self.fitnesses()
        return np.lexsort((np.arange(len(fit)), -fit))

    def stats(self) -> PopulationStats:
        return population_stats(self)


def population_stats(p: Population) -> PopulationStats:
    fit = p.fitnesses()
    best_index = int(np.argmax(fit))  # argmax returns the first maximum
    return PopulationStats(
        average_fitness=float(fit.mean()),
        best_fitness=float(fit[best_index]),
        best_index=best_index,
    )


def random_population(
    N: int, n: int, rng: RandomStream, counter: Optional[FitnessCounter] = None
) -> Population:
    if N < 1 or n < 1:
        raise ConfigurationError(
            f"population size and string size must be positive (got N={N}, n={n})"
        )
    bits = rng.integers(0, 2, size=(N, n)).astype(np.uint8)
    return Population([Genome(row) for row in bits], counter=counter)
