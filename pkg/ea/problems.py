"""
Benchmark problem suite, Gaussian noise wrapper and the problem plug-in registry

Every built-in problem is defined for its "One" form (optimum at the all-ones
string); the "Zero" twins evaluate the complement of the allele view.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Protocol, Sequence, Tuple, runtime_checkable

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ea.core import FitnessCounter, Genome, RandomStream
from ea.errors import ConfigurationError, OracleRefusedError

logger = logging.getLogger(__name__)

BRUTE_FORCE_MAX_BITS = 24
_ENUMERATION_CHUNK = 1 << 16
_TIE_TOLERANCE = 1e-9


class HierParams(BaseModel):
    """Overrides for the hierarchical trap constants; None keeps the problem default"""
    model_config = ConfigDict(frozen=True)

    f_high_low: Optional[float] = None
    f_low_low: Optional[float] = None
    f_high_top: Optional[float] = None
    f_low_top: Optional[float] = None


class ProblemSpec(BaseModel):
    """Problem selection: menu code, string size, noise level and problem parameters"""
    model_config = ConfigDict(frozen=True)

    problem_id: int
    string_size: int = Field(..., ge=1)
    sigma_k: float = Field(0.0, ge=0)
    trap_k: int = Field(5, ge=1)
    hier: HierParams = Field(default_factory=HierParams)


@runtime_checkable
class ProblemEvaluator(Protocol):
    """Strategy interface for problems: a pure function of the allele vector"""

    def compute_fitness(self, alleles: np.ndarray) -> float:
        ...


def _batch(evaluator: ProblemEvaluator, rows: np.ndarray) -> np.ndarray:
    batch = getattr(evaluator, "compute_batch", None)
    if batch is not None:
        return np.asarray(batch(rows), dtype=float)
    return np.fromiter((evaluator.compute_fitness(r) for r in rows), dtype=float, count=len(rows))


class OneMax:
    def compute_batch(self, rows: np.ndarray) -> np.ndarray:
        return rows.sum(axis=1, dtype=np.int64).astype(float)

    def compute_fitness(self, alleles: np.ndarray) -> float:
        return float(np.count_nonzero(alleles))


class UnitationBlocks:
    """Concatenated blocks scored by a table indexed by block unitation"""

    def __init__(self, block_size: int, table: Sequence[float]):
        if len(table) != block_size + 1:
            raise ValueError("unitation table needs block_size + 1 entries")
        self.block_size = block_size
        self.table = np.asarray(table, dtype=float)

    def compute_batch(self, rows: np.ndarray) -> np.ndarray:
        u = rows.reshape(rows.shape[0], -1, self.block_size).sum(axis=2)
        return self.table[u].sum(axis=1)

    def compute_fitness(self, alleles: np.ndarray) -> float:
        return float(self.compute_batch(alleles[None, :])[0])


class OverlappingBlocks:
    """3-bit windows at stride 2; adjacent windows share one bit"""

    def __init__(self, table: Sequence[float]):
        self.table = np.asarray(table, dtype=float)

    def compute_batch(self, rows: np.ndarray) -> np.ndarray:
        starts = np.arange(0, rows.shape[1] - 2, 2)
        u = rows[:, starts] + rows[:, starts + 1] + rows[:, starts + 2]
        return self.table[u].sum(axis=1)

    def compute_fitness(self, alleles: np.ndarray) -> float:
        return float(self.compute_batch(alleles[None, :])[0])


_NULL = 2


class HierarchicalTrap:
    """Three-way hierarchical trap over n = 3**levels bits"""

    def __init__(self, levels: int, low: Tuple[float, float], top: Tuple[float, float]):
        self.levels = levels
        self.low = low
        self.top = top

    @staticmethod
    def general_trap(u: np.ndarray, f_high: float, f_low: float) -> np.ndarray:
        return np.where(u == 3, f_high, f_low * (2 - u) / 2.0)

    def compute_batch(self, rows: np.ndarray) -> np.ndarray:
        symbols = rows.astype(np.int64)
        total = np.zeros(rows.shape[0])
        for level in range(1, self.levels + 1):
            groups = symbols.reshape(rows.shape[0], -1, 3)
            has_null = (groups == _NULL).any(axis=2)
            u = np.where(has_null, 0, groups.sum(axis=2))
            f_high, f_low = self.top if level == self.levels else self.low
            contrib = np.where(has_null, 0.0, self.general_trap(u, f_high, f_low))
            total += (3 ** level) * contrib.sum(axis=1)
            symbols = np.where(has_null | (u == 1) | (u == 2), _NULL, u // 3)
        return total

    def compute_fitness(self, alleles: np.ndarray) -> float:
        return float(self.compute_batch(alleles[None, :])[0])


class Complemented:
    """Evaluates the wrapped problem on the complemented allele view"""

    def __init__(self, inner: ProblemEvaluator):
        self.inner = inner

    def compute_batch(self, rows: np.ndarray) -> np.ndarray:
        return _batch(self.inner, 1 - rows)

    def compute_fitness(self, alleles: np.ndarray) -> float:
        return self.inner.compute_fitness(1 - alleles)


class ConstantProblem:
    """Evaluator returning the same value for every genome"""

    def __init__(self, value: float = 0.0):
        self.value = float(value)

    def compute_batch(self, rows: np.ndarray) -> np.ndarray:
        return np.full(rows.shape[0], self.value)

    def compute_fitness(self, alleles: np.ndarray) -> float:
        return self.value


QUADRATIC_TABLE = (0.9, 0.0, 1.0)
DECEPTIVE3_TABLE = (0.9, 0.8, 0.0, 1.0)
# indexed by unitation 0..6 of g(|3 - u|) with g(3)=1.0, g(0)=0.9, g(1)=0.8, g(2)=0.0
BIPOLAR_TABLE = (1.0, 0.0, 0.8, 0.9, 0.8, 0.0, 1.0)
UNIFORM6_TABLE = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0)


def trap_table(k: int) -> List[float]:
    return [float(k if u == k else k - 1 - u) for u in range(k + 1)]


def hierarchy_levels(n: int) -> Optional[int]:
    """Return l with n == 3**l (l >= 1), else None"""
    levels, m = 0, n
    while m > 1 and m % 3 == 0:
        m //= 3
        levels += 1
    return levels if m == 1 and levels >= 1 else None


def _divisible(d: int, what: str) -> Callable[[ProblemSpec], Optional[str]]:
    def rule(spec: ProblemSpec) -> Optional[str]:
        if spec.string_size % d:
            return f"requires stringSize divisible by {d}{what}"
        return None
    return rule


def _any_length(spec: ProblemSpec) -> Optional[str]:
    return None


def _odd_length(spec: ProblemSpec) -> Optional[str]:
    n = spec.string_size
    if n < 3 or n % 2 == 0:
        return "requires an odd stringSize of at least 3 (3-bit windows at stride 2)"
    return None


def _trap_length(spec: ProblemSpec) -> Optional[str]:
    if spec.string_size % spec.trap_k:
        return f"requires stringSize divisible by trapK = {spec.trap_k}"
    return None


def _power_of_three(spec: ProblemSpec) -> Optional[str]:
    if hierarchy_levels(spec.string_size) is None:
        return "requires stringSize = 3^l for an integer l >= 1"
    return None


def _hier_trap(two: bool) -> Callable[[ProblemSpec], ProblemEvaluator]:
    def build(spec: ProblemSpec) -> ProblemEvaluator:
        levels = hierarchy_levels(spec.string_size) or 1
        h = spec.hier
        default_low = 1.0 + 0.1 / levels if two else 1.0
        low = (
            1.0 if h.f_high_low is None else h.f_high_low,
            default_low if h.f_low_low is None else h.f_low_low,
        )
        top = (
            1.0 if h.f_high_top is None else h.f_high_top,
            0.9 if h.f_low_top is None else h.f_low_top,
        )
        return HierarchicalTrap(levels, low, top)
    return build


@dataclass
class ProblemEntry:
    """Registered problem: how to build it, check its length, and find its optimum"""
    problem_id: int
    name: str
    build: Callable[[ProblemSpec], ProblemEvaluator]
    length_rule: Callable[[ProblemSpec], Optional[str]] = _any_length
    optimum_allele: Optional[int] = None
    optimum_known: Optional[float] = None
    builtin: bool = False


_ONE_PROBLEMS: List[Tuple[str, Callable[[ProblemSpec], ProblemEvaluator], Callable]] = [
    ("Max", lambda s: OneMax(), _any_length),
    ("Quadratic", lambda s: UnitationBlocks(2, QUADRATIC_TABLE), _divisible(2, "")),
    ("3-Deceptive", lambda s: UnitationBlocks(3, DECEPTIVE3_TABLE), _divisible(3, "")),
    ("3-Deceptive Bipolar", lambda s: UnitationBlocks(6, BIPOLAR_TABLE), _divisible(6, "")),
    ("3-Deceptive Overlapping", lambda s: OverlappingBlocks(DECEPTIVE3_TABLE), _odd_length),
    ("Concatenated Trap-k", lambda s: UnitationBlocks(s.trap_k, trap_table(s.trap_k)), _trap_length),
    ("Uniform 6-Blocks", lambda s: UnitationBlocks(6, UNIFORM6_TABLE), _divisible(6, "")),
]


def _zero_twin(build: Callable[[ProblemSpec], ProblemEvaluator]) -> Callable[[ProblemSpec], ProblemEvaluator]:
    return lambda spec: Complemented(build(spec))


def _builtin_registry() -> Dict[int, ProblemEntry]:
    entries: Dict[int, ProblemEntry] = {}
    for offset, (suffix, build, rule) in enumerate(_ONE_PROBLEMS):
        zero_name = "ZeroMax" if suffix == "Max" else f"Zero {suffix}"
        one_name = "OneMax" if suffix == "Max" else suffix
        entries[offset] = ProblemEntry(offset, zero_name, _zero_twin(build), rule, 0, builtin=True)
        entries[offset + 10] = ProblemEntry(offset + 10, one_name, build, rule, 1, builtin=True)
    entries[21] = ProblemEntry(21, "Hierarchical Trap One", _hier_trap(False), _power_of_three, 1, builtin=True)
    entries[22] = ProblemEntry(22, "Hierarchical Trap Two", _hier_trap(True), _power_of_three, 1, builtin=True)
    return entries


PROBLEM_REGISTRY: Dict[int, ProblemEntry] = _builtin_registry()


def problem_menu() -> List[Tuple[int, str]]:
    return [(pid, entry.name) for pid, entry in sorted(PROBLEM_REGISTRY.items())]


def get_entry(problem_id: int) -> ProblemEntry:
    entry = PROBLEM_REGISTRY.get(problem_id)
    if entry is None:
        raise ConfigurationError(f"unknown problem code {problem_id}")
    return entry


def register_problem(
    problem_id: int,
    evaluator: ProblemEvaluator,
    optimum_known: Optional[float] = None,
    name: Optional[str] = None,
) -> None:
    """Make a custom evaluator selectable through the problemType option"""
    if problem_id in PROBLEM_REGISTRY:
        existing = PROBLEM_REGISTRY[problem_id]
        kind = "built-in" if existing.builtin else "registered"
        raise ConfigurationError(f"problem code {problem_id} already {kind} ({existing.name})")
    if not isinstance(evaluator, ProblemEvaluator):
        raise ConfigurationError("evaluator must provide compute_fitness(alleles)")
    PROBLEM_REGISTRY[problem_id] = ProblemEntry(
        problem_id,
        name or f"Custom problem {problem_id}",
        lambda spec: evaluator,
        optimum_known=optimum_known,
    )
    logger.info(f"Registered problem {problem_id}")


def unregister_problem(problem_id: int) -> None:
    entry = PROBLEM_REGISTRY.get(problem_id)
    if entry is None:
        return
    if entry.builtin:
        raise ConfigurationError(f"built-in problem {problem_id} cannot be unregistered")
    del PROBLEM_REGISTRY[problem_id]


def custom_entries() -> List[ProblemEntry]:
    return [entry for entry in PROBLEM_REGISTRY.values() if not entry.builtin]


def install_entries(entries: Sequence[ProblemEntry]) -> None:
    """Copy registered problems into this process's registry (workers start with built-ins only)"""
    for entry in entries:
        if not entry.builtin:
            PROBLEM_REGISTRY[entry.problem_id] = entry


def length_violation(spec: ProblemSpec) -> Optional[str]:
    """Message naming the violated length rule, or None when the length is valid"""
    entry = get_entry(spec.problem_id)
    problem = entry.length_rule(spec)
    return f"{entry.name} {problem}" if problem else None


def validate_length(spec: ProblemSpec) -> None:
    violation = length_violation(spec)
    if violation:
        raise ConfigurationError(violation)


def build_evaluator(spec: ProblemSpec) -> ProblemEvaluator:
    validate_length(spec)
    return get_entry(spec.problem_id).build(spec)


def base_fitness(spec: ProblemSpec, g: Genome) -> float:
    """Noise-free fitness; does not count as a fitness call"""
    _check_length(spec, g)
    return float(build_evaluator(spec).compute_fitness(g.alleles))


def _check_length(spec: ProblemSpec, g: Genome) -> None:
    if len(g) != spec.string_size:
        raise ValueError(f"genome length {len(g)} does not match stringSize {spec.string_size}")


class FitnessFunction:
    """A problem bound to a run: evaluator, noise source and fitness-call counter"""

    def __init__(self, spec: ProblemSpec, counter: Optional[FitnessCounter] = None):
        self.spec = spec
        self.evaluator = build_evaluator(spec)
        self.counter = counter if counter is not None else FitnessCounter()

    @property
    def calls(self) -> int:
        return self.counter.count

    def evaluate(self, g: Genome, rng: RandomStream) -> float:
        _check_length(self.spec, g)
        value = float(self.evaluator.compute_fitness(g.alleles))
        if self.spec.sigma_k > 0:
            value += float(rng.normal(0.0, self.spec.sigma_k))
        self.counter.increment()
        g.set_fitness(value)
        return value

    def evaluate_many(self, genomes: Sequence[Genome], rng: RandomStream) -> np.ndarray:
        """Evaluate in one batch; noise is drawn as one vector in genome order"""
        if not genomes:
            return np.empty(0)
        for g in genomes:
            _check_length(self.spec, g)
        values = _batch(self.evaluator, np.stack([g.alleles for g in genomes]))
        if self.spec.sigma_k > 0:
            values = values + rng.normal(0.0, self.spec.sigma_k, size=len(genomes))
        self.counter.increment(len(genomes))
        for g, v in zip(genomes, values):
            g.set_fitness(float(v))
        return values


def compute_fitness(
    spec: ProblemSpec, g: Genome, rng: RandomStream, counter: Optional[FitnessCounter] = None
) -> float:
    return FitnessFunction(spec, counter).evaluate(g, rng)


def optimum_value(spec: ProblemSpec) -> Optional[float]:
    """Base fitness of the known optimum, or None when the optimum is unknown"""
    entry = get_entry(spec.problem_id)
    validate_length(spec)
    if entry.optimum_allele is None:
        return entry.optimum_known
    best = Genome(np.full(spec.string_size, entry.optimum_allele, dtype=np.uint8))
    return float(entry.build(spec).compute_fitness(best.alleles))


@dataclass(frozen=True)
class OracleResult:
    best_value: float
    best_genome: Genome


def _enumerate_chunk(start: int, stop: int, n: int) -> np.ndarray:
    values = np.arange(start, stop, dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((values[:, None] >> shifts) & 1).astype(np.uint8)


def brute_force_optimum(spec: ProblemSpec) -> OracleResult:
    """Exhaustive search; returns the best base fitness and lexicographically smallest argmax"""
    n = spec.string_size
    if n > BRUTE_FORCE_MAX_BITS:
        raise OracleRefusedError(
            f"brute force enumerates 2^n strings; n = {n} exceeds the limit of {BRUTE_FORCE_MAX_BITS}"
        )
    if spec.sigma_k > 0:
        raise OracleRefusedError("brute force requires a noise-free problem (sigmaK = 0)")
    evaluator = build_evaluator(spec)
    best_value = -math.inf
    best_row: Optional[np.ndarray] = None
    total = 1 << n
    for start in range(0, total, _ENUMERATION_CHUNK):
        rows = _enumerate_chunk(start, min(total, start + _ENUMERATION_CHUNK), n)
        values = _batch(evaluator, rows)
        chunk_max = float(values.max())
        if chunk_max > best_value + _TIE_TOLERANCE:
            first = int(np.flatnonzero(values >= chunk_max - _TIE_TOLERANCE)[0])
            best_value, best_row = float(values[first]), rows[first]
    genome = Genome(best_row)
    genome.set_fitness(best_value)
    return OracleResult(best_value=best_value, best_genome=genome)
