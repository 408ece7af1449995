import itertools

import numpy as np
import pytest

from ea.core import FitnessCounter, Genome, RandomStream
from ea.errors import ConfigurationError, OracleRefusedError
from ea.problems import (
    ConstantProblem,
    FitnessFunction,
    HierParams,
    ProblemSpec,
    base_fitness,
    brute_force_optimum,
    compute_fitness,
    hierarchy_levels,
    optimum_value,
    problem_menu,
    register_problem,
    trap_table,
    unregister_problem,
    validate_length,
)

# smallest valid string size per One code
SMALLEST = {10: 1, 11: 2, 12: 3, 13: 6, 14: 3, 15: 5, 16: 6}


def spec(problem_id: int, n: int, **kwargs) -> ProblemSpec:
    return ProblemSpec(problem_id=problem_id, string_size=n, **kwargs)


def fitness_of(problem_id: int, bits: str, **kwargs) -> float:
    return compute_fitness(spec(problem_id, len(bits), **kwargs), Genome.from_string(bits), RandomStream(0))


@pytest.fixture
def custom_problem():
    yield 99
    unregister_problem(99)


class TestMenu:
    def test_codes(self):
        codes = [code for code, _ in problem_menu()]
        assert codes == [0, 1, 2, 3, 4, 5, 6, 10, 11, 12, 13, 14, 15, 16, 21, 22]

    def test_names(self):
        names = dict(problem_menu())
        assert names[0] == "ZeroMax"
        assert names[10] == "OneMax"
        assert names[2] == "Zero 3-Deceptive"
        assert names[12] == "3-Deceptive"
        assert names[21] == "Hierarchical Trap One"


class TestValidateLength:
    @pytest.mark.parametrize("problem_id,n", [(12, 30), (21, 27), (10, 7), (14, 9), (13, 12), (15, 10)])
    def test_valid(self, problem_id, n):
        validate_length(spec(problem_id, n))

    def test_trap_needs_divisible_length(self):
        with pytest.raises(ConfigurationError, match="trapK"):
            validate_length(spec(15, 12, trap_k=5))

    def test_error_names_the_rule(self):
        with pytest.raises(ConfigurationError) as exc:
            validate_length(spec(12, 10))
        assert "3-Deceptive requires stringSize divisible by 3" in str(exc.value)

    @pytest.mark.parametrize("n", [1, 4, 10])
    def test_overlapping_needs_odd_length(self, n):
        with pytest.raises(ConfigurationError):
            validate_length(spec(14, n))

    @pytest.mark.parametrize("n", [1, 6, 18, 28])
    def test_hierarchical_needs_power_of_three(self, n):
        with pytest.raises(ConfigurationError):
            validate_length(spec(21, n))

    def test_unknown_code(self):
        with pytest.raises(ConfigurationError, match="unknown problem code 7"):
            validate_length(spec(7, 10))


class TestFitness:
    def test_onemax(self):
        assert fitness_of(10, "10110") == 3.0

    def test_zeromax(self):
        assert fitness_of(0, "0000") == 4.0

    def test_deceptive(self):
        assert fitness_of(12, "111000") == pytest.approx(1.9)

    def test_trap(self):
        assert fitness_of(15, "1111100000", trap_k=5) == 9.0

    def test_hierarchical_trap_one(self):
        assert fitness_of(21, "111111111") == 18.0

    def test_quadratic(self):
        assert fitness_of(11, "110001") == pytest.approx(1.9)

    def test_bipolar_has_two_block_optima(self):
        assert fitness_of(13, "000000") == fitness_of(13, "111111") == 1.0
        assert fitness_of(13, "000111") == pytest.approx(0.9)

    def test_overlapping_windows_share_a_bit(self):
        # windows 111 and 111 share position 2
        assert fitness_of(14, "11111") == 2.0
        assert fitness_of(14, "00000") == pytest.approx(1.8)

    def test_uniform_six_blocks(self):
        assert fitness_of(16, "111111011111") == 1.0

    def test_trap_table(self):
        assert trap_table(5) == [4.0, 3.0, 2.0, 1.0, 0.0, 5.0]

    def test_hierarchical_trap_two_low_levels(self):
        # two levels: a 000 triple scores fLow = 1 + 0.1/2 at level one
        low = fitness_of(22, "000111111")
        assert low == pytest.approx(3 * 1.05 + 3 + 3 + 0.0)

    def test_hierarchical_overrides(self):
        value = fitness_of(21, "111111111", hier=HierParams(f_high_top=2.0))
        assert value == 9.0 + 18.0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            compute_fitness(spec(10, 4), Genome.from_string("101"), RandomStream(0))

    def test_counter_counts_every_call(self):
        counter = FitnessCounter()
        f = FitnessFunction(spec(10, 3), counter)
        g = Genome.from_string("101")
        f.evaluate(g, RandomStream(0))
        f.evaluate_many([g, g.copy(), g.copy()], RandomStream(0))
        assert f.calls == 4
        assert base_fitness(spec(10, 3), g) == 2.0
        assert counter.count == 4

    def test_noise_free_is_repeatable(self):
        f = FitnessFunction(spec(12, 6))
        g = Genome.from_string("110100")
        rng = RandomStream(3)
        assert f.evaluate(g, rng) == f.evaluate(g, rng)

    def test_noise_statistics(self):
        sigma = 2.0
        f = FitnessFunction(spec(10, 20, sigma_k=sigma))
        genomes = [Genome.from_string("1" * 10 + "0" * 10) for _ in range(10000)]
        values = f.evaluate_many(genomes, RandomStream(77))
        assert abs(values.mean() - 10.0) <= 4 * sigma / 100
        assert abs(values.std(ddof=1) - sigma) <= 0.1 * sigma
        assert genomes[0].fitness == values[0]


class TestZeroOneMirror:
    @pytest.mark.parametrize("code", range(7))
    def test_mirror_exhaustive(self, code):
        n = SMALLEST[code + 10]
        for bits in itertools.product("01", repeat=n):
            g = Genome.from_string("".join(bits))
            one = base_fitness(spec(code + 10, n, trap_k=5), g)
            zero = base_fitness(spec(code, n, trap_k=5), g.complement())
            assert one == zero


class TestOptimum:
    @pytest.mark.parametrize(
        "problem_id,n,expected", [(10, 50, 50.0), (12, 30, 10.0), (21, 27, 81.0), (0, 8, 8.0)]
    )
    def test_values(self, problem_id, n, expected):
        assert optimum_value(spec(problem_id, n)) == pytest.approx(expected)

    def test_oracle_onemax(self):
        result = brute_force_optimum(spec(10, 4))
        assert result.best_value == 4.0
        assert result.best_genome.to_string() == "1111"

    def test_oracle_zeromax(self):
        result = brute_force_optimum(spec(0, 4))
        assert result.best_value == 4.0
        assert result.best_genome.to_string() == "0000"

    def test_oracle_bipolar_returns_smallest_argmax(self):
        result = brute_force_optimum(spec(13, 6))
        assert result.best_value == 1.0
        assert result.best_genome.to_string() == "000000"

    def test_oracle_refuses_long_strings(self):
        with pytest.raises(OracleRefusedError):
            brute_force_optimum(spec(10, 25))

    def test_oracle_refuses_noise(self):
        with pytest.raises(OracleRefusedError):
            brute_force_optimum(spec(10, 4, sigma_k=1.0))

    def test_hierarchy_levels(self):
        assert hierarchy_levels(27) == 3
        assert hierarchy_levels(3) == 1
        assert hierarchy_levels(1) is None
        assert hierarchy_levels(12) is None


class TestRegistry:
    def test_register_custom_problem(self, custom_problem):
        register_problem(custom_problem, ConstantProblem(0.0), optimum_known=0.0)
        assert fitness_of(custom_problem, "0110") == 0.0
        assert optimum_value(spec(custom_problem, 4)) == 0.0
        assert custom_problem in dict(problem_menu())

    def test_duplicate_registration(self, custom_problem):
        register_problem(custom_problem, ConstantProblem(0.0))
        with pytest.raises(ConfigurationError):
            register_problem(custom_problem, ConstantProblem(1.0))

    def test_builtin_collision(self):
        with pytest.raises(ConfigurationError, match="built-in"):
            register_problem(12, ConstantProblem(0.0))

    def test_unknown_optimum(self, custom_problem):
        register_problem(custom_problem, ConstantProblem(1.0))
        assert optimum_value(spec(custom_problem, 4)) is None

    def test_plain_callable_evaluator(self, custom_problem):
        class Ones:
            def compute_fitness(self, alleles: np.ndarray) -> float:
                return float(alleles.sum())

        register_problem(custom_problem, Ones(), optimum_known=5.0)
        f = FitnessFunction(spec(custom_problem, 5))
        values = f.evaluate_many([Genome.from_string("11100"), Genome.from_string("00001")], RandomStream(0))
        assert list(values) == [3.0, 1.0]

    def test_builtins_cannot_be_unregistered(self):
        with pytest.raises(ConfigurationError):
            unregister_problem(10)
