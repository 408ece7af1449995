import numpy as np
import pytest

from ea.core import (
    FitnessCounter,
    Genome,
    Population,
    RandomStream,
    get_allele,
    hamming_distance,
    population_stats,
    random_population,
)
from ea.errors import ConfigurationError, EvaluationStateError
from tests.conftest import evaluated_population


class TestRandomStream:
    def test_same_seed_same_draws(self):
        a, b = RandomStream(7), RandomStream(7)
        assert np.array_equal(a.random(20), b.random(20))

    def test_substreams_depend_on_seed_and_run(self):
        s = RandomStream(7)
        first = s.substream(3).random(5)
        again = RandomStream(7, 3).random(5)
        other = RandomStream(7, 4).random(5)
        assert np.array_equal(first, again)
        assert not np.array_equal(first, other)

    def test_seed_range(self):
        RandomStream(2**64 - 1)
        with pytest.raises(ConfigurationError):
            RandomStream(-1)
        with pytest.raises(ConfigurationError):
            RandomStream(2**64)

    def test_algorithm_is_recorded(self):
        assert RandomStream(0).algorithm == "numpy.PCG64"


class TestGenome:
    def test_get_allele(self):
        g = Genome.from_string("101")
        assert get_allele(g, 0) == 1
        assert get_allele(g, 2) == 1
        with pytest.raises(IndexError):
            get_allele(g, 3)

    def test_rejects_non_binary(self):
        with pytest.raises(ValueError):
            Genome([0, 2, 1])
        with pytest.raises(ValueError):
            Genome.from_string("10a")
        with pytest.raises(ValueError):
            Genome([])

    def test_alleles_are_read_only(self):
        g = Genome.from_string("0101")
        with pytest.raises(ValueError):
            g.alleles[0] = 1

    def test_set_allele_invalidates_fitness(self):
        g = Genome.from_string("000")
        g.set_fitness(3.0)
        g.set_allele(1, 1)
        assert g.to_string() == "010"
        assert not g.evaluated

    def test_copy_keeps_fitness_and_is_independent(self):
        g = Genome.from_string("110")
        g.set_fitness(2.0)
        c = g.copy()
        c.set_allele(0, 0)
        assert g.to_string() == "110"
        assert g.fitness == 2.0
        assert c.to_string() == "010"

    def test_complement_and_string_round_trip(self):
        g = Genome.from_string("1100")
        assert g.complement().to_string() == "0011"
        assert Genome.from_string(g.to_string()) == g


@pytest.mark.parametrize(
    "a,b,expected",
    [("000", "000", 0), ("101", "010", 3), ("1100", "1010", 2)],
)
def test_hamming_distance(a, b, expected):
    assert hamming_distance(Genome.from_string(a), Genome.from_string(b)) == expected


def test_hamming_distance_length_mismatch():
    with pytest.raises(ValueError):
        hamming_distance(Genome.from_string("10"), Genome.from_string("101"))


class TestPopulationStats:
    def test_mean_and_best(self):
        stats = population_stats(evaluated_population([1, 3, 2]))
        assert stats.average_fitness == pytest.approx(2.0)
        assert stats.best_fitness == 3.0
        assert stats.best_index == 1

    def test_single_member(self):
        stats = population_stats(evaluated_population([5]))
        assert (stats.average_fitness, stats.best_fitness, stats.best_index) == (5.0, 5.0, 0)

    def test_first_index_wins_ties(self):
        assert population_stats(evaluated_population([2, 2])).best_index == 0

    def test_unevaluated_member_is_a_state_error(self):
        p = Population([Genome.from_string("01"), Genome.from_string("10")])
        p[0].set_fitness(1.0)
        with pytest.raises(EvaluationStateError):
            population_stats(p)


class TestRandomPopulation:
    def test_shape_and_alphabet(self):
        p = random_population(3, 4, RandomStream(7))
        assert len(p) == 3
        assert all(len(g) == 4 for g in p)
        assert set(np.unique(p.matrix())) <= {0, 1}
        assert not any(g.evaluated for g in p)

    def test_boundary(self):
        p = random_population(1, 1, RandomStream(99))
        assert len(p) == 1 and len(p[0]) == 1

    def test_frequencies_are_balanced(self):
        p = random_population(10000, 8, RandomStream(2024))
        freq = p.allele_frequencies()
        assert np.all((freq >= 0.45) & (freq <= 0.55))

    @pytest.mark.parametrize("N,n", [(0, 4), (4, 0)])
    def test_empty_sizes_rejected(self, N, n):
        with pytest.raises(ConfigurationError):
            random_population(N, n, RandomStream(0))


class TestPopulation:
    def test_mixed_lengths_rejected(self):
        with pytest.raises(ValueError):
            Population([Genome.from_string("01"), Genome.from_string("011")])

    def test_ranked_indices_break_ties_by_index(self):
        p = evaluated_population([2, 5, 5, 1])
        assert list(p.ranked_indices()) == [1, 2, 0, 3]

    def test_counter_is_shared_and_monotone(self):
        counter = FitnessCounter()
        p = Population([Genome.from_string("1")], counter=counter)
        counter.increment(3)
        assert p.fitness_calls_so_far == 3
        with pytest.raises(ValueError):
            counter.increment(-1)
