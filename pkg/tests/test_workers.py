import pytest

from ea.config import parse_config
from ea.problems import ConstantProblem, register_problem, unregister_problem
from ea.stopper import StopReason
from reporting.writers import render_run
from workers.tasks import run_experiment, run_many, run_single, write_outputs


@pytest.fixture
def config():
    return parse_config(
        "algorithm = UMDA\nproblemType = 10\nstringSize = 10\npopulationSize = 20\n"
        "nRuns = 3\nmasterSeed = 42\nmaxGenerations = 8\n"
    )


def body(record):
    return [line for line in render_run(record).splitlines() if not line.startswith("# timestamp")]


def test_runs_come_back_in_order(config):
    records = run_many(config, n_jobs=1)
    assert [r.header.run_index for r in records] == [0, 1, 2]
    assert all(r.header.seed == 42 for r in records)


def test_runs_use_distinct_substreams(config):
    records = run_many(config, n_jobs=1)
    assert body(records[0]) != body(records[1])


def test_parallel_matches_sequential(config):
    sequential = run_many(config, n_jobs=1)
    parallel = run_many(config, n_jobs=2)
    assert [body(r) for r in parallel] == [body(r) for r in sequential]


def test_single_run_is_reproducible(config):
    assert body(run_single(config, 1)) == body(run_single(config, 1))


def test_header_echoes_the_configuration(config):
    record = run_single(config, 0)
    assert record.header.parameters["umdaTau"] == 0.5
    assert record.header.parameters["maxGenerations"] == 8


def test_zero_jobs_runs_sequentially(config):
    assert len(run_many(config, n_jobs=0)) == 3


def test_write_outputs(config, tmp_path):
    records = run_many(config, n_jobs=1)
    output = write_outputs(records, tmp_path, tmp_path / "all.csv")
    assert [p.name for p in output.run_files] == ["UMDA_10_0.txt", "UMDA_10_1.txt", "UMDA_10_2.txt"]
    assert output.stats_file.name == "UMDA-STATS_10_3.txt"
    assert output.csv_file.exists()
    assert output.stats.n_runs == 3


def test_experiment_stops_for_a_reason(config, tmp_path):
    output = run_experiment(config, tmp_path)
    assert output.csv_file is None
    for record in output.records:
        assert record.footer.stop_reason in (StopReason.OPTIMUM_FOUND, StopReason.MAX_GENERATIONS)
        assert len(record.rows) == record.final_generation + 1


@pytest.fixture
def custom_config():
    register_problem(99, ConstantProblem(0.0), optimum_known=0.0)
    yield parse_config(
        "algorithm = UMDA\nproblemType = 99\nstringSize = 6\npopulationSize = 10\n"
        "nRuns = 2\nmaxGenerations = 3\n"
    )
    unregister_problem(99)


def test_registered_problem_runs_in_worker_processes(custom_config):
    records = run_many(custom_config, n_jobs=2)
    assert [r.header.run_index for r in records] == [0, 1]
    assert all(r.footer.best_fitness == 0.0 for r in records)
    assert [body(r) for r in records] == [body(r) for r in run_many(custom_config, n_jobs=1)]
