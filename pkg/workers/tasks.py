"""
Multi-run driver

Runs are independent: each owns its population and the substream derived
from (masterSeed, runIndex), so they can execute in parallel worker
processes. Completed records come back in run order and are written by a
single caller.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

from joblib import Parallel, delayed

from ea.config import Config
from ea.core import RandomStream
from ea.engine import run
from ea.problems import ProblemEntry, custom_entries, install_entries
from ea.telemetry import structured_logger
from reporting.records import RunRecord, StatsRecord, summarize_runs
from reporting.writers import export_csv, write_run_file, write_stats_file
from solvers import create_solver

logger = logging.getLogger(__name__)


@dataclass
class ExperimentOutput:
    """Records of an experiment plus the files written for it"""
    records: List[RunRecord]
    stats: StatsRecord
    run_files: List[Path] = field(default_factory=list)
    stats_file: Optional[Path] = None
    csv_file: Optional[Path] = None


def run_single(config: Config, run_index: int) -> RunRecord:
    """
    Execute run `run_index` of an experiment

    Args:
        config: Validated experiment configuration
        run_index: Index of the run, selects the random substream

    Returns:
        The run's full record
    """
    solver = create_solver(config.algorithm.value, config.solver_params())
    return run(
        solver,
        config.problem_spec(),
        config.population_size,
        config.stop_config(),
        RandomStream(config.master_seed, run_index),
        run_index=run_index,
        parameters=config.echo(),
    )


def _run_in_worker(config: Config, run_index: int, entries: List[ProblemEntry]) -> RunRecord:
    install_entries(entries)
    return run_single(config, run_index)


def run_many(config: Config, n_jobs: Optional[int] = None) -> List[RunRecord]:
    """Execute all nRuns runs, in parallel when n_jobs != 1; results in run order"""
    jobs = n_jobs if n_jobs is not None else (config.n_jobs or 1)
    if jobs == 0:
        jobs = 1
    structured_logger.info(
        "Experiment started",
        algorithm=config.algorithm.value,
        problem_id=config.problem_type,
        n_runs=config.n_runs,
        n_jobs=jobs,
    )
    if jobs == 1 or config.n_runs == 1:
        return [run_single(config, r) for r in range(config.n_runs)]
    # registered problems exist only in this process
    entries = custom_entries()
    records = Parallel(n_jobs=jobs, backend="loky")(
        delayed(_run_in_worker)(config, r, entries) for r in range(config.n_runs)
    )
    return sorted(records, key=lambda rec: rec.header.run_index)


def write_outputs(
    records: List[RunRecord],
    out_dir: Path,
    csv_path: Optional[Path] = None,
) -> ExperimentOutput:
    """Write run files, the statistics file and optionally the CSV; the only file sink"""
    stats = summarize_runs(records)
    output = ExperimentOutput(records=records, stats=stats)
    for record in records:
        output.run_files.append(write_run_file(record, out_dir))
    output.stats_file = write_stats_file(stats, out_dir)
    if csv_path is not None:
        output.csv_file = export_csv(records, csv_path)
    logger.info(f"Wrote {len(output.run_files)} run files and {output.stats_file.name} to {out_dir}")
    return output


def run_experiment(
    config: Config,
    out_dir: Path,
    csv_path: Optional[Path] = None,
    n_jobs: Optional[int] = None,
) -> ExperimentOutput:
    """Run every run of the experiment, then write its files"""
    return write_outputs(run_many(config, n_jobs), out_dir, csv_path)
