"""
Run files, statistics files and CSV export

All numbers are rendered in plain decimal with '.' as radix. Each file is
written to a temporary sibling and renamed into place.
"""

from __future__ import annotations

import logging
import os
import tempfile
from pathlib import Path
from typing import Iterable, List, Optional, Union

import numpy as np
import pandas as pd

from reporting.records import RunRecord, StatsRecord

logger = logging.getLogger(__name__)

PathLike = Union[str, os.PathLike]

CSV_COLUMNS = [
    "algorithm",
    "problem",
    "run",
    "generation",
    "fitness_calls",
    "best",
    "avg",
    "best_so_far",
]
NA = "NA"


def format_number(value: Optional[float]) -> str:
    """Plain decimal with 9 significant digits; None renders as NA"""
    if value is None:
        return NA
    if float(value).is_integer():
        return str(int(value))
    return np.format_float_positional(
        float(value), precision=9, unique=False, fractional=False, trim="-"
    )


def _atomic_write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def run_file_name(record: RunRecord) -> str:
    h = record.header
    return f"{h.algorithm}_{h.problem_id}_{h.run_index}.txt"


def stats_file_name(stats: StatsRecord) -> str:
    return f"{stats.algorithm}-STATS_{stats.problem_id}_{stats.n_runs}.txt"


def render_run(record: RunRecord) -> str:
    h, f = record.header, record.footer
    lines = [
        f"# algorithm {h.algorithm}",
        f"# problem {h.problem_id} {h.problem_name}",
        f"# stringSize {h.string_size}",
        f"# populationSize {h.population_size}",
        f"# sigmaK {format_number(h.sigma_k)}",
        f"# seed {h.seed}",
        f"# runIndex {h.run_index}",
        f"# rng {h.rng_algorithm}",
    ]
    for name in sorted(h.parameters):
        value = h.parameters[name]
        shown = format_number(value) if isinstance(value, float) else value
        lines.append(f"# param {name} {NA if shown is None else shown}")
    # the only line that differs between identical runs
    lines.append(
        f"# timestamp {h.timestamp.isoformat()} wallTimeSeconds {f.wall_time_seconds:.6f}"
    )
    lines.append("# generation fitnessCalls bestFitness averageFitness bestSoFar")
    for row in record.rows:
        lines.append(
            " ".join(
                [
                    str(row.generation),
                    str(row.fitness_calls),
                    format_number(row.best_fitness),
                    format_number(row.average_fitness),
                    format_number(row.best_so_far),
                ]
            )
        )
    lines.append(f"# stopReason {f.stop_reason.value}")
    lines.append(f"# totalFitnessCalls {f.total_fitness_calls}")
    lines.append(f"# bestFitness {format_number(f.best_fitness)}")
    lines.append(f"# bestGenome {f.best_genome}")
    if f.model_summary:
        lines.append(f"# model {f.model_summary}")
    return "\n".join(lines) + "\n"


def render_stats(stats: StatsRecord) -> str:
    lines = [
        f"# algorithm {stats.algorithm}",
        f"# problem {stats.problem_id}",
        "# run stopReason generations totalFitnessCalls finalBestSoFar successful",
    ]
    for s in stats.runs:
        lines.append(
            f"{s.run_index} {s.stop_reason.value} {s.generations} {s.total_fitness_calls} "
            f"{format_number(s.final_best_so_far)} {int(s.successful)}"
        )
    lines.extend(aggregate_lines(stats))
    return "\n".join(lines) + "\n"


def aggregate_lines(stats: StatsRecord) -> List[str]:
    """The aggregate block, also printed by the CLI after a run"""
    return [
        f"nRuns {stats.n_runs}",
        f"successCount {stats.success_count}",
        f"successRate {stats.success_rate:.6f}",
        f"fitnessCallsMean {format_number(stats.calls_mean)}",
        f"fitnessCallsStd {format_number(stats.calls_std)}",
        f"fitnessCallsMin {format_number(stats.calls_min)}",
        f"fitnessCallsMax {format_number(stats.calls_max)}",
        f"bestSoFarMean {format_number(stats.best_mean)}",
        f"bestSoFarStd {format_number(stats.best_std)}",
    ]


def write_run_file(record: RunRecord, directory: PathLike) -> Path:
    path = Path(directory) / run_file_name(record)
    try:
        return _atomic_write(path, render_run(record))
    except OSError as e:
        logger.error(f"Could not write run file {path}: {e}")
        raise


def write_stats_file(stats: StatsRecord, directory: PathLike) -> Path:
    if stats.n_runs < 1:
        raise ValueError("statistics need at least one run")
    path = Path(directory) / stats_file_name(stats)
    try:
        return _atomic_write(path, render_stats(stats))
    except OSError as e:
        logger.error(f"Could not write statistics file {path}: {e}")
        raise


def records_frame(records: Iterable[RunRecord]) -> pd.DataFrame:
    rows = [
        {
            "algorithm": r.header.algorithm,
            "problem": r.header.problem_id,
            "run": r.header.run_index,
            "generation": row.generation,
            "fitness_calls": row.fitness_calls,
            "best": format_number(row.best_fitness),
            "avg": format_number(row.average_fitness),
            "best_so_far": format_number(row.best_so_far),
        }
        for r in records
        for row in r.rows
    ]
    return pd.DataFrame(rows, columns=CSV_COLUMNS)


def export_csv(records: Iterable[RunRecord], path: PathLike) -> Path:
    """One row per generation of every record; header only when there are none"""
    frame = records_frame(records)
    text = frame.to_csv(index=False, lineterminator="\n")
    target = Path(path)
    try:
        return _atomic_write(target, text)
    except OSError as e:
        logger.error(f"Could not write CSV {target}: {e}")
        raise
