"""
Success-rate sweep over seeds

    python scripts/run_sweep.py EAParameters.txt --seeds 30
    python scripts/run_sweep.py hboa.txt --seeds 10 --population 500 --population 1000 --population 2000

With several --population values each seed is restarted with the next size
until a run finds the optimum.
"""

import sys
from pathlib import Path
from typing import List, Optional

import pandas as pd
import typer
from rich.console import Console
from rich.table import Table

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from ea.config import Config, apply_overrides, load_config  # noqa: E402
from ea.errors import ConfigurationError  # noqa: E402
from ea.settings import get_settings  # noqa: E402
from ea.telemetry import setup_logging  # noqa: E402
from reporting.records import RunRecord  # noqa: E402
from workers.tasks import run_single  # noqa: E402

console = Console()


def run_seed(config: Config, seed: int, populations: List[int]) -> RunRecord:
    """Restart with each population size in turn; stop at the first success"""
    record: Optional[RunRecord] = None
    for size in populations or [config.population_size]:
        attempt = apply_overrides(config, master_seed=seed, population_size=size)
        record = run_single(attempt, 0)
        if record.successful:
            break
    assert record is not None
    return record


def main(
    paramfile: Path = typer.Argument(..., help="Parameter file"),
    seeds: int = typer.Option(30, "--seeds", help="Number of seeds (0 .. seeds-1)"),
    first_seed: int = typer.Option(0, "--first-seed"),
    population: Optional[List[int]] = typer.Option(None, "--population", help="Population sizes for restarts"),
    csv: Optional[Path] = typer.Option(None, "--csv", help="Write one summary row per seed"),
):
    settings = get_settings()
    setup_logging(settings.log_level, settings.log_json)
    try:
        config = load_config(str(paramfile))
    except (ConfigurationError, OSError) as e:
        console.print(f"[red]error[/red] {e}")
        raise typer.Exit(code=2)

    rows = []
    for seed in range(first_seed, first_seed + seeds):
        record = run_seed(config, seed, population or [])
        rows.append(
            {
                "seed": seed,
                "population": record.header.population_size,
                "stop_reason": record.footer.stop_reason.value,
                "generations": record.final_generation,
                "fitness_calls": record.footer.total_fitness_calls,
                "best_so_far": record.final_best_so_far,
                "successful": record.successful,
            }
        )
    df = pd.DataFrame(rows)

    table = Table(title=f"{config.algorithm.value} on problem {config.problem_type} (n={config.string_size})")
    for column in df.columns:
        table.add_column(column)
    for _, row in df.iterrows():
        table.add_row(*(str(v) for v in row.values))
    console.print(table)
    console.print(f"success rate {df['successful'].mean():.6f} ({int(df['successful'].sum())}/{len(df)})")

    if csv is not None:
        df.to_csv(csv, index=False)
        console.print(f"wrote {csv}")


if __name__ == "__main__":
    typer.run(main)
