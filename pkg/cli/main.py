"""
Command-line front end

    ea run EAParameters.txt [--seed S] [--out-dir DIR] [--csv PATH] [--algorithm A]
    ea problems
    ea oracle --problem P --string-size n [--trap-k k]
    ea validate EAParameters.txt

Exit codes: 0 success, 1 I/O failure while running, 2 configuration error.
"""

import logging
import sys
from pathlib import Path
from typing import List, Optional

import click
import typer
from rich.console import Console

from ea.config import Config, apply_overrides, load_config
from ea.errors import ConfigurationError, OracleRefusedError
from ea.problems import ProblemSpec, brute_force_optimum, problem_menu
from ea.settings import get_settings
from ea.telemetry import setup_logging, start_prometheus_server
from reporting.writers import aggregate_lines, format_number
from workers.tasks import run_many, write_outputs

logger = logging.getLogger(__name__)

EXIT_IO_ERROR = 1
EXIT_CONFIG_ERROR = 2

app = typer.Typer(add_completion=False, help="Evolutionary algorithm experiment runner")
console = Console()
err_console = Console(stderr=True)


def _report_config_error(error: ConfigurationError) -> None:
    for issue in error.issues:
        err_console.print(f"[red]error[/red] {issue}", highlight=False)


def _load(paramfile: Path) -> Config:
    try:
        return load_config(str(paramfile))
    except OSError as e:
        raise ConfigurationError(f"cannot read parameter file {paramfile}: {e.strerror or e}")


@app.callback()
def main() -> None:
    settings = get_settings()
    setup_logging(settings.log_level, settings.log_json)
    if settings.prometheus_port:
        start_prometheus_server(settings.prometheus_port)


@app.command()
def run(
    paramfile: Path = typer.Argument(..., help="Parameter file"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Override masterSeed"),
    out_dir: Optional[Path] = typer.Option(None, "--out-dir", help="Directory for run and statistics files"),
    csv: Optional[Path] = typer.Option(None, "--csv", help="Also export every generation row to this CSV"),
    algorithm: Optional[str] = typer.Option(None, "--algorithm", help="Override algorithm"),
) -> None:
    """Execute nRuns runs and write the run and statistics files"""
    settings = get_settings()
    try:
        config = apply_overrides(
            _load(paramfile),
            master_seed=seed,
            output_dir=str(out_dir) if out_dir is not None else None,
            algorithm=algorithm,
        )
    except ConfigurationError as e:
        _report_config_error(e)
        raise typer.Exit(code=EXIT_CONFIG_ERROR)

    target = Path(config.output_dir or settings.out_dir)
    n_jobs = config.n_jobs if config.n_jobs is not None else settings.n_jobs
    records = run_many(config, n_jobs)
    try:
        output = write_outputs(records, target, csv)
    except OSError as e:
        err_console.print(f"[red]error[/red] could not write results: {e}", highlight=False)
        raise typer.Exit(code=EXIT_IO_ERROR)

    for line in aggregate_lines(output.stats):
        console.print(line, highlight=False)


@app.command()
def problems() -> None:
    """List the problem menu"""
    for code, name in problem_menu():
        console.print(f"{code:>3}  {name}", highlight=False)


@app.command()
def oracle(
    problem: int = typer.Option(..., "--problem", help="Problem code"),
    string_size: int = typer.Option(..., "--string-size", help="String size n"),
    trap_k: int = typer.Option(5, "--trap-k", help="Trap size for problems 5 and 15"),
) -> None:
    """Print the exhaustive optimum value and the smallest genome reaching it"""
    try:
        spec = ProblemSpec(problem_id=problem, string_size=string_size, trap_k=trap_k)
        result = brute_force_optimum(spec)
    except (ConfigurationError, OracleRefusedError) as e:
        err_console.print(f"[red]error[/red] {e}", highlight=False)
        raise typer.Exit(code=EXIT_CONFIG_ERROR)
    console.print(f"{format_number(result.best_value)} {result.best_genome.to_string()}", highlight=False)


@app.command()
def validate(paramfile: Path = typer.Argument(..., help="Parameter file")) -> None:
    """Parse and validate a parameter file without running it"""
    try:
        config = _load(paramfile)
    except ConfigurationError as e:
        _report_config_error(e)
        raise typer.Exit(code=EXIT_CONFIG_ERROR)
    console.print(
        f"OK {config.algorithm.value} problem {config.problem_type} "
        f"n={config.string_size} N={config.population_size} runs={config.n_runs}",
        highlight=False,
    )


def cli_main(argv: Optional[List[str]] = None) -> int:
    """Run the CLI with the given arguments and return the exit code"""
    command = typer.main.get_command(app)
    try:
        result = command.main(args=argv, prog_name="ea", standalone_mode=False)
    except click.ClickException as e:
        e.show()
        return e.exit_code
    except click.exceptions.Abort:
        return 1
    return result if isinstance(result, int) else 0


if __name__ == "__main__":
    sys.exit(cli_main())
