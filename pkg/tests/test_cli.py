import logging
from pathlib import Path

import pandas as pd
import pytest
import typer
from typer.testing import CliRunner

from cli.main import EXIT_CONFIG_ERROR, EXIT_IO_ERROR, app, cli_main
from ea.problems import problem_menu

EXAMPLE = Path(__file__).resolve().parents[1] / "EAParameters.txt"

SMALL = """\
algorithm = SGA
problemType = 10
stringSize = 8
populationSize = 10
nRuns = 2
masterSeed = 5
maxGenerations = 5
"""

runner = CliRunner()


@pytest.fixture(autouse=True)
def _keep_root_logger():
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield
    root.handlers[:] = handlers
    root.setLevel(level)


@pytest.fixture
def paramfile(tmp_path):
    path = tmp_path / "params.txt"
    path.write_text(SMALL)
    return path


def test_problem_menu():
    result = runner.invoke(app, ["problems"])
    assert result.exit_code == 0
    lines = result.output.strip("\n").splitlines()
    assert len(lines) == 16
    assert lines[0] == "  0  ZeroMax"
    assert lines[-1] == " 22  Hierarchical Trap Two"


@pytest.mark.parametrize(
    "problem,n,expected",
    [("10", "6", "6 111111"), ("0", "4", "4 0000"), ("12", "6", "2 111111"), ("13", "6", "1 000000")],
)
def test_oracle(problem, n, expected):
    result = runner.invoke(app, ["oracle", "--problem", problem, "--string-size", n])
    assert result.exit_code == 0
    assert result.output.strip() == expected


def test_trap_size_help_names_the_trap_codes():
    oracle = typer.main.get_command(app).commands["oracle"]
    trap_k = next(p for p in oracle.params if p.name == "trap_k")
    assert "problems 5 and 15" in trap_k.help
    menu = dict(problem_menu())
    assert menu[5].endswith("Trap-k") and menu[15].endswith("Trap-k")


def test_oracle_refuses_bad_lengths():
    result = runner.invoke(app, ["oracle", "--problem", "12", "--string-size", "10"])
    assert result.exit_code == EXIT_CONFIG_ERROR
    assert "divisible by 3" in result.output


def test_validate_shipped_file():
    result = runner.invoke(app, ["validate", str(EXAMPLE)])
    assert result.exit_code == 0
    assert "OK ECGA problem 12 n=30 N=500 runs=1" in result.output


def test_validate_reports_lines(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("problemType = 12\nstringSize = 10\nfoo = 1\n")
    result = runner.invoke(app, ["validate", str(path)])
    assert result.exit_code == EXIT_CONFIG_ERROR
    assert "line 2:" in result.output
    assert "line 3:" in result.output


def test_missing_parameter_file(tmp_path):
    result = runner.invoke(app, ["validate", str(tmp_path / "absent.txt")])
    assert result.exit_code == EXIT_CONFIG_ERROR


def test_run_writes_files(paramfile, tmp_path):
    out = tmp_path / "out"
    csv = tmp_path / "rows.csv"
    result = runner.invoke(app, ["run", str(paramfile), "--out-dir", str(out), "--csv", str(csv)])
    assert result.exit_code == 0, result.output
    assert sorted(p.name for p in out.iterdir()) == ["SGA-STATS_10_2.txt", "SGA_10_0.txt", "SGA_10_1.txt"]
    assert "nRuns 2" in result.output
    frame = pd.read_csv(csv)
    assert set(frame["run"]) == {0, 1}


def test_seed_override_changes_runs(paramfile, tmp_path):
    runner.invoke(app, ["run", str(paramfile), "--out-dir", str(tmp_path / "a")])
    runner.invoke(app, ["run", str(paramfile), "--out-dir", str(tmp_path / "b"), "--seed", "99"])
    a = (tmp_path / "a" / "SGA_10_0.txt").read_text()
    b = (tmp_path / "b" / "SGA_10_0.txt").read_text()
    assert "# seed 5" in a
    assert "# seed 99" in b


def test_algorithm_override(paramfile, tmp_path):
    result = runner.invoke(app, ["run", str(paramfile), "--out-dir", str(tmp_path), "--algorithm", "UMDA"])
    assert result.exit_code == 0, result.output
    assert (tmp_path / "UMDA-STATS_10_2.txt").exists()


def test_environment_output_directory(paramfile, tmp_path, monkeypatch):
    monkeypatch.setenv("EA_OUT_DIR", str(tmp_path / "env"))
    result = runner.invoke(app, ["run", str(paramfile)])
    assert result.exit_code == 0, result.output
    assert (tmp_path / "env" / "SGA-STATS_10_2.txt").exists()


def test_output_directory_precedence(tmp_path, monkeypatch):
    path = tmp_path / "params.txt"
    path.write_text(SMALL + f"outputDir = {tmp_path / 'from_file'}\n")
    monkeypatch.setenv("EA_OUT_DIR", str(tmp_path / "env"))
    runner.invoke(app, ["run", str(path)])
    assert (tmp_path / "from_file" / "SGA_10_0.txt").exists()
    runner.invoke(app, ["run", str(path), "--out-dir", str(tmp_path / "flag")])
    assert (tmp_path / "flag" / "SGA_10_0.txt").exists()
    assert not (tmp_path / "env").exists()


def test_run_with_invalid_file(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("problemType = 7\nstringSize = 10\n")
    result = runner.invoke(app, ["run", str(path), "--out-dir", str(tmp_path / "out")])
    assert result.exit_code == EXIT_CONFIG_ERROR
    assert "unknown problem code 7" in result.output
    assert not (tmp_path / "out").exists()


def test_unwritable_output(paramfile, tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    result = runner.invoke(app, ["run", str(paramfile), "--out-dir", str(blocker / "out")])
    assert result.exit_code == EXIT_IO_ERROR


def test_cli_main_exit_codes(tmp_path, capsys):
    assert cli_main(["problems"]) == 0
    bad = tmp_path / "bad.txt"
    bad.write_text("stringSize 10\n")
    assert cli_main(["validate", str(bad)]) == EXIT_CONFIG_ERROR
    assert cli_main(["run"]) == 2
