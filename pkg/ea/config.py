"""
Parameter-file parsing and validation

The file is line oriented: `name = value`, '#' starts a comment, blank lines
are ignored and option names are case-sensitive. Later duplicates override
earlier ones. Every problem found is reported with its line number.
"""

from __future__ import annotations

import logging
import re
from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from ea.errors import ConfigIssue, ConfigurationError
from ea.problems import HierParams, ProblemSpec, length_violation
from ea.stopper import StopConfig
from solvers import PARAMS
from solvers.ecga import EcgaParams, EcgaReplacement
from solvers.hboa import HboaParams, default_window
from solvers.sga import CrossoverType, SgaParams
from solvers.umda import SelectionKind, UmdaParams

logger = logging.getLogger(__name__)

_NAME = re.compile(r"^[A-Za-z][A-Za-z0-9_]*$")
_NO_BOUND = {"unlimited", "disabled", "none"}
MAX_SEED = 2**64 - 1


class Algorithm(str, Enum):
    SGA = "SGA"
    UMDA = "UMDA"
    ECGA = "ECGA"
    HBOA = "HBOA"


class Config(BaseModel):
    """Validated experiment configuration; aliases are the parameter-file option names"""
    model_config = ConfigDict(extra="forbid", populate_by_name=True, frozen=True)

    # Algorithm and problem
    algorithm: Algorithm = Algorithm.SGA
    problem_type: int = Field(..., alias="problemType")
    string_size: int = Field(..., alias="stringSize", ge=1)
    sigma_k: float = Field(0.0, alias="sigmaK", ge=0)
    trap_k: int = Field(5, alias="trapK", ge=1)
    hier_f_high_low: Optional[float] = Field(None, alias="hierFHighLow")
    hier_f_low_low: Optional[float] = Field(None, alias="hierFLowLow")
    hier_f_high_top: Optional[float] = Field(None, alias="hierFHighTop")
    hier_f_low_top: Optional[float] = Field(None, alias="hierFLowTop")

    # Runs
    population_size: int = Field(100, alias="populationSize", ge=1)
    n_runs: int = Field(1, alias="nRuns", ge=1)
    master_seed: int = Field(0, alias="masterSeed", ge=0, le=MAX_SEED)
    output_dir: Optional[str] = Field(None, alias="outputDir")
    n_jobs: Optional[int] = Field(None, alias="nJobs", ge=-1)

    # Stopper
    max_generations: Optional[int] = Field(1000, alias="maxGenerations", ge=1)
    max_fitness_calls: Optional[int] = Field(10_000_000, alias="maxFitnessCalls", ge=1)
    stop_on_optimum: bool = Field(True, alias="stopOnOptimum")
    convergence_threshold: Optional[float] = Field(None, alias="convergenceThreshold", ge=0.5, le=1.0)
    no_improvement_window: Optional[int] = Field(None, alias="noImprovementWindow", ge=1)

    # SGA
    sga_tournament_size: int = Field(2, alias="sgaTournamentSize", ge=1)
    sga_crossover_type: CrossoverType = Field(CrossoverType.UNIFORM, alias="sgaCrossoverType")
    sga_pc: float = Field(0.9, alias="sgaPc", ge=0, le=1)
    sga_pm: Optional[float] = Field(None, alias="sgaPm", ge=0, le=1)
    sga_elitism: int = Field(1, alias="sgaElitism", ge=0)

    # UMDA
    umda_tau: float = Field(0.5, alias="umdaTau", gt=0, le=1)
    umda_selection: SelectionKind = Field(SelectionKind.TRUNCATION, alias="umdaSelection")
    umda_tournament_size: int = Field(2, alias="umdaTournamentSize", ge=1)
    umda_clamp_margins: bool = Field(False, alias="umdaClampMargins")
    umda_elitism: int = Field(1, alias="umdaElitism", ge=0)

    # ECGA
    ecga_tournament_size: int = Field(8, alias="ecgaTournamentSize", ge=1)
    ecga_max_group_size: int = Field(12, alias="ecgaMaxGroupSize", ge=1)
    ecga_elitism: int = Field(1, alias="ecgaElitism", ge=0)
    ecga_replacement: EcgaReplacement = Field(EcgaReplacement.RTR, alias="ecgaReplacement")
    ecga_rtr_window: Optional[int] = Field(None, alias="ecgaRtrWindow", ge=1)

    # HBOA
    hboa_offspring_fraction: float = Field(0.5, alias="hboaOffspringFraction", ge=0, le=1)
    hboa_rtr_window: Optional[int] = Field(None, alias="hboaRtrWindow", ge=1)
    hboa_max_incoming: Optional[int] = Field(None, alias="hboaMaxIncoming", ge=0)
    hboa_tournament_size: int = Field(2, alias="hboaTournamentSize", ge=1)

    @field_validator("*", mode="before")
    @classmethod
    def _no_bound(cls, value: Any) -> Any:
        if isinstance(value, str) and value.strip().lower() in _NO_BOUND:
            return None
        return value

    @field_validator("algorithm", mode="before")
    @classmethod
    def _upper_algorithm(cls, value: Any) -> Any:
        return value.strip().upper() if isinstance(value, str) else value

    @classmethod
    def option_names(cls) -> List[str]:
        return [f.alias or name for name, f in cls.model_fields.items()]

    def problem_spec(self) -> ProblemSpec:
        return ProblemSpec(
            problem_id=self.problem_type,
            string_size=self.string_size,
            sigma_k=self.sigma_k,
            trap_k=self.trap_k,
            hier=HierParams(
                f_high_low=self.hier_f_high_low,
                f_low_low=self.hier_f_low_low,
                f_high_top=self.hier_f_high_top,
                f_low_top=self.hier_f_low_top,
            ),
        )

    def stop_config(self) -> StopConfig:
        return StopConfig(
            max_generations=self.max_generations,
            max_fitness_calls=self.max_fitness_calls,
            stop_on_optimum=self.stop_on_optimum,
            convergence_threshold=self.convergence_threshold,
            no_improvement_window=self.no_improvement_window,
        )

    def solver_params(self) -> BaseModel:
        built: Dict[str, BaseModel] = {
            "SGA": SgaParams(
                tournament_size=self.sga_tournament_size,
                crossover_type=self.sga_crossover_type,
                crossover_probability=self.sga_pc,
                mutation_probability=self.sga_pm,
                elitism=self.sga_elitism,
            ),
            "UMDA": UmdaParams(
                tau=self.umda_tau,
                selection=self.umda_selection,
                tournament_size=self.umda_tournament_size,
                clamp_margins=self.umda_clamp_margins,
                elitism=self.umda_elitism,
            ),
            "ECGA": EcgaParams(
                tournament_size=self.ecga_tournament_size,
                max_group_size=self.ecga_max_group_size,
                elitism=self.ecga_elitism,
                replacement=self.ecga_replacement,
                rtr_window=self.ecga_rtr_window,
            ),
            "HBOA": HboaParams(
                offspring_fraction=self.hboa_offspring_fraction,
                rtr_window=self.hboa_rtr_window,
                max_incoming=self.hboa_max_incoming,
                tournament_size=self.hboa_tournament_size,
            ),
        }
        params = built[self.algorithm.value]
        assert isinstance(params, PARAMS[self.algorithm.value])
        return params

    def echo(self) -> Dict[str, Any]:
        """Every option as written in a parameter file"""
        return self.model_dump(by_alias=True, mode="json")

    def cross_check(self) -> List[ConfigIssue]:
        """Checks spanning several options"""
        issues: List[ConfigIssue] = []
        try:
            violation = length_violation(self.problem_spec())
            if violation:
                issues.append(ConfigIssue(violation, field="stringSize"))
        except ConfigurationError:
            issues.append(ConfigIssue(f"unknown problem code {self.problem_type}", field="problemType"))

        N = self.population_size
        if self.max_generations is None and self.max_fitness_calls is None:
            issues.append(ConfigIssue(
                "at least one of maxGenerations / maxFitnessCalls must be bounded",
                field="maxGenerations",
            ))
        algo = self.algorithm
        if algo == Algorithm.SGA and self.sga_elitism > N:
            issues.append(ConfigIssue(f"sgaElitism ({self.sga_elitism}) exceeds populationSize ({N})", field="sgaElitism"))
        if algo == Algorithm.UMDA and self.umda_elitism > N:
            issues.append(ConfigIssue(f"umdaElitism ({self.umda_elitism}) exceeds populationSize ({N})", field="umdaElitism"))
        if algo == Algorithm.ECGA:
            if self.ecga_tournament_size > N:
                issues.append(ConfigIssue(
                    f"ecgaTournamentSize ({self.ecga_tournament_size}) exceeds populationSize ({N}) "
                    "for tournaments without replacement",
                    field="ecgaTournamentSize",
                ))
            if self.ecga_elitism > N:
                issues.append(ConfigIssue(f"ecgaElitism ({self.ecga_elitism}) exceeds populationSize ({N})", field="ecgaElitism"))
            if self.ecga_rtr_window is not None and self.ecga_rtr_window > N:
                issues.append(ConfigIssue(
                    f"ecgaRtrWindow ({self.ecga_rtr_window}) exceeds populationSize ({N})", field="ecgaRtrWindow"
                ))
        if algo == Algorithm.HBOA:
            window = self.hboa_rtr_window or default_window(self.string_size, N)
            if window > N:
                issues.append(ConfigIssue(f"hboaRtrWindow ({window}) exceeds populationSize ({N})", field="hboaRtrWindow"))
            if self.hboa_offspring_fraction == 0:
                logger.warning("hboaOffspringFraction is 0: runs will never change the population")
        return issues


def _issues_from_validation(error: ValidationError, lines: Dict[str, int]) -> List[ConfigIssue]:
    issues = []
    for err in error.errors():
        name = str(err["loc"][0]) if err.get("loc") else None
        if err.get("type") == "missing":
            issues.append(ConfigIssue(f"missing required option {name}", field=name))
            continue
        issues.append(ConfigIssue(f"{name}: {err['msg']}", line=lines.get(name or ""), field=name))
    return issues


def _validate(values: Dict[str, str], lines: Dict[str, int]) -> Config:
    try:
        config = Config.model_validate(values)
    except ValidationError as e:
        raise ConfigurationError(_issues_from_validation(e, lines)) from None
    issues = [
        ConfigIssue(i.message, line=lines.get(i.field or ""), field=i.field)
        for i in config.cross_check()
    ]
    if issues:
        raise ConfigurationError(issues)
    return config


def parse_config(text: str | bytes) -> Config:
    """Parse and validate a parameter file; raises ConfigurationError listing every issue"""
    try:
        if isinstance(text, bytes):
            text = text.decode("utf-8", errors="replace")
        known = set(Config.option_names())
        values: Dict[str, str] = {}
        lines: Dict[str, int] = {}
        issues: List[ConfigIssue] = []

        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                issues.append(ConfigIssue(f"malformed line (expected 'name = value'): {line!r}", line=lineno))
                continue
            name, value = (part.strip() for part in line.split("=", 1))
            if not _NAME.match(name):
                issues.append(ConfigIssue(f"malformed option name {name!r}", line=lineno))
                continue
            if name not in known:
                issues.append(ConfigIssue(f"unknown option {name!r}", line=lineno, field=name))
                continue
            if not value:
                issues.append(ConfigIssue(f"option {name} has no value", line=lineno, field=name))
                continue
            if name in values:
                logger.warning(f"line {lineno}: {name} overrides the value set on line {lines[name]}")
            values[name] = value
            lines[name] = lineno

        if issues:
            # still validate what was readable so every error is reported at once
            try:
                _validate(values, lines)
            except ConfigurationError as e:
                issues.extend(e.issues)
            raise ConfigurationError(issues)
        return _validate(values, lines)
    except ConfigurationError:
        raise
    except Exception as e:  # parse_config is total: anything else is still a config error
        raise ConfigurationError([ConfigIssue(f"unreadable configuration: {e}")]) from e


def load_config(path: str) -> Config:
    with open(path, "rb") as f:
        return parse_config(f.read())


def apply_overrides(config: Config, **overrides: Any) -> Config:
    """Re-validate the configuration with command-line overrides (None leaves a value alone)"""
    values = config.model_dump(by_alias=True)
    for name, value in overrides.items():
        if value is not None:
            values[Config.model_fields[name].alias or name] = value
    return _validate(values, {})
