"""
Error types shared by the evolutionary algorithm packages
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Optional


@dataclass(frozen=True)
class ConfigIssue:
    """A single configuration problem, optionally tied to a parameter-file line"""
    message: str
    line: Optional[int] = None
    field: Optional[str] = None

    def __str__(self) -> str:
        if self.line is not None:
            return f"line {self.line}: {self.message}"
        return self.message


class EAError(Exception):
    """Base class for all library errors"""


class ConfigurationError(EAError):
    """Invalid configuration; carries every issue found, not just the first"""

    def __init__(self, issues: Iterable[ConfigIssue] | str):
        if isinstance(issues, str):
            issues = [ConfigIssue(issues)]
        self.issues: List[ConfigIssue] = list(issues)
        if not self.issues:
            self.issues = [ConfigIssue("invalid configuration")]
        super().__init__("; ".join(str(i) for i in self.issues))


class EvaluationStateError(EAError):
    """An operation needed evaluated genomes (or a nonempty set) and did not get them"""


class OracleRefusedError(EAError):
    """Exhaustive enumeration refused (string too long or noisy problem)"""
