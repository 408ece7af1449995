"""
The four evolutionary algorithms and their factory
"""

from typing import Dict, Optional, Type

from pydantic import BaseModel

from ea.engine import Solver
from ea.errors import ConfigurationError

from .ecga import ECGA, EcgaParams
from .hboa import HBOA, HboaParams
from .sga import SGA, SgaParams
from .umda import UMDA, UmdaParams

ALGORITHMS: Dict[str, Type[Solver]] = {
    "SGA": SGA,
    "UMDA": UMDA,
    "ECGA": ECGA,
    "HBOA": HBOA,
}

PARAMS: Dict[str, Type[BaseModel]] = {
    "SGA": SgaParams,
    "UMDA": UmdaParams,
    "ECGA": EcgaParams,
    "HBOA": HboaParams,
}


def create_solver(name: str, params: Optional[BaseModel] = None) -> Solver:
    key = name.upper()
    if key not in ALGORITHMS:
        raise ConfigurationError(
            f"unknown algorithm {name!r}; choose one of {', '.join(ALGORITHMS)}"
        )
    return ALGORITHMS[key](params)  # type: ignore[call-arg]


__all__ = [
    "ALGORITHMS",
    "PARAMS",
    "create_solver",
    "SGA",
    "UMDA",
    "ECGA",
    "HBOA",
    "SgaParams",
    "UmdaParams",
    "EcgaParams",
    "HboaParams",
]
