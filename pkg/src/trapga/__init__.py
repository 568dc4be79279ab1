"""Dynamic deceptive trap functions and genetic algorithms that track them."""

__version__ = "0.1.0"

from ._validation import ConfigError, DimensionError
from .algorithms import ADMGA, AMGA, ALGORITHMS, GGA, RIGA, SSGA, make_algorithm, register_algorithm
from .dynenv import DynamicEnvironment, DynamicsSpec, StaticEnvironment
from .metrics import RunTrace, ScenarioSummary, mean_best_of_generation
from .stats import t_test_paired, t_test_two_sample
from .traps import ConcatTrapProblem, TrapSpec

__all__ = [
    "ADMGA",
    "ALGORITHMS",
    "AMGA",
    "ConcatTrapProblem",
    "ConfigError",
    "DimensionError",
    "DynamicEnvironment",
    "DynamicsSpec",
    "GGA",
    "RIGA",
    "RunTrace",
    "SSGA",
    "ScenarioSummary",
    "StaticEnvironment",
    "TrapSpec",
    "make_algorithm",
    "mean_best_of_generation",
    "register_algorithm",
    "t_test_paired",
    "t_test_two_sample",
]
