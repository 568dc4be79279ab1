"""Experiment plans, run orchestration and the command line."""

from .plan import Cell, ExperimentPlan, load_plan, parse_plan, pm_ladder
from .runner import compare, load_results, run_scenario, run_single, run_sweep, select_best_pm

__all__ = [
    "Cell",
    "ExperimentPlan",
    "compare",
    "load_plan",
    "load_results",
    "parse_plan",
    "pm_ladder",
    "run_scenario",
    "run_single",
    "run_sweep",
    "select_best_pm",
]
