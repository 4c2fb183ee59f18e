"""Experiment harness: scenarios, canned presets, sweep runner, plots, CLI."""

from .plots import emit_plots
from .presets import canned, canned_raw, preset_names
from .runner import ResultTable, aggregate, component_seed, derive_seed, run_scenario
from .scenario import Scenario, ScenarioError, SolverSpec, apply_overrides, load_scenario, parse_scenario

__all__ = [
    "ResultTable",
    "Scenario",
    "ScenarioError",
    "SolverSpec",
    "aggregate",
    "apply_overrides",
    "canned",
    "canned_raw",
    "component_seed",
    "derive_seed",
    "emit_plots",
    "load_scenario",
    "parse_scenario",
    "preset_names",
    "run_scenario",
]
