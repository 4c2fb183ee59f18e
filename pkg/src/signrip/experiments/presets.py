"""Canned scenarios: named presets shipped as YAML files with the package."""

from __future__ import annotations

from importlib.resources import files

import yaml

from .scenario import Scenario, ScenarioError, apply_overrides, parse_scenario

__all__ = ["preset_names", "canned_raw", "canned"]


def _preset_dir():
    return files("signrip.experiments") / "presets"


def preset_names() -> list[str]:
    return sorted(p.name[: -len(".yaml")] for p in _preset_dir().iterdir() if p.name.endswith(".yaml"))


def canned_raw(name: str) -> dict:
    """The preset's raw mapping, for override editing before parsing."""
    path = _preset_dir() / f"{name}.yaml"
    if not path.is_file():
        raise ScenarioError(f"unknown preset {name!r}; valid names: {', '.join(preset_names())}")
    return yaml.safe_load(path.read_text())


def canned(name: str, overrides: list[str] | None = None) -> Scenario:
    """Load a preset by name, optionally applying key=value overrides."""
    raw = canned_raw(name)
    if overrides:
        raw = apply_overrides(raw, overrides)
    return parse_scenario(raw)
