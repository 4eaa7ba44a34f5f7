"""Configuration, CLI and scenario orchestration."""

from .cli import main, run_scenario
from .config import ConfigError, ScenarioConfig, load_config
from .csvout import write_csv

__all__ = ["main", "run_scenario", "ConfigError", "ScenarioConfig", "load_config", "write_csv"]


def recipe_path(name: str):
    """Path of a shipped scenario recipe (without the .toml suffix)."""
    from importlib import resources

    return resources.files(__package__) / "recipes" / f"{name}.toml"
