"""Scenario-driven Monte Carlo harness: configs, runners, reports, CLI."""

from .config import SCENARIO_KINDS, ConfigError, ScenarioConfig, default_config
from .parallel import map_replications, replication_stream
from .report import ExperimentReport, convergence_table, emit_report
from .scenarios import run_scenario

__all__ = [
    "SCENARIO_KINDS",
    "ConfigError",
    "ScenarioConfig",
    "default_config",
    "map_replications",
    "replication_stream",
    "ExperimentReport",
    "convergence_table",
    "emit_report",
    "run_scenario",
]
