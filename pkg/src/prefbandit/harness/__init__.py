"""Experiment orchestration: configuration, runs, sweeps and reports."""

from .config import AGENT_NAMES, ExperimentConfig, load_config, parse_config, serialize_config
from .experiments import (
    RegretCurve,
    SweepSpec,
    pooled_std,
    run_action_space_study,
    run_experiment,
    run_seeds,
    run_sweep,
    write_regret_csvs,
)
from .report import config_informativeness, emit_theory_report

__all__ = [
    "AGENT_NAMES",
    "ExperimentConfig",
    "RegretCurve",
    "SweepSpec",
    "config_informativeness",
    "emit_theory_report",
    "load_config",
    "parse_config",
    "pooled_std",
    "run_action_space_study",
    "run_experiment",
    "run_seeds",
    "run_sweep",
    "serialize_config",
    "write_regret_csvs",
]
