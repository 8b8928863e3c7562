"""Posterior-sampling bandit agents warm-started with offline preference data."""

from .agents import NaivePS, PerturbedLoss, TsofConfig, VanillaPS, WarmPrefPS, WarmTSOF
from .environment import ActionSet, Environment, GaussianPrior, RewardModel, build_action_set
from .errors import (
    ConfigurationError,
    DomainError,
    ExperimentError,
    NumericError,
    PrefBanditError,
    SolverError,
)
from .offline_data import OfflineDataset, PolicyKind, RaterCompetence, SamplingDistribution

__version__ = "0.1.0"

__all__ = [
    "ActionSet",
    "ConfigurationError",
    "DomainError",
    "Environment",
    "ExperimentError",
    "GaussianPrior",
    "NaivePS",
    "NumericError",
    "OfflineDataset",
    "PerturbedLoss",
    "PolicyKind",
    "PrefBanditError",
    "RaterCompetence",
    "RewardModel",
    "SamplingDistribution",
    "SolverError",
    "TsofConfig",
    "VanillaPS",
    "WarmPrefPS",
    "WarmTSOF",
    "build_action_set",
]
