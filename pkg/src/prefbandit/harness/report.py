"""Theory reports and informativeness diagnostics for a configuration."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..environment import build_action_set, sample_environment
from ..offline_data import RaterCompetence
from ..streams import substream
from ..theory import BoundReport, InformativenessResult, bound_report, informativeness_check
from .config import ExperimentConfig


def emit_theory_report(config: ExperimentConfig, path=None) -> BoundReport:
    """Bound quantities for the instance drawn at ``base_seed``.

    ``theory_theta0`` selects whether the sample-complexity formulas use that
    environment draw or the prior mean.
    """
    rng = substream(config.base_seed, "env")
    actions = build_action_set(config.K, config.d, config.rho, rng)
    prior = config.prior()
    env = sample_environment(prior, actions, rng)
    theta0 = env.theta if config.theory_theta0 == "environment" else prior.mean
    report = bound_report(
        actions,
        prior,
        theta0,
        N=config.N,
        T=config.T,
        beta=config.true_beta,
        lam=config.true_lambda,
        mu_min=config.sampling_distribution().mu_min,
        eps=config.theory_eps,
        c1=config.c1,
        theta0_source=config.theory_theta0,
    )
    if path is not None:
        Path(path).write_text(report.to_json(), encoding="utf-8", newline="\n")
    return report


def config_informativeness(
    config: ExperimentConfig, n_trials: int, rng: np.random.Generator
) -> InformativenessResult:
    actions = build_action_set(config.K, config.d, config.rho, substream(config.base_seed, "env"))
    return informativeness_check(
        actions,
        config.prior(),
        RaterCompetence(config.true_beta, config.true_lambda),
        config.sampling_distribution(),
        config.N,
        config.T,
        n_trials,
        rng,
        config.policy,
    )


__all__ = ["config_informativeness", "emit_theory_report"]
