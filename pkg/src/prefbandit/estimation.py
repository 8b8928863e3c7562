"""Estimating the rater's deliberateness from an offline preference dataset."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .agents import OnlineHistory, PerturbedLoss
from .environment import ActionSet, GaussianPrior
from .errors import ConfigurationError, DomainError
from .offline_data import OfflineDataset, dataset_entropy
from .optimizer import SolveSettings

DEFAULT_CLAMP = (1e-3, 1e3)
# stand-in for infinite knowledgeability in the MAP step
_EXACT_LAMBDA = 1e6
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class EstimationMethod(enum.Enum):
    MLE = "mle"
    ENTROPY = "entropy"


@dataclass(frozen=True)
class BetaEstimate:
    value: float
    method: EstimationMethod
    diagnostics: dict = field(default_factory=dict)


def _check_clamp(clamp) -> tuple[float, float]:
    lo, hi = (float(c) for c in clamp)
    if not 0 < lo < hi or not math.isfinite(hi):
        raise ConfigurationError(f"clamp must satisfy 0 < lo < hi < inf, got {clamp}")
    return lo, hi


def bt_negative_log_likelihood(beta: float, margins: np.ndarray, signs: np.ndarray) -> float:
    """Bradley-Terry NLL; ``margins`` are <a0 - a1, vartheta>, ``signs`` are 2y - 1."""
    return float(np.logaddexp(0.0, beta * signs * margins).sum())


def _golden_min(f, a: float, b: float, tol: float = 1e-10) -> float:
    """Minimize a unimodal ``f`` on [a, b]; ties move toward ``a``.

    Endpoints are compared too, so a monotone ``f`` returns an exact endpoint.
    """
    fa, fb = f(a), f(b)
    lo, hi = a, b
    c = hi - _GOLDEN * (hi - lo)
    d = lo + _GOLDEN * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > tol:
        if fc <= fd:
            hi, d, fd = d, c, fc
            c = hi - _GOLDEN * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _GOLDEN * (hi - lo)
            fd = f(d)
    best, fbest = (c, fc) if fc <= fd else (d, fd)
    for x, fx in ((b, fb), (a, fa)):
        if fx <= fbest:
            best, fbest = x, fx
    return best


def estimate_beta_mle(
    d0: OfflineDataset,
    actions: ActionSet,
    prior: GaussianPrior,
    lam: float,
    clamp=DEFAULT_CLAMP,
    settings: SolveSettings = SolveSettings(),
    max_rounds: int = 10,
    rel_tol: float = 0.01,
) -> BetaEstimate:
    """Profile-likelihood estimate of beta.

    Alternates a MAP solve for (theta, vartheta) at the current beta with a
    golden-section search over log beta of the Bradley-Terry likelihood at the
    current vartheta, until beta moves by less than ``rel_tol`` (relative).
    """
    if len(d0) == 0:
        raise DomainError("cannot estimate beta from an empty dataset")
    lo, hi = _check_clamp(clamp)
    lam_eff = _EXACT_LAMBDA if math.isinf(lam) else float(lam)
    diff = actions.actions[d0.idx0] - actions.actions[d0.idx1]
    signs = (2 * d0.y - 1).astype(float)
    history = OnlineHistory(actions.d)
    beta = min(max(1.0, lo), hi)
    start = None
    rounds = 0
    for rounds in range(1, max_rounds + 1):
        loss = PerturbedLoss(history, d0, actions, beta, lam_eff, prior)
        start, _ = loss.solve(start, settings)
        margins = diff @ start.vartheta_hat
        log_lo, log_hi = math.log(lo), math.log(hi)
        log_beta = _golden_min(lambda lb: bt_negative_log_likelihood(math.exp(lb), margins, signs), log_lo, log_hi)
        # endpoints map back exactly so a binding clamp reports lo/hi verbatim
        new_beta = {log_lo: lo, log_hi: hi}.get(log_beta) or min(max(math.exp(log_beta), lo), hi)
        moved = abs(new_beta - beta) / beta
        beta = new_beta
        if moved < rel_tol:
            break
    margins = diff @ start.vartheta_hat
    return BetaEstimate(
        beta,
        EstimationMethod.MLE,
        {"log_likelihood": -bt_negative_log_likelihood(beta, margins, signs), "rounds": rounds},
    )


def estimate_beta_entropy(
    d0: OfflineDataset,
    K: int,
    c: float | None = None,
    clamp=DEFAULT_CLAMP,
    over: str = "winners",
) -> BetaEstimate:
    """beta = c / H(D0), with c defaulting to ln K and H guarded below by 1e-6."""
    if len(d0) == 0:
        raise DomainError("cannot estimate beta from an empty dataset")
    lo, hi = _check_clamp(clamp)
    if c is None:
        c = math.log(K)
    if not c > 0:
        raise ConfigurationError(f"c must be positive, got {c}")
    h = dataset_entropy(d0, K, over)
    value = min(max(c / max(h, 1e-6), lo), hi)
    return BetaEstimate(value, EstimationMethod.ENTROPY, {"entropy": h, "c": float(c)})


__all__ = [
    "BetaEstimate",
    "DEFAULT_CLAMP",
    "EstimationMethod",
    "bt_negative_log_likelihood",
    "estimate_beta_entropy",
    "estimate_beta_mle",
]
