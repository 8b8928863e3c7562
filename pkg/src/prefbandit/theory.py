"""Closed-form quantities: sample complexity, information sets, regret bounds.

Everything here is deterministic given its inputs except the Monte-Carlo
helpers, which take an explicit generator.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from .environment import ActionSet, GaussianPrior, sample_environment
from .errors import ConfigurationError, DomainError, NumericError
from .offline_data import (
    OfflineDataset,
    PolicyKind,
    RaterCompetence,
    SamplingDistribution,
    generate_dataset,
    sample_rater,
)


def std_normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def _log_odds_informative(eps: float) -> float:
    """ln(1/eps - 1)."""
    if not 0.0 < eps < 1.0:
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    return math.log1p(-eps) - math.log(eps)


def _prior_z(diff: np.ndarray, prior: GaussianPrior) -> float:
    var = float(diff @ prior.covariance @ diff)
    if not var > 0:
        raise DomainError("prior variance along the arm difference is zero")
    return float(diff @ prior.mean) / math.sqrt(var)


def _log_inv_cdf_minus_one(x: float) -> float:
    """ln(1/Phi(x) - 1) = ln Phi(-x) - ln Phi(x), stable in both tails."""
    return float(special.log_ndtr(-x) - special.log_ndtr(x))


def two_action_n0(a0, a1, prior: GaussianPrior, theta0, beta: float, eps: float) -> float:
    """Offline dataset size beyond which the better of two arms is identified w.p. 1 - eps.

    Signed; callers take the ceiling.
    """
    if not beta > 0:
        raise DomainError("beta must be positive")
    diff = np.asarray(a0, dtype=float) - np.asarray(a1, dtype=float)
    gap = float(diff @ np.asarray(theta0, dtype=float))
    if gap == 0.0:
        raise DomainError("non-identifiable pair: zero reward gap under theta0")
    x = _prior_z(diff, prior)
    return (_log_odds_informative(eps) + _log_inv_cdf_minus_one(x)) / (beta * gap)


def theorem1_n0(actions: ActionSet, prior: GaussianPrior, theta0, beta: float, eps: float, mu_min: float):
    """(N0, k_max) for a singleton information set over K >= 3 arms.

    k_max runs over ordered pairs with a strictly positive gap under theta0 and
    is floored at 1.
    """
    K = actions.K
    if K < 3:
        raise DomainError("need K >= 3 so that ln ln K is defined")
    if not beta > 0:
        raise DomainError("beta must be positive")
    if not 0.0 < mu_min < 1.0:
        raise DomainError("mu_min must lie in (0, 1)")
    if not 0.0 < eps < 1.0:
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    theta0 = np.asarray(theta0, dtype=float)
    head = math.log(2.0 * K * K / eps - 1.0)
    best = -math.inf
    found = False
    for i in range(K):
        for j in range(K):
            diff = actions[i] - actions[j]
            gap = float(diff @ theta0)
            if not gap > 0:
                continue
            found = True
            k_ij = (head + _log_inv_cdf_minus_one(_prior_z(diff, prior))) / (beta * gap)
            best = max(best, k_ij)
    if not found:
        raise DomainError("all pairwise gaps are zero under theta0")
    k_max = max(best, 1.0)
    n0 = (math.log(K) + (k_max - 1.0) * math.log(math.log(K))) / (mu_min**2 * eps)
    return n0, k_max


def two_action_posterior(
    d0: OfflineDataset,
    actions: ActionSet,
    pair: tuple[int, int],
    prior: GaussianPrior,
    beta: float,
    lam: float = math.inf,
    mc_samples: int = 20000,
    rng: np.random.Generator | None = None,
    theta0=None,
) -> float:
    """P(first arm of ``pair`` is optimal | d0) for a dataset over one pair of arms.

    With ``lam = inf`` the rater belief is pinned at ``theta0`` and the closed
    form odds exp(beta * n_eff * gap) * Phi(x) / (1 - Phi(x)) are used, where
    n_eff is wins of the first arm minus wins of the second. For finite
    ``lam`` the posterior is estimated by self-normalised Monte Carlo over
    (theta, vartheta) drawn from the prior with antithetic pairs.
    """
    i, j = pair
    if i == j:
        raise DomainError("pair must consist of two distinct arms")
    ok = ((d0.idx0 == i) & (d0.idx1 == j)) | ((d0.idx0 == j) & (d0.idx1 == i))
    if not np.all(ok):
        raise DomainError("dataset contains tuples outside the given pair")
    winners = d0.winners
    w = int(np.sum(winners == i))
    n = len(d0)
    diff = actions[i] - actions[j]
    if math.isinf(lam):
        if theta0 is None:
            raise ConfigurationError("exact-knowledge posterior needs theta0")
        x = _prior_z(diff, prior)
        gap = float(diff @ np.asarray(theta0, dtype=float))
        log_odds = beta * (2 * w - n) * gap + float(special.log_ndtr(x) - special.log_ndtr(-x))
        return float(special.expit(log_odds))
    if rng is None:
        raise ConfigurationError("Monte-Carlo posterior needs a random source")
    half = max(1, mc_samples // 2)
    z = rng.standard_normal((half, prior.dim))
    zv = rng.standard_normal((half, prior.dim))
    z = np.concatenate([z, -z])
    zv = np.concatenate([zv, -zv])
    theta = prior.mean + z @ prior.chol.T
    vartheta = theta + zv / lam
    g = beta * (vartheta @ diff)
    loglik = w * special.log_expit(g) + (n - w) * special.log_expit(-g)
    indicator = (theta @ diff) >= 0
    m = loglik.max()
    weights = np.exp(loglik - m)
    return float(weights[indicator].sum() / weights.sum())


@dataclass(frozen=True)
class InfoSet:
    member_indices: frozenset

    def __len__(self):
        return len(self.member_indices)

    def __contains__(self, k):
        return k in self.member_indices


def build_info_set(d0: OfflineDataset, K: int) -> InfoSet:
    """Arms that never lost a comparison (absent arms included).

    Self-comparisons carry no order information and are ignored.
    """
    distinct = d0.idx0 != d0.idx1
    lost = set(np.unique(d0.losers[distinct]).tolist())
    return InfoSet(frozenset(k for k in range(K) if k not in lost))


def build_winner_set(d0: OfflineDataset, K: int) -> InfoSet:
    """Arms preferred to a distinct arm at least once, plus arms never compared.

    This is the larger set that the (f1, f2) informativeness guarantee is
    stated for; ``build_info_set`` is always a subset of it.
    """
    distinct = d0.idx0 != d0.idx1
    won = set(np.unique(d0.winners[distinct]).tolist())
    seen = set(np.unique(np.concatenate([d0.idx0[distinct], d0.idx1[distinct]])).tolist())
    return InfoSet(frozenset(k for k in range(K) if k in won or k not in seen))


@dataclass(frozen=True)
class BoundConstants:
    delta: float
    alpha1: float
    alpha2: float
    f1_tilde: float
    f1: float
    f2: float
    f2_unclamped: float
    appendix_variant_f2: float


def bound_constants(N: int, K: int, T: int, beta: float, lam: float, d: int, mu_min: float) -> BoundConstants:
    if not beta > 0:
        raise DomainError("beta must be positive")
    if T * beta <= 1:
        raise DomainError("Tbeta<=1")
    if T < 2:
        raise DomainError("T must be >= 2")
    if not lam > 0:
        raise DomainError("lambda must be positive")
    if not 0.0 < mu_min < 1.0:
        raise DomainError("mu_min must lie in (0, 1)")
    delta = math.log(T * beta) / beta
    m = min(1.0, delta)
    alpha1 = K * m
    alpha2 = 0.0 if math.isinf(lam) else math.sqrt(2.0 * math.log(2.0 * math.sqrt(d) * T)) / lam
    log_first = N * float(special.log_expit(beta * (m + alpha2 - alpha1))) if N else 0.0
    f1_tilde = math.exp(log_first) + math.exp(2 * N * math.log1p(-mu_min))
    f1 = f1_tilde + 1.0 / T
    rate = N * K / (T * beta)
    f2_raw = alpha1**2 + rate * float(special.expit(beta * alpha2 - alpha1)) + 2.0 / T
    variant = K * min(1.0, delta**2 / 2.0) + rate * float(special.expit(beta * alpha2 - (K - 1) * m)) + 1.0 / T
    return BoundConstants(
        delta=delta,
        alpha1=alpha1,
        alpha2=alpha2,
        f1_tilde=f1_tilde,
        f1=f1,
        f2=min(f2_raw, float(K)),
        f2_unclamped=f2_raw,
        appendix_variant_f2=min(variant, float(K)),
    )


def general_ps_bound(expected_card: float, eps: float, K: int, T: int, C1: float) -> float:
    if expected_card < 1:
        raise DomainError("expected information-set size must be >= 1")
    if not 0.0 < eps < 1.0:
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    inner = T * expected_card * math.log(expected_card) + eps * math.log(K / eps)
    return math.sqrt(inner) + C1 * T * eps


def _warmpref_inner(c: BoundConstants, K: int) -> float:
    return math.log(c.f2) + c.f1 * math.log(K / c.f1)


def warmpref_bound(constants: BoundConstants, K: int, T: int) -> float:
    if K < 2:
        raise DomainError("K must be >= 2 (ln K vanishes at K = 1)")
    if not constants.f1 > 0:
        raise DomainError("f1 must be positive")
    inner = max(_warmpref_inner(constants, K), 0.0)
    main = math.sqrt(T * constants.f2 * inner)
    return main + 2.0 * math.sqrt(2.0 * math.log(K)) * T * (constants.f1_tilde + 1.0 / T)


def warmpref_bound_clamped(constants: BoundConstants, K: int) -> bool:
    """True when the entropy term had to be clamped at zero."""
    return _warmpref_inner(constants, K) < 0


_EXACT_BIT_BUDGET = 200_000


def coupon_all_prob(n: int, N: int) -> float:
    """Probability that N uniform draws from n items hit every item.

    Small cases are summed exactly in integers; larger ones fall back to a
    compensated float sum with a precision guard.
    """
    if n < 1 or N < 0:
        raise DomainError("need n >= 1 and N >= 0")
    if N * math.log2(max(n, 2)) <= _EXACT_BIT_BUDGET:
        num = sum((-1) ** i * math.comb(n, i) * (n - i) ** N for i in range(n + 1))
        return float(Fraction(num, n**N))
    i = np.arange(n)
    log_t = special.gammaln(n + 1) - special.gammaln(i + 1) - special.gammaln(n - i + 1) + N * np.log1p(-i / n)
    if log_t.max() > 700:
        raise NumericError(f"alternating sum for n={n}, N={N} overflows; use a Monte-Carlo estimate")
    terms = [(-1) ** k * math.exp(v) for k, v in enumerate(log_t)]
    raw = math.fsum(terms)
    biggest = max(abs(t) for t in terms)
    if biggest * np.finfo(float).eps * n > 1e-9 or not -1e-9 <= raw <= 1 + 1e-9:
        raise NumericError(
            f"alternating sum for n={n}, N={N} lost precision (raw={raw!r}); use a Monte-Carlo estimate"
        )
    return min(max(raw, 0.0), 1.0)


def expected_collection_time(weights) -> float:
    """E[max_i T_i] for independent exponential-clock collection with the given rates."""
    w = np.asarray(weights, dtype=float).reshape(-1)
    if w.size == 0 or np.any(w <= 0) or not np.all(np.isfinite(w)):
        raise DomainError("weights must be positive and finite")
    n = w.size
    w_min = float(w.min())
    X = math.log(n / (w_min * 1e-9)) / w_min

    def integrand(x):
        return -math.expm1(float(np.sum(np.log1p(-np.exp(-w * x))))) if x > 0 else 1.0

    breaks = sorted({min(X, k / r) for r in w for k in (1.0, 5.0)})
    value, _ = integrate.quad(integrand, 0.0, X, points=breaks[:-1] or None, limit=500, epsabs=1e-11, epsrel=1e-12)
    tail = float(np.sum(np.exp(-w * X) / w))
    return value + tail


def lemma_a2_n0(K: int, eps: float, mu_min: float, uniform: bool) -> float:
    """Offline size for a singleton information set with a noiseless, exact rater."""
    if K < 2:
        raise DomainError("K must be >= 2")
    if not 0.0 < eps < 1.0:
        raise DomainError("eps must lie in (0, 1)")
    if uniform:
        return K * K * math.log(K) / eps
    if not 0.0 < mu_min < 1.0:
        raise DomainError("mu_min must lie in (0, 1)")
    n_pairs = K * (K - 1) // 2
    harmonic = math.fsum(1.0 / k for k in range(1, n_pairs + 1))
    return harmonic / (mu_min**2 * eps)


def c1_heuristic(actions: ActionSet, prior: GaussianPrior) -> float:
    """Conservative reward-range constant: 2 max|a| (|mu0| + 3 sqrt(max eig Sigma0))."""
    amax = float(np.linalg.norm(actions.actions, axis=1).max())
    lam_max = float(np.linalg.eigvalsh(prior.covariance).max())
    return 2.0 * amax * (float(np.linalg.norm(prior.mean)) + 3.0 * math.sqrt(lam_max))


@dataclass
class InformativenessResult:
    empirical_miss_rate: float
    empirical_mean_card: float
    f1: float
    f2: float
    n_trials: int
    miss_slack: float
    card_slack: float

    @property
    def miss_ok(self) -> bool:
        return self.empirical_miss_rate <= self.f1 + self.miss_slack

    @property
    def card_ok(self) -> bool:
        return self.empirical_mean_card <= self.f2 + self.card_slack


def informativeness_check(
    actions: ActionSet,
    prior: GaussianPrior,
    competence: RaterCompetence,
    sampling: SamplingDistribution,
    N: int,
    T: int,
    n_trials: int,
    rng: np.random.Generator,
    kind: PolicyKind = PolicyKind.BRADLEY_TERRY,
) -> InformativenessResult:
    """Monte-Carlo frequency of A* outside the winner set, against f1 and f2.

    Slack is three binomial standard deviations (at the bound) for the miss
    rate and three standard errors for the mean cardinality.
    """
    if n_trials < 100:
        raise ConfigurationError("n_trials must be >= 100")
    K = actions.K
    misses = 0
    cards = np.empty(n_trials)
    for trial in range(n_trials):
        env = sample_environment(prior, actions, rng)
        rater = sample_rater(env, competence, kind, rng)
        d0 = generate_dataset(env, rater, sampling, N, rng, actions=actions)
        info = build_winner_set(d0, K)
        misses += env.optimal_index not in info
        cards[trial] = len(info)
    c = bound_constants(N, K, T, competence.beta, competence.lam if not competence.exact else math.inf,
                        actions.d, sampling.mu_min)
    p = min(max(c.f1, 0.0), 1.0)
    miss_slack = 3.0 * math.sqrt(p * (1 - p) / n_trials)
    card_slack = 3.0 * float(cards.std(ddof=1)) / math.sqrt(n_trials)
    return InformativenessResult(misses / n_trials, float(cards.mean()), c.f1, c.f2, n_trials, miss_slack, card_slack)


# -- report -----------------------------------------------------------------

REPORT_FIELDS = (
    "delta",
    "alpha1",
    "alpha2",
    "f1_tilde",
    "f1",
    "f2",
    "two_action_n0",
    "theorem1_n0",
    "k_max",
    "general_ps_bound",
    "warmpref_bound",
    "c1",
    "appendix_variant_f2",
)


@dataclass
class BoundReport:
    """Theory quantities for one configuration; failed entries hold ``"undefined: <reason>"``."""

    values: dict
    meta: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.values[key]

    def to_json(self) -> str:
        doc = {k: self.values[k] for k in REPORT_FIELDS}
        doc.update(self.meta)
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _attempt(fn):
    try:
        return fn()
    except (DomainError, NumericError) as exc:
        return f"undefined: {exc}"


def bound_report(
    actions: ActionSet,
    prior: GaussianPrior,
    theta0,
    N: int,
    T: int,
    beta: float,
    lam: float,
    mu_min: float,
    eps: float = 0.1,
    c1: float | None = None,
    theta0_source: str = "environment",
) -> BoundReport:
    K, d = actions.K, actions.d
    theta0 = np.asarray(theta0, dtype=float)
    order = np.argsort(-(actions.actions @ theta0), kind="stable")
    top, runner_up = int(order[0]), int(order[1])
    c1_value = c1_heuristic(actions, prior) if c1 is None else float(c1)

    v: dict = {}
    consts = _attempt(lambda: bound_constants(N, K, T, beta, lam, d, mu_min))
    for name in ("delta", "alpha1", "alpha2", "f1_tilde", "f1", "f2", "appendix_variant_f2"):
        v[name] = getattr(consts, name) if isinstance(consts, BoundConstants) else consts
    v["two_action_n0"] = _attempt(lambda: two_action_n0(actions[top], actions[runner_up], prior, theta0, beta, eps))
    thm1 = _attempt(lambda: theorem1_n0(actions, prior, theta0, beta, eps, mu_min))
    v["theorem1_n0"], v["k_max"] = thm1 if isinstance(thm1, tuple) else (thm1, thm1)
    v["c1"] = c1_value
    clamped = False
    if isinstance(consts, BoundConstants):
        v["general_ps_bound"] = _attempt(
            lambda: general_ps_bound(max(consts.f2, 1.0), min(consts.f1, 1 - 1e-12), K, T, c1_value)
        )
        v["warmpref_bound"] = _attempt(lambda: warmpref_bound(consts, K, T))
        clamped = _attempt(lambda: warmpref_bound_clamped(consts, K)) is True
    else:
        v["general_ps_bound"] = consts
        v["warmpref_bound"] = consts
    meta = {
        "K": K,
        "d": d,
        "N": N,
        "T": T,
        "beta": beta,
        "lambda": "inf" if math.isinf(lam) else lam,
        "mu_min": mu_min,
        "eps": eps,
        "theta0_source": theta0_source,
        "pair": [top, runner_up],
        "c1_heuristic": c1 is None,
        "warmpref_bound_clamped": clamped,
    }
    return BoundReport(v, meta)


__all__ = [
    "BoundConstants",
    "BoundReport",
    "InfoSet",
    "InformativenessResult",
    "REPORT_FIELDS",
    "bound_constants",
    "bound_report",
    "build_info_set",
    "build_winner_set",
    "c1_heuristic",
    "coupon_all_prob",
    "expected_collection_time",
    "general_ps_bound",
    "informativeness_check",
    "lemma_a2_n0",
    "std_normal_cdf",
    "theorem1_n0",
    "two_action_n0",
    "two_action_posterior",
    "warmpref_bound",
    "warmpref_bound_clamped",
]
