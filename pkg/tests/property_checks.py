"""Simulation-free checks shared by the property tests and the acceptance suite.

Each function raises AssertionError on failure.
"""

import itertools
import math

import numpy as np

from prefbandit.agents import OnlineHistory, PerturbationSet, PerturbedLoss, VanillaPS
from prefbandit.environment import ActionSet, Environment, GaussianPrior, build_action_set
from prefbandit.offline_data import (
    OfflineDataset,
    RaterCompetence,
    SamplingDistribution,
    preference_prob,
    sample_rater,
)
from prefbandit.optimizer import check_gradient
from prefbandit.theory import (
    build_info_set,
    coupon_all_prob,
    expected_collection_time,
    informativeness_check,
    two_action_n0,
    two_action_posterior,
)


def random_loss(rng, d=3, K=5, n_hist=6, N=8):
    acts = build_action_set(K, d, float(rng.uniform(0, 0.9)), rng)
    m = rng.standard_normal((d, d))
    prior = GaussianPrior(rng.standard_normal(d), m @ m.T + np.eye(d))
    hist = OnlineHistory.from_arrays(acts.actions[rng.integers(0, K, n_hist)], rng.standard_normal(n_hist))
    d0 = OfflineDataset(rng.integers(0, K, N), rng.integers(0, K, N), rng.integers(0, 2, N))
    pert = PerturbationSet(
        rng.standard_normal(n_hist), rng.integers(0, 2, N).astype(float), rng.standard_normal(d), rng.standard_normal(d)
    )
    beta, lam = float(rng.uniform(0, 20)), float(rng.uniform(0.1, 10))
    return PerturbedLoss(hist, d0, acts, beta, lam, prior, pert)


def gradient_vs_finite_differences(n_points=100, seed=0):
    rng = np.random.default_rng(seed)
    for _ in range(n_points):
        d = 3
        loss = random_loss(rng, d)
        f = lambda x: loss.value(x[:d], x[d:])  # noqa: E731
        g = lambda x: np.concatenate(loss.gradient(x[:d], x[d:]))  # noqa: E731
        x = rng.standard_normal(2 * d)
        assert check_gradient(f, g, x, h=1e-5) <= 1e-5


def convexity_on_triples(n_triples=1000, seed=1):
    rng = np.random.default_rng(seed)
    loss = None
    for k in range(n_triples):
        if k % 50 == 0:
            loss = random_loss(rng)
        x, y = rng.normal(0, 3, 6), rng.normal(0, 3, 6)
        t = rng.uniform()
        mid = loss.value_u(t * x + (1 - t) * y)
        chord = t * loss.value_u(x) + (1 - t) * loss.value_u(y)
        assert mid <= chord + 1e-9 * max(1.0, abs(chord))


def conjugate_vs_batch(seed=2):
    rng = np.random.default_rng(seed)
    d, sigma, n = 4, 0.7, 50
    m = rng.standard_normal((d, d))
    prior = GaussianPrior(rng.standard_normal(d), m @ m.T + np.eye(d))
    agent = VanillaPS(ActionSet(rng.standard_normal((3, d))), prior, sigma)
    A, R = rng.standard_normal((n, d)), rng.standard_normal(n)
    for t in range(n):
        agent.update(A[t], R[t])
    prec = prior.precision + A.T @ A / sigma**2
    mean = np.linalg.solve(prec, prior.precision @ prior.mean + A.T @ R / sigma**2)
    assert np.linalg.norm(agent.state.mean - mean) <= 1e-10 * max(1.0, np.linalg.norm(mean))


def bradley_terry_frequency(seed=3, n=10_000):
    rng = np.random.default_rng(seed)
    acts = ActionSet(np.array([[0.2, 0.1], [0.0, 0.3]]))
    env = Environment.from_theta(np.array([1.0, 0.5]), acts)
    rater = sample_rater(env, RaterCompetence(3.0, exact=True))
    p0 = preference_prob(acts[0], acts[1], rater.vartheta, 3.0)
    wins = sum(rater.prefer(acts[0], acts[1], rng) == 0 for _ in range(n))
    assert abs(wins / n - p0) <= 3 * math.sqrt(p0 * (1 - p0) / n)


def coupon_enumeration():
    for n in range(1, 5):
        for N in range(0, 9):
            hits = sum(1 for draw in itertools.product(range(n), repeat=N) if len(set(draw)) == n)
            assert abs(coupon_all_prob(n, N) - hits / n**N) <= 1e-15


def uniform_collection_time():
    assert abs(expected_collection_time([0.2] * 5) - 5 * sum(1 / k for k in range(1, 6))) <= 1e-4


def info_set_hand_cases():
    assert build_info_set(OfflineDataset.empty(), 4).member_indices == {0, 1, 2, 3}
    assert build_info_set(OfflineDataset.from_tuples([(0, 1, 0)]), 3).member_indices == {0, 2}
    chain = OfflineDataset.from_tuples([(0, 1, 0), (1, 2, 0), (2, 3, 1)])
    assert build_info_set(chain, 5).member_indices == {0, 3, 4}
    assert build_info_set(OfflineDataset.from_tuples([(1, 1, 0)]), 2).member_indices == {0, 1}


def informativeness_default(n_trials=1000, seed=4):
    actions = build_action_set(10, 4, 0.0, np.random.default_rng(seed))
    res = informativeness_check(actions, GaussianPrior.standard(4), RaterCompetence(10.0, 100.0),
                                SamplingDistribution.uniform(10), 20, 300, n_trials, np.random.default_rng(seed + 1))
    assert res.miss_ok, res
    assert res.card_ok, res


def posterior_sample_complexity(n_draws=50, seed=5):
    rng = np.random.default_rng(seed)
    for _ in range(n_draws):
        d = int(rng.integers(1, 4))
        a0, a1, theta0 = rng.normal(size=d), rng.normal(size=d), rng.normal(size=d)
        if (a0 - a1) @ theta0 < 0:
            a0, a1 = a1, a0
        m = rng.normal(size=(d, d))
        prior = GaussianPrior(rng.normal(size=d), m @ m.T + 0.1 * np.eye(d))
        beta, eps = float(rng.uniform(0.5, 20)), float(rng.uniform(0.01, 0.5))
        n = max(0, math.ceil(two_action_n0(a0, a1, prior, theta0, beta, eps)))
        d0 = OfflineDataset.from_tuples([(0, 1, 0)] * n)
        p = two_action_posterior(d0, ActionSet(np.array([a0, a1])), (0, 1), prior, beta, math.inf, theta0=theta0)
        assert p >= 1 - eps - 1e-12


ALL_CHECKS = {
    "gradient vs finite differences (100 points)": gradient_vs_finite_differences,
    "convexity (1000 triples)": convexity_on_triples,
    "conjugate update vs batch": conjugate_vs_batch,
    "Bradley-Terry frequency (1e4 samples)": bradley_terry_frequency,
    "coupon probability vs enumeration": coupon_enumeration,
    "uniform collection time = 5 H_5": uniform_collection_time,
    "information set hand cases": info_set_hand_cases,
    "informativeness at default config (1e3 trials)": informativeness_default,
    "posterior reaches 1-eps at sample complexity (50 draws)": posterior_sample_complexity,
}
