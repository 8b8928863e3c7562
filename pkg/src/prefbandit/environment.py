"""Linear bandit instance: arms, environment parameter, rewards, regret."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, NumericError


def _leading_minor_failure(cov: np.ndarray) -> int | None:
    """Size of the first leading minor that is not positive definite."""
    for k in range(1, cov.shape[0] + 1):
        try:
            np.linalg.cholesky(cov[:k, :k])
        except np.linalg.LinAlgError:
            return k
    return None


@dataclass(frozen=True, eq=False)
class GaussianPrior:
    """Uninformed Gaussian prior N(mean, covariance) over the environment parameter."""

    mean: np.ndarray
    covariance: np.ndarray
    chol: np.ndarray = field(init=False, repr=False)
    precision: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float).reshape(-1)
        cov = np.atleast_2d(np.asarray(self.covariance, dtype=float))
        d = mean.shape[0]
        if cov.shape != (d, d):
            raise NumericError(f"covariance shape {cov.shape} does not match mean length {d}")
        if not np.all(np.isfinite(mean)) or not np.all(np.isfinite(cov)):
            raise NumericError("prior mean and covariance must be finite")
        if not np.allclose(cov, cov.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(cov).max())):
            raise NumericError("prior covariance is not symmetric")
        try:
            chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError:
            k = _leading_minor_failure(cov)
            raise NumericError(
                f"prior covariance is not positive definite: leading minor of order {k} fails"
            ) from None
        eye = np.eye(d)
        chol_inv = np.linalg.solve(chol, eye)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)
        object.__setattr__(self, "chol", chol)
        object.__setattr__(self, "precision", chol_inv.T @ chol_inv)

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    @classmethod
    def standard(cls, d: int) -> "GaussianPrior":
        return cls(np.zeros(d), np.eye(d))

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        return self.mean + self.chol @ rng.standard_normal(self.dim)


@dataclass(frozen=True, eq=False)
class ActionSet:
    """K arms in R^d, globally scaled so every pairwise L1 distance is at most 1."""

    actions: np.ndarray
    correlation_target: float = 0.0

    def __post_init__(self):
        arr = np.atleast_2d(np.asarray(self.actions, dtype=float))
        if arr.shape[0] < 2:
            raise ConfigurationError(f"need at least 2 actions, got {arr.shape[0]}")
        if not np.all(np.isfinite(arr)):
            raise ConfigurationError("actions must be finite")
        object.__setattr__(self, "actions", arr)

    @property
    def K(self) -> int:
        return self.actions.shape[0]

    @property
    def d(self) -> int:
        return self.actions.shape[1]

    def __len__(self):
        return self.K

    def __getitem__(self, k):
        return self.actions[k]

    def max_l1_distance(self) -> float:
        diffs = self.actions[:, None, :] - self.actions[None, :, :]
        return float(np.abs(diffs).sum(axis=-1).max())


@dataclass(frozen=True, eq=False)
class Environment:
    theta: np.ndarray
    optimal_index: int
    optimal_value: float

    @classmethod
    def from_theta(cls, theta, actions: ActionSet) -> "Environment":
        theta = np.asarray(theta, dtype=float).reshape(-1)
        if theta.shape[0] != actions.d:
            raise NumericError(f"theta has length {theta.shape[0]}, actions have d={actions.d}")
        values = actions.actions @ theta
        k = int(np.argmax(values))  # first maximum: lowest-index tie-break
        return cls(theta, k, float(values[k]))


@dataclass(frozen=True)
class RewardModel:
    noise_std: float = 1.0

    def __post_init__(self):
        if not self.noise_std > 0:
            raise ConfigurationError(f"noise_std must be positive, got {self.noise_std}")


def build_action_set(K: int, d: int, rho: float, rng: np.random.Generator) -> ActionSet:
    """Draw K arms whose expected pairwise cosine similarity is ``rho``.

    Each arm is ``r_k * (sqrt(rho) u + sqrt(1 - rho) v_k)`` with a shared unit
    direction ``u``, independent unit directions ``v_k`` orthogonal to ``u`` and
    radii ``r_k`` distributed as the norm of a standard normal vector. For d = 1
    there is no orthogonal complement and the arms are plain standard normals.
    The set is then rescaled so its largest pairwise L1 distance equals 1.
    """
    if int(K) != K or K < 2:
        raise ConfigurationError(f"K must be an integer >= 2, got {K}")
    if int(d) != d or d < 1:
        raise ConfigurationError(f"d must be an integer >= 1, got {d}")
    if not 0.0 <= rho < 1.0:
        raise ConfigurationError(f"rho must lie in [0, 1), got {rho}")
    K, d = int(K), int(d)
    if d == 1:
        arms = rng.standard_normal((K, 1))
    else:
        u = rng.standard_normal(d)
        u /= np.linalg.norm(u)
        w = rng.standard_normal((K, d))
        w -= np.outer(w @ u, u)
        v = w / np.linalg.norm(w, axis=1, keepdims=True)
        radii = np.linalg.norm(rng.standard_normal((K, d)), axis=1)
        arms = radii[:, None] * (np.sqrt(rho) * u[None, :] + np.sqrt(1.0 - rho) * v)
    span = np.abs(arms[:, None, :] - arms[None, :, :]).sum(axis=-1).max()
    if span > 0:
        arms = arms / span
    return ActionSet(arms, float(rho))


def sample_environment(prior: GaussianPrior, actions: ActionSet, rng: np.random.Generator) -> Environment:
    if prior.dim != actions.d:
        raise NumericError(f"prior dimension {prior.dim} does not match action dimension {actions.d}")
    return Environment.from_theta(prior.sample(rng), actions)


def reward(env: Environment, action, model: RewardModel, rng: np.random.Generator) -> float:
    action = np.asarray(action, dtype=float).reshape(-1)
    if action.shape[0] != env.theta.shape[0]:
        raise NumericError(f"action has length {action.shape[0]}, expected {env.theta.shape[0]}")
    return float(action @ env.theta + model.noise_std * rng.standard_normal())


def instant_regret(env: Environment, action) -> float:
    """Noise-free gap between the optimal arm and ``action``."""
    gap = env.optimal_value - float(np.asarray(action, dtype=float) @ env.theta)
    return max(gap, 0.0)


def arm_gaps(env: Environment, actions: ActionSet) -> np.ndarray:
    """Per-arm instant regret, computed on the same path as ``optimal_value``."""
    gaps = env.optimal_value - actions.actions @ env.theta
    return np.maximum(gaps, 0.0)
