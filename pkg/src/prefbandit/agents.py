"""Posterior-sampling agents and the perturbed surrogate loss they minimize.

The warm-started agents keep the offline preference dataset and the online
history, and at every round draw a fresh set of perturbations, solve for the
MAP of (theta, vartheta) under the perturbed loss and play the greedy arm under
the resulting theta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .environment import ActionSet, Environment, GaussianPrior, RewardModel, reward
from .errors import ConfigurationError, NumericError, SolverError
from .offline_data import OfflineDataset, PreferenceTuple, Rater
from .optimizer import SolveReport, SolveSettings, minimize


class OnlineHistory:
    """Append-only record of (action vector, reward) pairs."""

    def __init__(self, d: int, capacity: int = 64):
        self.d = d
        self._A = np.empty((capacity, d))
        self._R = np.empty(capacity)
        self._n = 0

    def append(self, action, r: float) -> None:
        if self._n == self._A.shape[0]:
            self._A = np.concatenate([self._A, np.empty_like(self._A)])
            self._R = np.concatenate([self._R, np.empty_like(self._R)])
        self._A[self._n] = action
        self._R[self._n] = r
        self._n += 1

    def __len__(self):
        return self._n

    @property
    def actions(self) -> np.ndarray:
        return self._A[: self._n]

    @property
    def rewards(self) -> np.ndarray:
        return self._R[: self._n]

    @property
    def steps(self) -> list[tuple[np.ndarray, float]]:
        return [(self._A[i].copy(), float(self._R[i])) for i in range(self._n)]

    @classmethod
    def from_arrays(cls, actions, rewards) -> "OnlineHistory":
        actions = np.atleast_2d(np.asarray(actions, dtype=float))
        h = cls(actions.shape[1], max(1, len(rewards)))
        for a, r in zip(actions, rewards):
            h.append(a, r)
        return h


@dataclass(eq=False)
class PerturbationSet:
    zeta: np.ndarray
    omega: np.ndarray
    theta_prime: np.ndarray
    vartheta_prime: np.ndarray

    @classmethod
    def zero(cls, n_history: int, N: int, d: int) -> "PerturbationSet":
        return cls(np.zeros(n_history), np.ones(N), np.zeros(d), np.zeros(d))

    def with_omega(self, bit: float) -> "PerturbationSet":
        return replace(self, omega=np.append(self.omega, float(bit)))


@dataclass(frozen=True, eq=False)
class MapEstimate:
    theta_hat: np.ndarray
    vartheta_hat: np.ndarray
    final_gradient_norm: float
    iterations: int


@dataclass
class ConjugateState:
    precision: np.ndarray
    shift: np.ndarray

    @property
    def mean(self) -> np.ndarray:
        return np.linalg.solve(self.precision, self.shift)

    @property
    def covariance(self) -> np.ndarray:
        return np.linalg.inv(self.precision)


@dataclass(frozen=True)
class Constant:
    eps: float

    def __post_init__(self):
        if not self.eps >= 0:
            raise ConfigurationError("constant epsilon must be >= 0")


@dataclass(frozen=True)
class InverseSqrt:
    c0: float

    def __post_init__(self):
        if not self.c0 > 0:
            raise ConfigurationError("inverse-sqrt scale must be positive")


@dataclass(frozen=True)
class TsofConfig:
    cost: float = 0.0
    epsilon_rule: Constant | InverseSqrt = field(default_factory=lambda: Constant(0.1))

    def __post_init__(self):
        if not self.cost >= 0:
            raise ConfigurationError("feedback cost must be >= 0")


def get_epsilon(cfg: TsofConfig, t: int) -> float:
    if t < 1:
        raise ConfigurationError("round index starts at 1")
    rule = cfg.epsilon_rule
    if isinstance(rule, Constant):
        return rule.eps
    return rule.c0 / math.sqrt(t)


# -- surrogate loss ---------------------------------------------------------


class PerturbedLoss:
    """Perturbed surrogate loss over (theta, vartheta) for fixed data.

    The loss is the sum of the online squared error (rewards shifted by
    ``zeta``), the omega-weighted negative Bradley-Terry log-likelihood of the
    offline tuples, the lambda^2/2 coupling between theta and vartheta shifted
    by ``vartheta'``, and the Gaussian prior term shifted by ``theta'``.
    """

    def __init__(
        self,
        history: OnlineHistory,
        d0: OfflineDataset,
        actions: ActionSet,
        beta: float,
        lam: float,
        prior: GaussianPrior,
        perturb: PerturbationSet | None = None,
    ):
        d = prior.dim
        if actions.d != d:
            raise NumericError(f"action dimension {actions.d} does not match prior dimension {d}")
        if history.d != d:
            raise NumericError(f"history dimension {history.d} does not match prior dimension {d}")
        if not beta >= 0:
            raise ConfigurationError("beta must be >= 0")
        if not (lam > 0 and math.isfinite(lam)):
            raise ConfigurationError("agent lambda must be positive and finite")
        if d0.max_index() >= actions.K:
            raise NumericError("dataset refers to arms outside the action set")
        if perturb is None:
            perturb = PerturbationSet.zero(len(history), len(d0), d)
        if perturb.zeta.shape != (len(history),):
            raise NumericError(f"zeta has length {perturb.zeta.shape[0]}, history has {len(history)}")
        if perturb.omega.shape != (len(d0),):
            raise NumericError(f"omega has length {perturb.omega.shape[0]}, dataset has {len(d0)}")
        if perturb.theta_prime.shape != (d,) or perturb.vartheta_prime.shape != (d,):
            raise NumericError("prior perturbations must have length d")
        self.d = d
        self.A = history.actions
        self.r = history.rewards + perturb.zeta
        self.G = self.A.T @ self.A
        self.b = self.A.T @ self.r
        self.beta = float(beta)
        self.lam2 = float(lam) ** 2
        self.diff = actions.actions[d0.idx0] - actions.actions[d0.idx1]
        self.sign = (2 * d0.y - 1).astype(float)
        self.omega = np.asarray(perturb.omega, dtype=float)
        self.mu0 = prior.mean
        self.P = prior.precision
        self.theta_prime = perturb.theta_prime
        self.vartheta_prime = perturb.vartheta_prime
        self._eye = np.eye(d)

    # parts shared by both parameterizations
    def _offline(self, vartheta, order: int):
        m = self.beta * (self.diff @ vartheta)
        s = self.sign * m
        value = float(self.omega @ np.logaddexp(0.0, s))
        if order == 0:
            return value, None, None
        sig = _sigmoid(s)
        grad = self.beta * ((self.omega * sig * self.sign) @ self.diff)
        if order == 1:
            return value, grad, None
        w = self.omega * sig * (1.0 - sig) * self.beta**2
        hess = (self.diff * w[:, None]).T @ self.diff
        return value, grad, hess

    def _value(self, theta, u):
        res = self.r - self.A @ theta
        e = theta - self.mu0 - self.theta_prime
        c = u + self.vartheta_prime
        l2, _, _ = self._offline(theta - u, 0)
        return 0.5 * float(res @ res) + l2 + 0.5 * self.lam2 * float(c @ c) + 0.5 * float(e @ self.P @ e)

    def _grad_pair(self, theta, u):
        """Gradient in (theta, vartheta) coordinates evaluated from (theta, u)."""
        _, g2, _ = self._offline(theta - u, 1)
        coupling = self.lam2 * (u + self.vartheta_prime)
        g_theta = self.G @ theta - self.b + coupling + self.P @ (theta - self.mu0 - self.theta_prime)
        g_vartheta = g2 - coupling
        return g_theta, g_vartheta

    # (theta, vartheta) interface
    def value(self, theta, vartheta) -> float:
        theta = np.asarray(theta, dtype=float)
        return self._value(theta, theta - np.asarray(vartheta, dtype=float))

    def gradient(self, theta, vartheta):
        theta = np.asarray(theta, dtype=float)
        return self._grad_pair(theta, theta - np.asarray(vartheta, dtype=float))

    def hessian(self, theta, vartheta) -> np.ndarray:
        _, _, h2 = self._offline(np.asarray(vartheta, dtype=float), 2)
        d, lam2, eye = self.d, self.lam2, self._eye
        H = np.empty((2 * d, 2 * d))
        H[:d, :d] = self.G + lam2 * eye + self.P
        H[:d, d:] = -lam2 * eye
        H[d:, :d] = -lam2 * eye
        H[d:, d:] = lam2 * eye + h2
        return H

    # (theta, u = theta - vartheta) interface used by the solver
    def value_u(self, x) -> float:
        return self._value(x[: self.d], x[self.d :])

    def gradient_u(self, x) -> np.ndarray:
        g_theta, g_vartheta = self._grad_pair(x[: self.d], x[self.d :])
        return np.concatenate([g_theta + g_vartheta, -g_vartheta])

    def hessian_u(self, x) -> np.ndarray:
        d = self.d
        theta, u = x[:d], x[d:]
        _, _, h2 = self._offline(theta - u, 2)
        H = np.empty((2 * d, 2 * d))
        H[:d, :d] = self.G + self.P + h2
        H[:d, d:] = -h2
        H[d:, :d] = -h2
        H[d:, d:] = self.lam2 * self._eye + h2
        return H

    def solve(self, start: MapEstimate | None, settings: SolveSettings) -> tuple[MapEstimate, SolveReport]:
        """MAP estimate; raises SolverError when the tolerance is not reached."""
        d = self.d
        if start is None:
            x0 = np.concatenate([self.mu0, np.zeros(d)])
        else:
            x0 = np.concatenate([start.theta_hat, start.theta_hat - start.vartheta_hat])
        # gradient norms in the two coordinate systems differ by at most sqrt(3)
        inner = replace(settings, grad_tolerance=settings.grad_tolerance / 2.0)
        x, report = minimize(self.value_u, self.gradient_u, x0, inner, hessian=self.hessian_u)
        theta, u = x[:d], x[d:]
        g_theta, g_vartheta = self._grad_pair(theta, u)
        gnorm = float(np.sqrt(g_theta @ g_theta + g_vartheta @ g_vartheta))
        est = MapEstimate(theta.copy(), theta - u, gnorm, report.iterations)
        if not report.converged or gnorm > settings.grad_tolerance:
            raise SolverError(
                f"MAP solve stopped after {report.iterations} iterations with gradient norm {gnorm:.3e} "
                f"(tolerance {settings.grad_tolerance:.1e}, stalled={report.stalled})",
                report,
            )
        return est, report


def _sigmoid(x):
    out = np.empty_like(x, dtype=float)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def surrogate_loss(theta, vartheta, history, d0, beta, lam, prior, actions) -> float:
    """Unperturbed MAP objective for (theta, vartheta)."""
    return PerturbedLoss(history, d0, actions, beta, lam, prior).value(theta, vartheta)


def perturbed_loss(theta, vartheta, history, d0, perturb, beta, lam, prior, actions) -> float:
    return PerturbedLoss(history, d0, actions, beta, lam, prior, perturb).value(theta, vartheta)


def loss_gradient(theta, vartheta, history, d0, perturb, beta, lam, prior, actions):
    """(d/dtheta, d/dvartheta) of the perturbed loss."""
    return PerturbedLoss(history, d0, actions, beta, lam, prior, perturb).gradient(theta, vartheta)


def sample_perturbations(t: int, N: int, lam: float, prior: GaussianPrior, rng: np.random.Generator) -> PerturbationSet:
    """Fresh perturbations for round ``t`` (``t - 1`` online steps so far)."""
    if t < 1:
        raise ConfigurationError("round index starts at 1")
    zeta = rng.standard_normal(t - 1)
    omega = rng.integers(0, 2, size=N).astype(float)
    theta_prime = prior.sample(rng)
    vartheta_prime = prior.mean + rng.standard_normal(prior.dim) / lam
    return PerturbationSet(zeta, omega, theta_prime, vartheta_prime)


# -- agents -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class StepResult:
    index: int
    reward: float
    cost: float = 0.0
    estimate: MapEstimate | None = None
    queried: bool = False
    feedback: PreferenceTuple | None = None


def _greedy(actions: ActionSet, theta) -> int:
    return int(np.argmax(actions.actions @ theta))


class VanillaPS:
    """Gaussian-linear Thompson sampling that ignores the offline data."""

    name = "vanilla_ps"

    def __init__(self, actions: ActionSet, prior: GaussianPrior, noise_std: float = 1.0):
        self.actions = actions
        self.prior = prior
        self.noise_var = float(noise_std) ** 2
        self.state = ConjugateState(prior.precision.copy(), prior.precision @ prior.mean)

    def sample_theta(self, rng: np.random.Generator) -> np.ndarray:
        chol = np.linalg.cholesky(self.state.precision)
        mean = np.linalg.solve(self.state.precision, self.state.shift)
        # precision = L L^T, so L^{-T} z has covariance precision^{-1}
        return mean + np.linalg.solve(chol.T, rng.standard_normal(self.prior.dim))

    def update(self, action, r: float) -> None:
        action = np.asarray(action, dtype=float)
        self.state.precision += np.outer(action, action) / self.noise_var
        self.state.shift += action * r / self.noise_var

    def step(self, env: Environment, model: RewardModel, rng: np.random.Generator) -> StepResult:
        k = _greedy(self.actions, self.sample_theta(rng))
        a = self.actions[k]
        r = reward(env, a, model, rng)
        self.update(a, r)
        return StepResult(k, r)


class WarmPrefPS:
    """Bootstrapped warm-started posterior sampling over (theta, vartheta)."""

    name = "warmpref_ps"

    def __init__(
        self,
        actions: ActionSet,
        prior: GaussianPrior,
        dataset: OfflineDataset,
        beta: float,
        lam: float,
        settings: SolveSettings = SolveSettings(),
    ):
        if dataset.max_index() >= actions.K:
            raise ConfigurationError("dataset refers to arms outside the action set")
        self.actions = actions
        self.prior = prior
        self.dataset = dataset
        self.beta = float(beta)
        self.lam = float(lam)
        self.settings = settings
        self.history = OnlineHistory(actions.d)
        self.last: MapEstimate | None = None
        PerturbedLoss(self.history, dataset, actions, self.beta, self.lam, prior)  # validates inputs

    @property
    def t(self) -> int:
        """Index of the next round (1-based)."""
        return len(self.history) + 1

    def _solve(self, perturb: PerturbationSet) -> MapEstimate:
        loss = PerturbedLoss(self.history, self.dataset, self.actions, self.beta, self.lam, self.prior, perturb)
        est, _ = loss.solve(self.last, self.settings)
        self.last = est
        return est

    def perturbations(self, rng: np.random.Generator) -> PerturbationSet:
        return sample_perturbations(self.t, len(self.dataset), self.lam, self.prior, rng)

    def step(self, env: Environment, model: RewardModel, rng: np.random.Generator) -> StepResult:
        est = self._solve(self.perturbations(rng))
        k = _greedy(self.actions, est.theta_hat)
        a = self.actions[k]
        r = reward(env, a, model, rng)
        self.history.append(a, r)
        return StepResult(k, r, 0.0, est)


class NaivePS(WarmPrefPS):
    """The warm-started agent with deliberateness forced to zero."""

    name = "naive_ps"

    def __init__(self, actions, prior, dataset, beta=0.0, lam=1.0, settings=SolveSettings()):
        super().__init__(actions, prior, dataset, 0.0, lam, settings)


class WarmTSOF(WarmPrefPS):
    """Warm-started agent that may buy a preference between its top two arms."""

    name = "warmtsof"

    def __init__(
        self,
        actions: ActionSet,
        prior: GaussianPrior,
        dataset: OfflineDataset,
        beta: float,
        lam: float,
        rater: Rater,
        cfg: TsofConfig = TsofConfig(),
        settings: SolveSettings = SolveSettings(),
    ):
        super().__init__(actions, prior, dataset, beta, lam, settings)
        if actions.K < 2:
            raise ConfigurationError("warmTSOF needs at least two arms")
        self.rater = rater
        self.cfg = cfg
        self.queries = 0

    def step(self, env: Environment, model: RewardModel, rng: np.random.Generator) -> StepResult:
        t = self.t
        perturb = self.perturbations(rng)
        est = self._solve(perturb)
        scores = self.actions.actions @ est.theta_hat
        order = np.argsort(-scores, kind="stable")
        first, second = int(order[0]), int(order[1])
        eps = get_epsilon(self.cfg, t)
        cost, feedback = 0.0, None
        if abs(scores[first] - scores[second]) < eps:
            y = self.rater.prefer(self.actions[first], self.actions[second], rng)
            feedback = PreferenceTuple(first, second, y)
            self.dataset = self.dataset.appended(feedback)
            est = self._solve(perturb.with_omega(rng.integers(0, 2)))
            k = _greedy(self.actions, est.theta_hat)
            cost = self.cfg.cost
            self.queries += 1
        else:
            k = first
        a = self.actions[k]
        r = reward(env, a, model, rng)
        self.history.append(a, r)
        return StepResult(k, r, cost, est, feedback is not None, feedback)
