"""Deterministic descent solver with Armijo backtracking, plus a gradient checker."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigurationError

ARMIJO = 0.25
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class SolveSettings:
    grad_tolerance: float = 1e-8
    max_iterations: int = 5000
    initial_step: float = 1.0
    shrink: float = 0.5
    growth: float = 2.0
    max_backtracks: int = 60

    def __post_init__(self):
        if not self.grad_tolerance > 0:
            raise ConfigurationError("grad_tolerance must be positive")
        if self.max_iterations < 1:
            raise ConfigurationError("max_iterations must be >= 1")
        if not 0 < self.shrink < 1 < self.growth:
            raise ConfigurationError("need 0 < shrink < 1 < growth")
        if not self.initial_step > 0:
            raise ConfigurationError("initial_step must be positive")


@dataclass
class SolveReport:
    iterations: int
    final_grad_norm: float
    converged: bool
    objective_trace: list = field(default_factory=list, repr=False)
    stalled: bool = False


def _newton_direction(hess: np.ndarray, g: np.ndarray):
    try:
        c = np.linalg.cholesky(hess)
    except np.linalg.LinAlgError:
        return None
    z = np.linalg.solve(c, -g)
    return np.linalg.solve(c.T, z)


def minimize(
    objective: Callable[[np.ndarray], float],
    gradient: Callable[[np.ndarray], np.ndarray],
    x0,
    settings: SolveSettings = SolveSettings(),
    hessian: Callable[[np.ndarray], np.ndarray] | None = None,
) -> tuple[np.ndarray, SolveReport]:
    """Minimize a smooth convex function by descent with Armijo backtracking.

    Without ``hessian`` the direction is the negative gradient and the trial
    step is the Barzilai-Borwein step (``initial_step`` on the first
    iteration). With ``hessian`` the Newton direction is used with unit trial
    step, falling back to the gradient when the Hessian is not PD.

    Steps are accepted on the Armijo condition with parameter 1/4. Once the
    predicted decrease is below the rounding level of the objective, a step is
    accepted if it does not raise the objective beyond that rounding level and
    it shrinks the gradient norm.
    """
    x = np.array(x0, dtype=float)
    f = float(objective(x))
    g = np.asarray(gradient(x), dtype=float)
    gnorm = float(np.linalg.norm(g))
    trace = [f]
    step = settings.initial_step
    prev = None
    it = 0
    stalled = False
    while gnorm > settings.grad_tolerance and it < settings.max_iterations:
        direction = None
        if hessian is not None:
            direction = _newton_direction(np.asarray(hessian(x), dtype=float), g)
            if direction is not None and float(g @ direction) < 0:
                t = 1.0
            else:
                direction = None
        if direction is None:
            direction = -g
            if prev is not None:
                s, y = prev
                sy = float(s @ y)
                t = float(s @ s) / sy if sy > 0 else step * settings.growth
            else:
                t = step
        slope = float(g @ direction)
        noise = 16.0 * _EPS * max(1.0, abs(f))
        accepted = False
        for _ in range(settings.max_backtracks):
            x_new = x + t * direction
            f_new = float(objective(x_new))
            if np.isfinite(f_new):
                if f_new <= f + ARMIJO * t * slope:
                    accepted = True
                    break
                if -t * slope <= noise and f_new <= f + noise:
                    g_try = np.asarray(gradient(x_new), dtype=float)
                    if np.linalg.norm(g_try) < gnorm:
                        accepted = True
                        break
            t *= settings.shrink
        it += 1
        if not accepted:
            stalled = True
            break
        g_new = np.asarray(gradient(x_new), dtype=float)
        prev = (x_new - x, g_new - g)
        step = t
        x, f, g = x_new, f_new, g_new
        gnorm = float(np.linalg.norm(g))
        trace.append(f)
    report = SolveReport(it, gnorm, gnorm <= settings.grad_tolerance, trace, stalled)
    return x, report


def check_gradient(objective, gradient, x, h: float = 1e-5) -> float:
    """Largest per-coordinate relative error of ``gradient`` against central differences.

    Each error is scaled by ``max(1, |analytic|)``.
    """
    if not h > 0:
        raise ConfigurationError("h must be positive")
    x = np.array(x, dtype=float)
    analytic = np.asarray(gradient(x), dtype=float)
    worst = 0.0
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        fd = (objective(x + e) - objective(x - e)) / (2.0 * h)
        err = abs(fd - analytic[i]) / max(1.0, abs(analytic[i]))
        worst = max(worst, err)
    return worst
