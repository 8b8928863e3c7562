"""Experiment configuration and its flat ``key = value`` file format."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from ..agents import Constant, InverseSqrt, TsofConfig
from ..environment import GaussianPrior
from ..errors import ConfigurationError
from ..offline_data import PolicyKind, SamplingDistribution

AGENT_NAMES = ("vanilla_ps", "naive_ps", "warmpref_ps", "warmtsof")
BETA_SOURCES = ("given", "mle", "entropy")
# finite stand-in used by the agents when knowledgeability is infinite
EXACT_AGENT_LAMBDA = 1e6


@dataclass(frozen=True)
class ExperimentConfig:
    K: int = 10
    d: int = 4
    T: int = 300
    N: int = 20
    true_beta: float = 10.0
    true_lambda: float = 100.0
    # None means "same as the true value"
    agent_beta: float | None = None
    agent_lambda: float | None = None
    beta_source: str = "given"
    sigma: float = 1.0
    rho: float = 0.0
    prior_mean: tuple | None = None
    prior_cov: tuple | None = None
    sampling: tuple | None = None
    expert_policy: str = "bradley_terry"
    agents: tuple = ("vanilla_ps", "naive_ps", "warmpref_ps")
    tsof_cost: float = 0.0
    tsof_epsilon: str = "constant:0.1"
    seeds: int = 5
    base_seed: int = 0
    theory_eps: float = 0.1
    theory_theta0: str = "environment"
    c1: float | None = None
    entropy_c: float | None = None
    entropy_over: str = "winners"
    beta_clamp: tuple = (1e-3, 1e3)

    def __post_init__(self):
        for name in ("K", "d", "T", "seeds"):
            if getattr(self, name) < 1:
                raise ConfigurationError(f"{name} must be >= 1")
        if self.K < 2:
            raise ConfigurationError("K must be >= 2")
        if self.N < 0:
            raise ConfigurationError("N must be >= 0")
        if self.base_seed < 0:
            raise ConfigurationError("base_seed must be >= 0")
        for name in ("true_beta", "sigma", "rho", "tsof_cost", "theory_eps"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigurationError(f"{name} must be finite")
        if self.true_beta < 0:
            raise ConfigurationError("true_beta must be >= 0")
        if not self.true_lambda > 0:
            raise ConfigurationError("true_lambda must be positive (inf allowed)")
        if self.agent_beta is not None and not (math.isfinite(self.agent_beta) and self.agent_beta >= 0):
            raise ConfigurationError("agent_beta must be finite and >= 0")
        if self.agent_lambda is not None and not self.agent_lambda > 0:
            raise ConfigurationError("agent_lambda must be positive")
        if self.beta_source not in BETA_SOURCES:
            raise ConfigurationError(f"beta_source must be one of {BETA_SOURCES}")
        if not self.sigma > 0:
            raise ConfigurationError("sigma must be positive")
        if not 0 <= self.rho < 1:
            raise ConfigurationError("rho must lie in [0, 1)")
        if self.expert_policy not in {p.value for p in PolicyKind}:
            _bad("expert_policy", self.expert_policy)
        if not self.agents:
            raise ConfigurationError("agents must not be empty")
        for a in self.agents:
            if a not in AGENT_NAMES:
                raise ConfigurationError(f"unknown agent {a!r}; choose from {', '.join(AGENT_NAMES)}")
        if len(set(self.agents)) != len(self.agents):
            raise ConfigurationError("agents must not repeat")
        if self.theory_theta0 not in ("environment", "prior_mean"):
            _bad("theory_theta0", self.theory_theta0)
        if self.entropy_over not in ("winners", "all"):
            _bad("entropy_over", self.entropy_over)
        if self.entropy_c is not None and not self.entropy_c > 0:
            raise ConfigurationError("entropy_c must be positive")
        lo, hi = self.beta_clamp
        if not 0 < lo < hi < math.inf:
            raise ConfigurationError("beta_clamp must satisfy 0 < lo < hi < inf")
        # eager checks of the derived objects
        self.tsof_config()
        self.prior()
        self.sampling_distribution()

    # derived objects
    def prior(self) -> GaussianPrior:
        mean = np.zeros(self.d) if self.prior_mean is None else np.array(self.prior_mean, dtype=float)
        if mean.shape != (self.d,):
            raise ConfigurationError(f"prior_mean needs {self.d} entries")
        if self.prior_cov is None:
            cov = np.eye(self.d)
        else:
            cov = np.array(self.prior_cov, dtype=float)
            if cov.size != self.d * self.d:
                raise ConfigurationError(f"prior_cov needs {self.d * self.d} entries (row-major)")
            cov = cov.reshape(self.d, self.d)
        return GaussianPrior(mean, cov)

    def sampling_distribution(self) -> SamplingDistribution:
        if self.sampling is None:
            return SamplingDistribution.uniform(self.K)
        if len(self.sampling) != self.K:
            raise ConfigurationError(f"sampling needs {self.K} weights")
        return SamplingDistribution(np.array(self.sampling, dtype=float))

    def tsof_config(self) -> TsofConfig:
        kind, _, arg = self.tsof_epsilon.partition(":")
        try:
            value = float(arg)
        except ValueError:
            raise ConfigurationError(f"tsof_epsilon {self.tsof_epsilon!r} is not 'constant:<x>' or 'inverse_sqrt:<c>'") from None
        if kind == "constant":
            rule = Constant(value)
        elif kind == "inverse_sqrt":
            rule = InverseSqrt(value)
        else:
            raise ConfigurationError(f"unknown epsilon rule {kind!r}")
        return TsofConfig(self.tsof_cost, rule)

    @property
    def policy(self) -> PolicyKind:
        return PolicyKind(self.expert_policy)

    @property
    def resolved_agent_lambda(self) -> float:
        lam = self.true_lambda if self.agent_lambda is None else self.agent_lambda
        return EXACT_AGENT_LAMBDA if math.isinf(lam) else lam

    @property
    def resolved_agent_beta(self) -> float:
        return self.true_beta if self.agent_beta is None else self.agent_beta

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


def _bad(name, value):
    raise ConfigurationError(f"invalid value {value!r} for {name}")


_INT_KEYS = {"K", "d", "T", "N", "seeds", "base_seed"}
_FLOAT_KEYS = {"true_beta", "true_lambda", "sigma", "rho", "tsof_cost", "theory_eps"}
_OPT_FLOAT_KEYS = {"agent_beta", "agent_lambda", "c1", "entropy_c"}
_VECTOR_KEYS = {"prior_mean", "prior_cov", "sampling"}
_AUTO = "auto"


def _fmt_float(x: float) -> str:
    return "inf" if x == math.inf else repr(float(x))


def _parse_float(key, text) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigurationError(f"{key}: expected a number, got {text!r}") from None


def _parse_int(key, text) -> int:
    try:
        return int(text)
    except ValueError:
        raise ConfigurationError(f"{key}: expected an integer, got {text!r}") from None


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    values: dict = {}
    known = {f.name for f in fields(ExperimentConfig)}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        key, val = key.strip(), val.strip()
        where = f"{source}:{lineno}"
        if not sep:
            raise ConfigurationError(f"{where}: expected 'key = value'")
        if key not in known:
            raise ConfigurationError(f"{where}: unknown key {key!r}")
        if key in values:
            raise ConfigurationError(f"{where}: duplicate key {key!r}")
        try:
            values[key] = _parse_value(key, val)
        except ConfigurationError as exc:
            raise ConfigurationError(f"{where}: {exc}") from None
    return ExperimentConfig(**values)


def _parse_value(key: str, val: str):
    if key in _INT_KEYS:
        return _parse_int(key, val)
    if key in _FLOAT_KEYS:
        return _parse_float(key, val)
    if key in _OPT_FLOAT_KEYS:
        return None if val == _AUTO else _parse_float(key, val)
    if key in _VECTOR_KEYS:
        if val == _AUTO:
            return None
        return tuple(_parse_float(key, v.strip()) for v in val.split(","))
    if key == "agents":
        return tuple(v.strip() for v in val.split(",") if v.strip())
    if key == "beta_clamp":
        parts = tuple(_parse_float(key, v.strip()) for v in val.split(","))
        if len(parts) != 2:
            raise ConfigurationError("beta_clamp needs two values")
        return parts
    return val


def serialize_config(cfg: ExperimentConfig) -> str:
    lines = []
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if v is None:
            text = _AUTO
        elif f.name in _INT_KEYS:
            text = str(v)
        elif f.name in _FLOAT_KEYS or f.name in _OPT_FLOAT_KEYS:
            text = _fmt_float(v)
        elif f.name in _VECTOR_KEYS or f.name == "beta_clamp":
            text = ", ".join(_fmt_float(x) for x in v)
        elif f.name == "agents":
            text = ", ".join(v)
        else:
            text = str(v)
        lines.append(f"{f.name} = {text}")
    return "\n".join(lines) + "\n"


def load_config(path) -> ExperimentConfig:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigurationError(f"config file not found: {p}") from None
    except OSError as exc:
        raise ConfigurationError(f"cannot read config file {p}: {exc.strerror}") from None
    return parse_config(text, str(p))


__all__ = [
    "AGENT_NAMES",
    "EXACT_AGENT_LAMBDA",
    "ExperimentConfig",
    "load_config",
    "parse_config",
    "serialize_config",
]
