"""Monte-Carlo runs, sweeps and the action-space study.

Seed ``i`` of a run uses ``base_seed + i``; every draw comes from a named
substream of that seed (``env``, ``rater``, ``dataset``, ``agent:<name>``), so
agents see the same instance and never perturb each other's randomness.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..agents import NaivePS, VanillaPS, WarmPrefPS, WarmTSOF
from ..environment import ActionSet, Environment, RewardModel, arm_gaps, build_action_set, sample_environment
from ..errors import ConfigurationError, ExperimentError, PrefBanditError
from ..estimation import estimate_beta_entropy, estimate_beta_mle
from ..offline_data import OfflineDataset, Rater, RaterCompetence, generate_dataset, sample_rater
from ..streams import substream
from .config import ExperimentConfig

SWEEP_PARAMETERS = {"lambda": "true_lambda", "beta": "true_beta", "n": "N", "rho": "rho", "d": "d"}
TABLE1_GRID = ((2, 0.1), (2, 0.8), (5, 0.1), (5, 0.8))


@dataclass(frozen=True, eq=False)
class Instance:
    actions: ActionSet
    env: Environment
    rater: Rater
    dataset: OfflineDataset


def draw_instance(config: ExperimentConfig, seed: int) -> Instance:
    env_rng = substream(seed, "env")
    actions = build_action_set(config.K, config.d, config.rho, env_rng)
    env = sample_environment(config.prior(), actions, env_rng)
    competence = RaterCompetence(config.true_beta, config.true_lambda)
    rater = sample_rater(env, competence, config.policy, substream(seed, "rater"))
    d0 = generate_dataset(
        env, rater, config.sampling_distribution(), config.N, substream(seed, "dataset"), actions=actions
    )
    return Instance(actions, env, rater, d0)


def agent_beta(config: ExperimentConfig, inst: Instance) -> float:
    """Deliberateness handed to the warm-started agents for this instance."""
    if config.beta_source == "given":
        return config.resolved_agent_beta
    if len(inst.dataset) == 0:
        raise ConfigurationError("beta estimation needs N >= 1")
    if config.beta_source == "mle":
        est = estimate_beta_mle(
            inst.dataset, inst.actions, config.prior(), config.resolved_agent_lambda, config.beta_clamp
        )
    else:
        est = estimate_beta_entropy(inst.dataset, config.K, config.entropy_c, config.beta_clamp, config.entropy_over)
    return est.value


def build_agent(name: str, config: ExperimentConfig, inst: Instance, beta: float):
    prior, lam = config.prior(), config.resolved_agent_lambda
    if name == "vanilla_ps":
        return VanillaPS(inst.actions, prior, config.sigma)
    if name == "naive_ps":
        return NaivePS(inst.actions, prior, inst.dataset, lam=lam)
    if name == "warmpref_ps":
        return WarmPrefPS(inst.actions, prior, inst.dataset, beta, lam)
    if name == "warmtsof":
        return WarmTSOF(inst.actions, prior, inst.dataset, beta, lam, inst.rater, config.tsof_config())
    raise ConfigurationError(f"unknown agent {name!r}")


@dataclass
class AgentTrace:
    """Per-step record of one agent on one seed."""

    arms: np.ndarray
    regret: np.ndarray
    rewards: np.ndarray
    costs: np.ndarray
    queried: np.ndarray

    @property
    def cumulative(self) -> np.ndarray:
        return np.cumsum(self.regret)


@dataclass
class SeedRun:
    seed: int
    beta_used: float
    traces: dict = field(default_factory=dict)


def run_seed(config: ExperimentConfig, seed: int) -> SeedRun:
    inst = draw_instance(config, seed)
    beta = agent_beta(config, inst)
    gaps = arm_gaps(inst.env, inst.actions)
    model = RewardModel(config.sigma)
    run = SeedRun(seed, beta)
    T = config.T
    for name in config.agents:
        agent = build_agent(name, config, inst, beta)
        rng = substream(seed, f"agent:{name}")
        arms = np.empty(T, dtype=np.int64)
        rewards, costs = np.empty(T), np.zeros(T)
        queried = np.zeros(T, dtype=bool)
        for t in range(T):
            try:
                res = agent.step(inst.env, model, rng)
            except PrefBanditError as exc:
                raise ExperimentError(f"seed={seed} t={t + 1} agent={name}: {exc}", seed, t + 1, name) from exc
            arms[t], rewards[t], costs[t], queried[t] = res.index, res.reward, res.cost, res.queried
        run.traces[name] = AgentTrace(arms, gaps[arms] + costs, rewards, costs, queried)
    return run


@dataclass(frozen=True, eq=False)
class RegretCurve:
    agent_name: str
    seeds: tuple
    cumulative: np.ndarray  # shape (n_seeds, T)

    @property
    def mean(self) -> np.ndarray:
        return self.cumulative.mean(axis=0)

    @property
    def std(self) -> np.ndarray:
        return _std(self.cumulative)

    @property
    def final_mean(self) -> float:
        return float(self.mean[-1])

    @property
    def final_std(self) -> float:
        return float(self.std[-1])


def _std(a: np.ndarray) -> np.ndarray:
    if a.shape[0] < 2:
        return np.zeros(a.shape[1:])
    return a.std(axis=0, ddof=1)


def pooled_std(s1: float, s2: float) -> float:
    return math.sqrt((s1 * s1 + s2 * s2) / 2.0)


def run_seeds(config: ExperimentConfig, workers: int = 1) -> list[SeedRun]:
    seeds = [config.base_seed + i for i in range(config.seeds)]
    if workers > 1 and len(seeds) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(run_seed, [config] * len(seeds), seeds))
    return [run_seed(config, s) for s in seeds]


def aggregate(runs: list[SeedRun], agents) -> dict[str, RegretCurve]:
    seeds = tuple(r.seed for r in runs)
    return {
        name: RegretCurve(name, seeds, np.stack([r.traces[name].cumulative for r in runs])) for name in agents
    }


def run_experiment(config: ExperimentConfig, workers: int = 1) -> dict[str, RegretCurve]:
    return aggregate(run_seeds(config, workers), config.agents)


# -- output -----------------------------------------------------------------


def _num(x) -> str:
    return format(float(x), ".17g")


def _write_lines(path: Path, header: str, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def write_regret_csvs(curves: dict[str, RegretCurve], out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, curve in curves.items():
        path = out / f"regret_{name}.csv"
        rows = (
            (str(t + 1), str(seed), _num(curve.cumulative[i, t]))
            for i, seed in enumerate(curve.seeds)
            for t in range(curve.cumulative.shape[1])
        )
        _write_lines(path, "t,seed,cumulative", rows)
        written.append(path)
    summary = out / "summary.csv"
    rows = (
        (name, str(t + 1), _num(m), _num(s))
        for name, curve in curves.items()
        for t, (m, s) in enumerate(zip(curve.mean, curve.std))
    )
    _write_lines(summary, "agent,t,mean,std", rows)
    written.append(summary)
    return written


def write_step_log(runs: list[SeedRun], agent: str, path) -> Path:
    """Realized rewards, costs and queries of one agent, one row per (seed, t)."""
    path = Path(path)
    rows = (
        (str(r.seed), str(t + 1), str(int(tr.arms[t])), _num(tr.rewards[t]), _num(tr.costs[t]), str(int(tr.queried[t])))
        for r in runs
        for tr in (r.traces[agent],)
        for t in range(tr.arms.shape[0])
    )
    _write_lines(path, "seed,t,arm,reward,cost,queried", rows)
    return path


def read_regret_csv(path) -> dict[int, np.ndarray]:
    """Per-seed cumulative curves from a ``regret_<agent>.csv`` file."""
    by_seed: dict[int, list] = {}
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "t,seed,cumulative":
            raise ConfigurationError(f"{path}: unexpected header {header!r}")
        for line in fh:
            t, seed, value = line.strip().split(",")
            by_seed.setdefault(int(seed), []).append(float(value))
    return {s: np.array(v) for s, v in by_seed.items()}


# -- sweeps -----------------------------------------------------------------


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    values: tuple
    base: ExperimentConfig

    def __post_init__(self):
        if self.parameter not in SWEEP_PARAMETERS:
            raise ConfigurationError(f"sweep parameter must be one of {', '.join(SWEEP_PARAMETERS)}")
        if not self.values:
            raise ConfigurationError("sweep values must not be empty")
        for v in self.values:
            self.config_for(v)

    def config_for(self, value) -> ExperimentConfig:
        key = SWEEP_PARAMETERS[self.parameter]
        if key in ("N", "d"):
            if float(value) != int(value):
                raise ConfigurationError(f"{self.parameter} values must be integers")
            value = int(value)
        else:
            value = float(value)
        return self.base.replace(**{key: value})


@dataclass(frozen=True)
class SummaryRow:
    value: float
    agent: str
    mean: float
    std: float
    n_seeds: int


def run_sweep(spec: SweepSpec, workers: int = 1) -> list[SummaryRow]:
    rows = []
    for v in spec.values:
        curves = run_experiment(spec.config_for(v), workers)
        for name, c in curves.items():
            rows.append(SummaryRow(v, name, c.final_mean, c.final_std, len(c.seeds)))
    return rows


def write_sweep_csv(spec: SweepSpec, rows: list[SummaryRow], path) -> Path:
    path = Path(path)
    _write_lines(
        path,
        "parameter,value,agent,final_mean,final_std",
        ((spec.parameter, _num(r.value), r.agent, _num(r.mean), _num(r.std)) for r in rows),
    )
    return path


@dataclass(frozen=True)
class StudyCell:
    d: int
    rho: float
    agent: str
    mean: float
    std: float


def run_action_space_study(base: ExperimentConfig, workers: int = 1) -> list[StudyCell]:
    cells = []
    for d, rho in TABLE1_GRID:
        curves = run_experiment(base.replace(d=d, rho=rho, prior_mean=None, prior_cov=None), workers)
        for name, c in curves.items():
            cells.append(StudyCell(d, rho, name, c.final_mean, c.final_std))
    return cells


def write_study_csv(cells: list[StudyCell], path) -> Path:
    path = Path(path)
    _write_lines(
        path, "d,rho,agent,mean,std", ((str(c.d), _num(c.rho), c.agent, _num(c.mean), _num(c.std)) for c in cells)
    )
    return path


__all__ = [
    "AgentTrace",
    "Instance",
    "RegretCurve",
    "SeedRun",
    "StudyCell",
    "SummaryRow",
    "SweepSpec",
    "TABLE1_GRID",
    "aggregate",
    "agent_beta",
    "build_agent",
    "draw_instance",
    "pooled_std",
    "read_regret_csv",
    "run_action_space_study",
    "run_experiment",
    "run_seed",
    "run_seeds",
    "run_sweep",
    "write_regret_csvs",
    "write_step_log",
    "write_study_csv",
    "write_sweep_csv",
]
