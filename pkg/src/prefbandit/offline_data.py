"""Rater model and offline preference datasets."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .environment import ActionSet, Environment
from .errors import ConfigurationError, DomainError, NumericError

DATASET_MAGIC = "# prefbandit-dataset v1"


class PolicyKind(enum.Enum):
    BRADLEY_TERRY = "bradley_terry"
    GREEDY = "greedy"


@dataclass(frozen=True)
class RaterCompetence:
    """Deliberateness ``beta`` and knowledgeability ``lam``.

    ``exact=True`` stands for infinite knowledgeability: the rater's belief
    equals the true parameter and ``lam`` is ignored.
    """

    beta: float
    lam: float = math.inf
    exact: bool = False

    def __post_init__(self):
        if not self.beta >= 0 or not math.isfinite(self.beta):
            raise ConfigurationError(f"beta must be finite and >= 0, got {self.beta}")
        if math.isinf(self.lam) and self.lam > 0:
            object.__setattr__(self, "exact", True)
        elif not self.exact and not self.lam > 0:
            raise ConfigurationError(f"lambda must be > 0 unless exact knowledge is set, got {self.lam}")


@dataclass(frozen=True, eq=False)
class Rater:
    vartheta: np.ndarray
    competence: RaterCompetence
    policy_kind: PolicyKind = PolicyKind.BRADLEY_TERRY

    def prefer(self, a0, a1, rng: np.random.Generator) -> int:
        """Y for one comparison: 0 when ``a0`` is preferred."""
        beta = self.competence.beta
        if self.policy_kind is PolicyKind.GREEDY:
            return 0 if beta * float(a0 @ self.vartheta) >= beta * float(a1 @ self.vartheta) else 1
        p0 = preference_prob(a0, a1, self.vartheta, beta)
        return 0 if rng.random() < p0 else 1


class PreferenceTuple(NamedTuple):
    idx0: int
    idx1: int
    y: int

    @property
    def winner(self) -> int:
        return self.idx1 if self.y else self.idx0

    @property
    def loser(self) -> int:
        return self.idx0 if self.y else self.idx1


@dataclass(frozen=True, eq=False)
class SamplingDistribution:
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if w.size < 1 or np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ConfigurationError("sampling weights must be finite and non-negative")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ConfigurationError(f"sampling weights sum to {w.sum()!r}, expected 1")
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, K: int) -> "SamplingDistribution":
        return cls(np.full(K, 1.0 / K))

    @property
    def K(self) -> int:
        return self.weights.shape[0]

    @property
    def mu_min(self) -> float:
        pos = self.weights[self.weights > 0]
        return float(pos.min())

    @property
    def mu_max(self) -> float:
        return float(self.weights.max())


@dataclass(frozen=True, eq=False)
class OfflineDataset:
    """Ordered preference tuples stored column-wise."""

    idx0: np.ndarray
    idx1: np.ndarray
    y: np.ndarray
    sampling: SamplingDistribution | None = None

    def __post_init__(self):
        cols = [np.asarray(c, dtype=np.int64).reshape(-1) for c in (self.idx0, self.idx1, self.y)]
        if not (cols[0].shape == cols[1].shape == cols[2].shape):
            raise ConfigurationError("dataset columns must have equal length")
        if np.any((cols[2] != 0) & (cols[2] != 1)):
            raise ConfigurationError("preference bits must be 0 or 1")
        if np.any(cols[0] < 0) or np.any(cols[1] < 0):
            raise ConfigurationError("arm indices must be non-negative")
        if self.sampling is not None and len(cols[0]):
            hi = max(cols[0].max(), cols[1].max())
            if hi >= self.sampling.K:
                raise ConfigurationError(f"arm index {hi} out of range for K={self.sampling.K}")
        for name, col in zip(("idx0", "idx1", "y"), cols):
            col.setflags(write=False)
            object.__setattr__(self, name, col)

    @classmethod
    def empty(cls, sampling: SamplingDistribution | None = None) -> "OfflineDataset":
        z = np.zeros(0, dtype=np.int64)
        return cls(z, z, z, sampling)

    @classmethod
    def from_tuples(cls, tuples, sampling: SamplingDistribution | None = None) -> "OfflineDataset":
        rows = [tuple(t) for t in tuples]
        if not rows:
            return cls.empty(sampling)
        a = np.array(rows, dtype=np.int64)
        return cls(a[:, 0], a[:, 1], a[:, 2], sampling)

    def __len__(self):
        return self.idx0.shape[0]

    @property
    def N(self) -> int:
        return len(self)

    @property
    def tuples(self) -> list[PreferenceTuple]:
        return [PreferenceTuple(int(i), int(j), int(k)) for i, j, k in zip(self.idx0, self.idx1, self.y)]

    @property
    def winners(self) -> np.ndarray:
        return np.where(self.y == 0, self.idx0, self.idx1)

    @property
    def losers(self) -> np.ndarray:
        return np.where(self.y == 0, self.idx1, self.idx0)

    def appended(self, item: PreferenceTuple) -> "OfflineDataset":
        return OfflineDataset(
            np.append(self.idx0, item[0]), np.append(self.idx1, item[1]), np.append(self.y, item[2]), self.sampling
        )

    def max_index(self) -> int:
        if not len(self):
            return -1
        return int(max(self.idx0.max(), self.idx1.max()))


def sample_rater(
    env: Environment,
    competence: RaterCompetence,
    kind: PolicyKind = PolicyKind.BRADLEY_TERRY,
    rng: np.random.Generator | None = None,
) -> Rater:
    """Rater belief ``theta + z / lam``; exact knowledge copies ``theta``."""
    if competence.exact:
        vartheta = env.theta.copy()
    else:
        if rng is None:
            raise ConfigurationError("a random source is required for finite knowledgeability")
        vartheta = env.theta + rng.standard_normal(env.theta.shape[0]) / competence.lam
    return Rater(vartheta, competence, PolicyKind(kind))


def _stable_sigmoid(x: float) -> float:
    # p(x) + p(-x) == 1 exactly: the larger half is formed by one subtraction
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    return 1.0 - 1.0 / (1.0 + math.exp(x))


def preference_prob(a0, a1, vartheta, beta: float) -> float:
    """Bradley-Terry probability that ``a0`` is preferred to ``a1``."""
    vartheta = np.asarray(vartheta, dtype=float)
    margin = float((np.asarray(a0, dtype=float) - np.asarray(a1, dtype=float)) @ vartheta)
    return _stable_sigmoid(beta * margin)


def generate_dataset(
    env: Environment,
    rater: Rater,
    sampling: SamplingDistribution,
    N: int,
    rng: np.random.Generator,
    *,
    actions: ActionSet,
) -> OfflineDataset:
    """Draw N comparisons with both arms i.i.d. from ``sampling``."""
    if N < 0:
        raise ConfigurationError(f"N must be >= 0, got {N}")
    if sampling.K != actions.K:
        raise ConfigurationError(f"sampling has {sampling.K} weights for {actions.K} arms")
    if N == 0:
        return OfflineDataset.empty(sampling)
    pairs = rng.choice(actions.K, size=(N, 2), p=sampling.weights)
    beta = rater.competence.beta
    a0, a1 = actions.actions[pairs[:, 0]], actions.actions[pairs[:, 1]]
    if rater.policy_kind is PolicyKind.GREEDY:
        y = np.where(beta * (a0 @ rater.vartheta) >= beta * (a1 @ rater.vartheta), 0, 1)
    else:
        u = rng.random(N)
        p0 = np.array([_stable_sigmoid(beta * m) for m in (a0 - a1) @ rater.vartheta])
        y = np.where(u < p0, 0, 1)
    return OfflineDataset(pairs[:, 0], pairs[:, 1], y, sampling)


def dataset_entropy(d0: OfflineDataset, K: int, over: str = "winners") -> float:
    """Shannon entropy (nats) of the empirical arm distribution in ``d0``.

    ``over="winners"`` counts the preferred arm of each tuple; ``over="all"``
    counts both arms of every tuple.
    """
    if len(d0) == 0:
        raise DomainError("entropy of an empty dataset is undefined")
    if over == "winners":
        idx = d0.winners
    elif over == "all":
        idx = np.concatenate([d0.idx0, d0.idx1])
    else:
        raise ConfigurationError(f"entropy_over must be 'winners' or 'all', got {over!r}")
    counts = np.bincount(idx, minlength=K).astype(float)
    p = counts[counts > 0] / counts.sum()
    return float(max(-(p * np.log(p)).sum(), 0.0))


def write_dataset(path, d0: OfflineDataset, K: int, d: int) -> None:
    lines = [f"{DATASET_MAGIC} K={K} d={d}"]
    lines += [f"{n},{i},{j},{y}" for n, (i, j, y) in enumerate(zip(d0.idx0, d0.idx1, d0.y))]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def read_dataset(path, sampling: SamplingDistribution | None = None) -> tuple[OfflineDataset, int, int]:
    """Parse a dataset file; returns ``(dataset, K, d)``."""
    text = Path(path).read_text(encoding="utf-8")
    lines = text.split("\n")
    header = lines[0].strip()
    if not header.startswith(DATASET_MAGIC):
        raise NumericError(f"{path}: not a prefbandit dataset (header {header!r})")
    fields = dict(tok.split("=", 1) for tok in header[len(DATASET_MAGIC):].split())
    try:
        K, d = int(fields["K"]), int(fields["d"])
    except (KeyError, ValueError):
        raise NumericError(f"{path}: malformed header {header!r}") from None
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 4:
            raise NumericError(f"{path}:{lineno}: expected 4 fields, got {len(parts)}")
        n, i, j, y = (int(p) for p in parts)
        if n != len(rows):
            raise NumericError(f"{path}:{lineno}: tuple index {n} out of order")
        if not (0 <= i < K and 0 <= j < K):
            raise NumericError(f"{path}:{lineno}: arm index out of range for K={K}")
        rows.append((i, j, y))
    if sampling is None:
        sampling = SamplingDistribution.uniform(K)
    return OfflineDataset.from_tuples(rows, sampling), K, d
