"""Named random substreams.

Every (seed, role) pair gets its own generator so that adding or removing an
agent never shifts the draws seen by another agent.
"""

from __future__ import annotations

import zlib

import numpy as np


def role_key(role: str) -> int:
    return zlib.crc32(role.encode("utf-8"))


def substream(seed: int, role: str) -> np.random.Generator:
    """Generator for ``role`` under run seed ``seed``."""
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFF, int(seed) >> 32, role_key(role)])
    return np.random.default_rng(ss)
