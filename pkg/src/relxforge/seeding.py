"""Seeded random number generation.

Every stochastic component in this package draws from numpy's PCG64
generator. Derived streams (per shard, per step, per epoch) are built
with ``numpy.random.SeedSequence([master, *key])``, which is stable
across platforms and numpy releases, so equal seeds give equal bytes
everywhere.
"""

from __future__ import annotations

import os

import numpy as np

ENV_SEED = "RELXFORGE_SEED"
DEFAULT_SEED = 20840


def default_seed() -> int:
    """Global default seed, overridable via the RELXFORGE_SEED env var."""
    raw = os.environ.get(ENV_SEED)
    if raw is None:
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError as exc:
        raise ValueError(f"{ENV_SEED} must be an integer, got {raw!r}") from exc


def make_rng(seed: int, *key: int) -> np.random.Generator:
    """PCG64 generator for (seed, *key).

    The key identifies a derived stream, e.g. ``make_rng(seed, shard)``
    or ``make_rng(seed, 1, step)``. Streams with different keys are
    statistically independent.
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, *key])))
