"""Deterministic seed derivation.

Every random stage (generation, splitting, per-tree bootstraps, per-fold
fits) derives its own integer seed from the master seed plus fixed tags, so
results are independent of execution order and safe to parallelize.
"""

from __future__ import annotations

import numpy as np

_U64_MAX = np.iinfo(np.uint64).max


def derive_seed(*parts: int) -> int:
    """Collapse integer parts into a single uint64 seed via SeedSequence."""
    if not parts:
        raise ValueError("derive_seed needs at least one part")
    state = np.random.SeedSequence([int(p) for p in parts]).generate_state(1, np.uint64)
    return int(state[0])


def rng_from(*parts: int) -> np.random.Generator:
    """A PCG64 generator keyed by the given parts."""
    return np.random.default_rng(np.random.SeedSequence([int(p) for p in parts]))


def check_seed(seed: int) -> int:
    """Validate a user-supplied seed: unsigned, 64-bit."""
    seed = int(seed)
    if seed < 0 or seed > _U64_MAX:
        raise ValueError(f"seed must be in [0, 2^64), got {seed}")
    return seed
