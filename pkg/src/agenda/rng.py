"""Seed handling: one generator algorithm (PCG64), documented stream derivation."""
from __future__ import annotations

import numpy as np

DEFAULT_SEED = 20180824


def generator(seed: int) -> np.random.Generator:
    """Fresh PCG64 generator for the given seed."""
    return np.random.Generator(np.random.PCG64(int(seed)))


def spawn_seeds(seed: int, n: int) -> list[int]:
    """Derive n independent child seeds (e.g. one per chain) from a root seed.

    Uses numpy's SeedSequence spawning, so child streams are statistically
    independent and the derivation is stable across runs.
    """
    children = np.random.SeedSequence(int(seed)).spawn(n)
    return [int(c.generate_state(1)[0]) for c in children]
