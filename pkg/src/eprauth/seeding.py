"""Deterministic RNG streams built on the counter-based Philox generator.

Every source of randomness in the package is derived from a single 64-bit
seed plus a small integer path (domain, index, ...) via SeedSequence spawn
keys. Streams with different paths are statistically independent, so trials
can run on any number of workers in any order without changing results.
"""
from __future__ import annotations

import numpy as np

DOMAIN_THETAS = 1
DOMAIN_CHALLENGE = 2
DOMAIN_VERIFIER = 3
DOMAIN_EVE = 4
DOMAIN_TRIAL = 5


def derive_rng(seed: int, *path: int) -> np.random.Generator:
    """Independent generator for (seed, path); identical inputs, identical stream."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))
