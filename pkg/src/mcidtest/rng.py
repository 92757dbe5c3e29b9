"""Seed derivation: every random stream is indexed off a master seed."""

from __future__ import annotations

import numpy as np


def derive_seed(master: int, *keys: int) -> int:
    """Deterministic 64-bit child seed of ``master`` at the index path ``keys``.

    Children of one master are statistically independent and do not depend
    on the order in which they are requested.
    """
    ss = np.random.SeedSequence(int(master) & ((1 << 128) - 1), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def generator(seed: int) -> np.random.Generator:
    """Counter-based (Philox) generator for ``seed``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed) & ((1 << 128) - 1))))
