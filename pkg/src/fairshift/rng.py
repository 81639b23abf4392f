"""Seeded random generation.

All sampling in the package goes through `generator(seed)`, which returns a
numpy Generator backed by the Philox 4x64 counter-based bit generator keyed
directly with the 64-bit seed. Philox output is specified independently of
platform word size or threading, so a (seed, draw sequence) pair yields the
same stream everywhere.
"""

import numpy as np


def generator(seed: int) -> np.random.Generator:
    if not 0 <= int(seed) < 2**64:
        raise ValueError(f"seed must fit in 64 bits, got {seed}")
    return np.random.Generator(np.random.Philox(key=int(seed)))
