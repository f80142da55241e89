"""Per-task random streams.

Every trial, member or point set draws from its own Philox stream keyed by
``(seed, *keys)``, so results do not depend on how many tasks run or in which
order they are scheduled.
"""

import numpy as np


def stream(seed: int, *keys: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), *map(int, keys)])))


def complex_gaussian(rng: np.random.Generator, n: int) -> np.ndarray:
    z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return z / np.sqrt(2.0)
