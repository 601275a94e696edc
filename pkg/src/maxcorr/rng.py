"""Counter-based random streams addressed by (master_seed, *key).

Every replication derives its own Philox generator from the master seed and
its coordinates, so results do not depend on scheduling or worker count.
"""

import os

import numpy as np

THREADS_ENV = "MAXCORR_THREADS"


def stream(master_seed: int, *key: int) -> np.random.Generator:
    if master_seed < 0 or master_seed >= 2**64:
        raise ValueError("master seed must be a 64-bit unsigned integer")
    seq = np.random.SeedSequence(master_seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(seq))


def default_threads() -> int:
    value = os.environ.get(THREADS_ENV)
    if not value:
        return 1
    try:
        threads = int(value)
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be an integer, got {value!r}") from None
    return max(1, threads)
