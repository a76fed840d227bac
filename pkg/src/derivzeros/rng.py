"""Counter-based random substreams.

Every random draw in the package comes from a ``numpy.random.Generator``
built on Philox, keyed by a tuple of non-negative integers such as
``(master_seed, n, trial)``.  Streams for different keys are independent and
do not depend on the order in which they are created, so trials can run on any
number of threads and still reproduce bit for bit.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1


def _words(key) -> list[int]:
    out = []
    for v in key:
        v = int(v)
        if v < 0:
            raise ValueError(f"stream keys must be non-negative, got {v}")
        out.append(v & MASK64)
        if v >> 64:
            out.append(v >> 64)
    return out


def stream(*key: int) -> np.random.Generator:
    """Independent generator for the integer key ``key``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(_words(key))))


def child_seed(*key: int) -> int:
    """A 64-bit seed derived from ``key`` (for APIs that take an int seed)."""
    return int(np.random.SeedSequence(_words(key)).generate_state(1, np.uint64)[0])
