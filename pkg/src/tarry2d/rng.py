"""Counter-based random streams.

Every Monte Carlo loop draws from a Philox generator keyed by the user seed
plus a structured stream tag, so any (shell, block) pair owns an independent
stream and results are bitwise reproducible for any worker count.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def philox_stream(seed: int, *tags: int) -> np.random.Generator:
    """Independent generator for a (seed, tags...) stream.

    Tags are small nonnegative integers (phase, shell, block, ...); they are
    packed into the low word of the 128-bit Philox key.
    """
    mix = 0
    for t in tags:
        if t < 0:
            raise ValueError("stream tags must be nonnegative")
        mix = ((mix * 0x9E3779B97F4A7C15) + t + 1) & _MASK64
    key = ((seed & _MASK64) << 64) | mix
    return np.random.Generator(np.random.Philox(key=key))
