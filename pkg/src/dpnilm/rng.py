"""Deterministic derivation of independent random streams.

Every stochastic component takes an explicit ``numpy.random.Generator``.
Streams for parallel work units are derived from a master seed with
``hash64``, so results are reproducible and independent of scheduling.
"""

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix(z: int) -> int:
    # splitmix64 finalizer
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def hash64(seed: int, *ids: int) -> int:
    """Mix a seed and any number of integer labels into one 64-bit value.

    Stable across platforms and runs; distinct id tuples give independent
    values for all practical purposes.
    """
    state = int(seed) & _MASK
    for part in ids:
        state = _mix((state + _GOLDEN + (int(part) & _MASK)) & _MASK)
    return _mix(state)


def stream(seed: int, *ids: int) -> np.random.Generator:
    """Generator seeded from ``hash64(seed, *ids)``; same inputs, same draws."""
    return np.random.Generator(np.random.PCG64(hash64(seed, *ids)))
