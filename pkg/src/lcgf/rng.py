"""Deterministic seed derivation and generator construction.

All randomness in the package flows through counter-style derived seeds:

    child = derive(parent, *indices)

where each index is folded in with one round of splitmix64.  splitmix64 is
a bijection on 64-bit words, so children of a fixed parent with distinct
index tuples are pairwise distinct, and the whole scheme is reproducible
from (master seed, indices) alone -- independent of thread scheduling.

Generators are numpy ``SFC64`` wrapped in ``numpy.random.Generator`` (the
counter structure lives in the seed derivation, not the bit generator;
SFC64 is simply the fastest stable stream available here).  Gaussian draws
use numpy's ziggurat; the bit stream is therefore fixed per numpy version,
which is the determinism contract this package documents.
"""

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    """One splitmix64 mixing round (a bijection on 64-bit integers)."""
    x = (x + _GOLDEN) & _MASK
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return (z ^ (z >> 31)) & _MASK


def derive(seed: int, *indices: int) -> int:
    """Derive a child seed from ``seed`` and an index path."""
    s = seed & _MASK
    for ix in indices:
        s = splitmix64(s ^ splitmix64(ix & _MASK))
    return s


def generator(seed: int, *indices: int) -> np.random.Generator:
    """A generator keyed by the derived seed."""
    return np.random.Generator(np.random.SFC64(derive(seed, *indices)))


def replica_seed(master: int, index: int) -> int:
    """Per-replica seed: hash of (master, replica index). Pairwise distinct."""
    return derive(master, index)
