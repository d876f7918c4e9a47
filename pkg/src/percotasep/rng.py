"""Reproducible random streams.

Every estimator takes a 64-bit master seed. Replica r draws from a
numpy PCG64 generator seeded with ``replica_seed(master, r)``, a
SplitMix64-style mix of (master, r). The mix is fixed by contract so a
(seed, replica) pair reproduces identical draws across runs, platforms
and degrees of parallelism.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1

# SplitMix64 constants (Steele, Lea & Flood).
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def splitmix64(z: int) -> int:
    """One SplitMix64 finalization round of a 64-bit value."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


def replica_seed(master_seed: int, replica: int) -> int:
    """Derive the 64-bit seed of replica ``replica`` from the master seed."""
    return splitmix64((master_seed + (replica + 1) * _GAMMA) & _MASK)


def stream(master_seed: int, replica: int = 0) -> np.random.Generator:
    """PCG64 generator for one replica; disjoint streams per replica index."""
    return np.random.Generator(np.random.PCG64(replica_seed(master_seed, replica)))
