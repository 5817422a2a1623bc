"""Counter-based uniforms keyed by (seed, replica, bond).

Each bond's uniform is a pure function of the master seed, the replica index
and the bond's global lattice position, built from the SplitMix64 finaliser.
Any window, row stream or coupled pair therefore sees the same uniform for the
same bond, which is what makes whole-window and row-by-row sampling agree
bit for bit.  Bit compatibility is only promised within one build.

Keys passed back into the compiled helpers from Python must be np.uint64;
a plain int above 2**63 does not fit numba's default int64.
"""
import zlib

import numpy as np
from numba import njit, uint64

_GOLDEN = 0x9E3779B97F4A7C15
_REPLICA_SALT = 0x632BE59BD9B4E019
_SWEEP_SALT = 0xD1B54A32D192ED03
_COORD_OFFSET = 1 << 31
_UNIT = 1.0 / 9007199254740992.0  # 2**-53


@njit(cache=True, inline="always")
def mix64(z):
    z = (z ^ (z >> uint64(30))) * uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> uint64(27))) * uint64(0x94D049BB133111EB)
    return z ^ (z >> uint64(31))


@njit(cache=True)
def replica_key(seed, replica):
    return mix64(uint64(seed) ^ mix64(uint64(replica) + uint64(_REPLICA_SALT)))


@njit(cache=True, inline="always")
def row_key(rkey, y):
    return mix64(uint64(rkey) + uint64(y + _COORD_OFFSET) * uint64(_GOLDEN))


@njit(cache=True, inline="always")
def bond_uniform(rowk, x, orient):
    h = mix64(uint64(rowk) ^ ((uint64(x + _COORD_OFFSET) * uint64(2) + uint64(orient)) * uint64(_GOLDEN)))
    return (h >> uint64(11)) * _UNIT


@njit(cache=True, inline="always")
def sweep_key(rkey, sweep):
    return mix64(uint64(rkey) ^ (uint64(sweep) + uint64(_SWEEP_SALT)) * uint64(_GOLDEN))


@njit(cache=True, inline="always")
def indexed_uniform(key, i):
    return (mix64(uint64(key) ^ (uint64(i) + uint64(1)) * uint64(_GOLDEN)) >> uint64(11)) * _UNIT


def key_for(seed: int, replica: int) -> np.uint64:
    # keep the uint64 type: a plain int below 2**63 would reach kernels as int64
    return np.uint64(replica_key(np.uint64(seed & 0xFFFFFFFFFFFFFFFF), np.uint64(replica)))


_MASK = (1 << 64) - 1


def derive_seed(seed: int, *labels) -> int:
    """Stable sub-seed for one part of an experiment, e.g. ``derive_seed(s, "sigma", 16)``."""
    h = seed & _MASK
    for lab in labels:
        tag = zlib.crc32(repr(lab).encode())
        h = int(mix64(np.uint64((h ^ (tag * _GOLDEN)) & _MASK)))
    return h
