"""Reproducible random streams built on SplitMix64.

Every random quantity in the package comes from a SplitMix64 stream
(Steele, Lea & Flood 2014): the state advances by the golden-gamma
constant and each output is the 64-bit finalizer ``mix64`` of the state.
The j-th output of a stream with state ``key`` is therefore
``mix64(key + (j + 1) * GOLDEN_GAMMA)``, a pure function of ``(key, j)``,
which is what lets the compiled and the vectorized simulation kernels
agree bit for bit.

Stream keys are derived by chaining ``mix64`` over the labels, so the
replication ``k`` at sample size ``n`` under ``base_seed`` gets

    key = mix64(mix64(mix64(base_seed) ^ n * GOLDEN_GAMMA) ^ k * MIX_ODD)

independently of how many other streams were consumed before it.
"""

from __future__ import annotations

import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MIX_ODD = 0xD1B54A32D192ED03
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
DOUBLE_UNIT = 2.0 ** -53

# labels for the generator's two sub-streams
GAMMA_LABEL = 0x67616D6D61  # "gamma"
NORMAL_LABEL = 0x6E6F726D  # "norm"


def mix64(z: int) -> int:
    """SplitMix64 finalizer on a Python int (taken modulo 2**64)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def derive_key(*labels: int) -> int:
    """Fold integer labels into a 64-bit stream key."""
    if not labels:
        raise ValueError("at least one label is required")
    key = mix64(labels[0])
    for i, label in enumerate(labels[1:]):
        mult = GOLDEN_GAMMA if i % 2 == 0 else MIX_ODD
        key = mix64(key ^ ((label * mult) & MASK64))
    return key


def replication_key(base_seed: int, n: int, k: int) -> int:
    """Key of replication ``k`` at sample size ``n``."""
    return derive_key(base_seed, n, k)


def replication_keys(base_seed: int, n: int, reps: int) -> np.ndarray:
    """Keys of replications ``0 .. reps-1`` as a uint64 array."""
    head = derive_key(base_seed, n)
    out = np.empty(reps, dtype=np.uint64)
    for k in range(reps):
        out[k] = mix64(head ^ ((k * MIX_ODD) & MASK64))
    return out


def uniform_at(key: int, j: int) -> float:
    """j-th uniform double in [0, 1) of the stream ``key``."""
    z = mix64((key + (j + 1) * GOLDEN_GAMMA) & MASK64)
    return (z >> 11) * DOUBLE_UNIT


def uniform_at_array(keys: np.ndarray, j: int) -> np.ndarray:
    """Vectorized :func:`uniform_at` over a uint64 key array."""
    with np.errstate(over="ignore"):
        z = keys + np.uint64(((j + 1) * GOLDEN_GAMMA) & MASK64)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
        z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(11)).astype(np.float64) * DOUBLE_UNIT


class SplitMix64:
    """Sequential SplitMix64 stream.

    Parameters
    ----------
    key : int
        Initial 64-bit state, usually from :func:`derive_key`.
    """

    def __init__(self, key: int):
        self.key = key & MASK64
        self._j = 0

    def next_u64(self) -> int:
        z = mix64((self.key + (self._j + 1) * GOLDEN_GAMMA) & MASK64)
        self._j += 1
        return z

    def random(self) -> float:
        """Uniform double in [0, 1)."""
        return (self.next_u64() >> 11) * DOUBLE_UNIT

    def below(self, bound: int) -> int:
        """Integer in ``[0, bound)`` by scaling a 53-bit uniform."""
        return int(self.random() * bound)
