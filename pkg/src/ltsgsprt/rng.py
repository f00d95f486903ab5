"""Counter-based random numbers.

Every draw is a pure function of a 64-bit stream key and a counter, so a
replication's samples do not depend on batch size, chunking or worker count.
Keys are derived by hashing a path such as (seed, point, run, replication,
sensor) with the SplitMix64 finalizer.
"""

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_TWO = np.uint64(2)
_ONE = np.uint64(1)
_INV_2_53 = 1.0 / 9007199254740992.0
_TWO_PI = 2.0 * np.pi


def mix64(x):
    """SplitMix64 finalizer on a uint64 array (wrapping arithmetic)."""
    x = np.asarray(x, dtype=np.uint64)
    with np.errstate(over="ignore"):
        x = x + _GOLDEN
        x = (x ^ (x >> _S30)) * _M1
        x = (x ^ (x >> _S27)) * _M2
        return x ^ (x >> _S31)


def derive_key(*path):
    """Hash a sequence of nonnegative integers (or uint64 arrays) into stream keys."""
    key = np.zeros((), dtype=np.uint64)
    for part in path:
        part = np.asarray(part).astype(np.uint64)
        key = mix64(key ^ mix64(part))
    return key


def uniform(key, counter):
    """Uniform draws in the open interval (0, 1), one per (key, counter) pair."""
    bits = mix64(np.asarray(key, dtype=np.uint64) ^ mix64(np.asarray(counter, dtype=np.uint64)))
    return ((bits >> _S11).astype(np.float64) + 0.5) * _INV_2_53


def normal(key, counter):
    """Standard normal draws via Box-Muller on counters 2c and 2c+1."""
    c = np.asarray(counter, dtype=np.uint64)
    with np.errstate(over="ignore"):
        u1 = uniform(key, c * _TWO)
        u2 = uniform(key, c * _TWO + _ONE)
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(_TWO_PI * u2)


class Stream:
    """A single sample stream: the t-th normal draw is ``stream.normal(t)``."""

    def __init__(self, key):
        self.key = np.uint64(key)
        self.counter = 0

    @classmethod
    def from_path(cls, *path):
        return cls(derive_key(*path))

    def next_normal(self):
        z = float(normal(self.key, self.counter))
        self.counter += 1
        return z
