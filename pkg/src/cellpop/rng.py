"""Counter-based, splittable random streams.

Every random number in the package is a pure function of a 64-bit seed, a
lineage of integer contexts (realization, time step, cell, particle, purpose)
and a draw counter.  The mixing function is the SplitMix64 finalizer, so the
``i``-th variate of a stream is ``mix64(key + (i + 1) * GAMMA)``.  Nothing is
shared between tasks, which makes results independent of the order in which
cells or particles are processed and of the number of worker processes.

Numba-compiled twins of the mixing routines live at the bottom of the module;
they produce bit-identical values to the pure Python / numpy versions.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numba
import numpy as np

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_SEED_SALT = 0x5851F42D4C957F2D
_CHILD_SALT = 0xD1B54A32D192ED03
_INV_2_53 = 1.0 / 9007199254740992.0


class Purpose(IntEnum):
    """Lineage tags that keep streams used for different jobs apart."""

    INIT = 1
    EMISSION = 2
    ROULETTE = 3
    ALLOCATION = 4
    SCATTERING = 5
    CENSUS = 6


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def _child_hash(parent: int, child: int) -> int:
    # mix64 is a bijection of 64-bit words, so this is injective in ``child``
    return mix64(parent ^ mix64((child + _CHILD_SALT) & MASK64))


@dataclass(frozen=True)
class StreamKey:
    """Seed plus an ordered lineage of context integers."""

    seed: int
    lineage: tuple[int, ...] = ()
    hash64: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 0 <= self.seed <= MASK64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        h = mix64(self.seed ^ _SEED_SALT)
        for c in self.lineage:
            h = _child_hash(h, int(c))
        object.__setattr__(self, "lineage", tuple(int(c) for c in self.lineage))
        object.__setattr__(self, "hash64", h)

    def derive(self, *contexts: int) -> "StreamKey":
        return derive(self, *contexts)

    def stream(self) -> "Stream":
        return Stream(self)


def derive(parent: StreamKey, *contexts: int) -> StreamKey:
    """Child key obtained by appending ``contexts`` to the parent's lineage."""
    contexts = tuple(int(c) for c in contexts)
    h = parent.hash64
    for c in contexts:
        h = _child_hash(h, c)
    child = object.__new__(StreamKey)
    object.__setattr__(child, "seed", parent.seed)
    object.__setattr__(child, "lineage", parent.lineage + contexts)
    object.__setattr__(child, "hash64", h)
    return child


def _to_unit(bits):
    return (bits >> 11) * _INV_2_53


def uniform_at(key_hash: int, counters) -> np.ndarray:
    """Variates at explicit counter positions of the stream ``key_hash``.

    Vectorized; ``counters`` is any non-negative integer array-like.
    """
    ctr = np.asarray(counters, dtype=np.uint64)
    z = np.uint64(key_hash) + (ctr + np.uint64(1)) * np.uint64(GAMMA)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(11)).astype(np.float64) * _INV_2_53


class Stream:
    """Sequential view over a counter-based stream.

    Cheap to create; one per task.  ``uniform01`` and ``uniforms`` advance an
    internal counter, ``at`` reads arbitrary positions without advancing.
    """

    __slots__ = ("key", "_h", "counter")

    def __init__(self, key: StreamKey, counter: int = 0):
        self.key = key
        self._h = key.hash64
        self.counter = counter

    def uniform01(self) -> float:
        i = self.counter
        self.counter += 1
        return _to_unit(mix64(self._h + (i + 1) * GAMMA))

    def uniforms(self, n: int) -> np.ndarray:
        start = self.counter
        self.counter += n
        return uniform_at(self._h, np.arange(start, start + n, dtype=np.uint64))

    def at(self, counters) -> np.ndarray:
        return uniform_at(self._h, counters)


def uniform01(stream: Stream) -> float:
    return stream.uniform01()


# --- numba twins -----------------------------------------------------------

@numba.njit(cache=True, inline="always")
def nb_mix64(z):
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


@numba.njit(cache=True, inline="always")
def nb_child_hash(parent, child):
    return nb_mix64(parent ^ nb_mix64(np.uint64(child) + np.uint64(_CHILD_SALT)))


@numba.njit(cache=True, inline="always")
def nb_uniform(key_hash, counter):
    z = nb_mix64(key_hash + (np.uint64(counter) + np.uint64(1)) * np.uint64(GAMMA))
    return np.float64(z >> np.uint64(11)) * _INV_2_53
