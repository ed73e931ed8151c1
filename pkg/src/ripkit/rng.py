"""Counter-based deterministic randomness for reproducible experiments.

The generator is pinned bit-exactly as part of the on-disk
reproducibility contract, so records regenerate byte-identically on any
platform:

* word stream: output_i = mix64(seed + (i + 1) * GOLDEN) where mix64 is
  the standard 64-bit finalizer (xor-shift 30/27/31 with multipliers
  0xBF58476D1CE4E5B9 and 0x94D049BB133111EB) and GOLDEN is the 64-bit
  golden-ratio increment 0x9E3779B97F4A7C15, all mod 2^64;
* uniforms in [0, 1) take the top 53 bits: (w >> 11) * 2^-53;
* normals come from Box-Muller pairs, cosine branch first, with
  u1 in (0, 1] from ((w >> 11) + 1) * 2^-53 (log-safe) and u2 in [0, 1);
* uniform k-subsets use a partial Fisher-Yates pass over 0..p-1;
* derived seeds: derive_seed(s, j) = mix64(s + (j + 1) * GOLDEN).

Being a pure counter scheme, any value can be regenerated independently
of how the stream was consumed before it.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import PreconditionError

__all__ = ["CounterRng", "derive_seed", "mix64"]

GOLDEN = 0x9E3779B97F4A7C15
_MIX_1 = 0xBF58476D1CE4E5B9
_MIX_2 = 0x94D049BB133111EB
_MASK = (1 << 64) - 1
_INV_2_53 = 2.0**-53


def _mix64_array(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.uint64)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX_1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX_2)
    return z ^ (z >> np.uint64(31))


def mix64(value: int) -> int:
    """The scalar 64-bit finalizer used everywhere in the scheme."""
    z = value & _MASK
    z = ((z ^ (z >> 30)) * _MIX_1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX_2) & _MASK
    return (z ^ (z >> 31)) & _MASK


def derive_seed(seed: int, index: int) -> int:
    """Child seed number `index` of `seed`; identical to word `index`
    of the parent's output stream."""
    if index < 0:
        raise PreconditionError(f"index must be >= 0, got {index}")
    return mix64((int(seed) + (index + 1) * GOLDEN) & _MASK)


class CounterRng:
    """Deterministic stream over the counter scheme documented above."""

    def __init__(self, seed: int):
        self.seed = int(seed) & _MASK
        self.counter = 0

    def words(self, count: int) -> np.ndarray:
        """Next `count` raw 64-bit words as a uint64 array."""
        n = int(count)
        if n < 0:
            raise PreconditionError(f"count must be >= 0, got {count}")
        idx = np.arange(self.counter + 1, self.counter + n + 1, dtype=np.uint64)
        self.counter += n
        return _mix64_array(np.uint64(self.seed) + idx * np.uint64(GOLDEN))

    def uniform(self, count: int) -> np.ndarray:
        """i.i.d. uniforms in [0, 1)."""
        return (self.words(count) >> np.uint64(11)).astype(np.float64) * _INV_2_53

    def normal(self, count: int) -> np.ndarray:
        """i.i.d. standard normals via Box-Muller, two words per pair."""
        n = int(count)
        if n < 0:
            raise PreconditionError(f"count must be >= 0, got {count}")
        pairs = (n + 1) // 2
        w = self.words(2 * pairs)
        u1 = ((w[0::2] >> np.uint64(11)).astype(np.float64) + 1.0) * _INV_2_53
        u2 = (w[1::2] >> np.uint64(11)).astype(np.float64) * _INV_2_53
        radius = np.sqrt(-2.0 * np.log(u1))
        angle = 2.0 * math.pi * u2
        out = np.empty(2 * pairs)
        out[0::2] = radius * np.cos(angle)
        out[1::2] = radius * np.sin(angle)
        return out[:n]

    def rademacher(self, count: int) -> np.ndarray:
        """i.i.d. +-1 from the top bit of each word."""
        return 1.0 - 2.0 * (self.words(count) >> np.uint64(63)).astype(np.float64)

    def integers_below(self, bounds) -> np.ndarray:
        """One integer in [0, bound_i) per entry (64-bit modulo; the
        bias is < bound / 2^64, negligible for desk-scale bounds)."""
        b = np.asarray(bounds, dtype=np.uint64)
        if b.size and int(b.min()) < 1:
            raise PreconditionError("bounds must be positive")
        return (self.words(b.size) % b).astype(np.intp)

    def subset(self, p: int, k: int) -> tuple[int, ...]:
        """Uniform size-k subset of range(p), sorted; partial Fisher-Yates."""
        pp, kk = int(p), int(k)
        if not (0 <= kk <= pp):
            raise PreconditionError(f"need 0 <= k <= p, got k={k}, p={p}")
        pool = list(range(pp))
        draws = self.integers_below([pp - i for i in range(kk)]) if kk else []
        for i in range(kk):
            j = i + int(draws[i])
            pool[i], pool[j] = pool[j], pool[i]
        return tuple(sorted(pool[:kk]))
