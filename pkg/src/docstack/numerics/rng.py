"""Deterministic random numbers.

Algorithm (fixed, so corpora and random weights can be regenerated anywhere):

* Seeding: a 64-bit seed is expanded into four 64-bit state words by four
  successive ``splitmix64`` outputs (Steele, Lea & Flood's mixer with
  increment 0x9E3779B97F4A7C15).
* Stream: ``xoshiro256**`` (Blackman & Vigna). One call yields one 64-bit word.
* Floats: ``(word >> 11) * 2**-53``, uniform on [0, 1).
* Normals: Box-Muller on two consecutive uniforms ``u1, u2`` with
  ``r = sqrt(-2 ln(1 - u1))``, ``z0 = r cos(2 pi u2)``, ``z1 = r sin(2 pi u2)``.
* Bounded integers: rejection sampling on the top bits
  (``word >> (64 - bits)`` redrawn while ``>= n``).
* Bulk arrays (``uniform_array`` and friends) take one word ``s`` from the
  stream, seed ``LANES`` independent xoshiro256** lanes from
  ``splitmix64(s)`` and interleave their outputs lane-major per step.
  This keeps large draws (dropout masks, weight tensors) vectorised while
  remaining a pure function of the parent stream.
"""
from __future__ import annotations

import math

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
LANES = 256


def splitmix64(state: int) -> tuple[int, int]:
    """One splitmix64 step. Returns ``(new_state, output)``."""
    state = (state + GOLDEN) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, z ^ (z >> 31)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


def derive_seed(seed: int, key: str) -> int:
    """Mix a 64-bit seed with a string key (FNV-1a over UTF-8, then splitmix64)."""
    h = 0xCBF29CE484222325
    for b in key.encode("utf-8"):
        h = ((h ^ b) * 0x100000001B3) & MASK64
    _, out = splitmix64((seed ^ h) & MASK64)
    return out


class Rng:
    """xoshiro256** stream with a 256-bit state."""

    def __init__(self, seed: int):
        s = seed & MASK64
        words = []
        for _ in range(4):
            s, out = splitmix64(s)
            words.append(out)
        self.state = words

    @classmethod
    def for_key(cls, seed: int, key: str) -> "Rng":
        return cls(derive_seed(seed, key))

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self.state
        result = (_rotl((s1 * 5) & MASK64, 7) * 9) & MASK64
        t = (s1 << 17) & MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self.state = [s0, s1, s2, s3]
        return result

    def random(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def uniform(self, low: float, high: float) -> float:
        return low + (high - low) * self.random()

    def integers(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        if n <= 0:
            raise ValueError(f"integers() needs n >= 1, got {n}")
        if n == 1:
            return 0
        bits = (n - 1).bit_length()
        while True:
            v = self.next_u64() >> (64 - bits)
            if v < n:
                return v

    def randint(self, low: int, high: int) -> int:
        """Uniform integer in [low, high] inclusive."""
        return low + self.integers(high - low + 1)

    def normal(self) -> float:
        u1 = self.random()
        u2 = self.random()
        return math.sqrt(-2.0 * math.log(1.0 - u1)) * math.cos(2.0 * math.pi * u2)

    def choice(self, seq):
        return seq[self.integers(len(seq))]

    def permutation(self, n: int) -> np.ndarray:
        """Fisher-Yates shuffle of ``range(n)``, walking down from the top."""
        perm = list(range(n))
        for i in range(n - 1, 0, -1):
            j = self.integers(i + 1)
            perm[i], perm[j] = perm[j], perm[i]
        return np.asarray(perm, dtype=np.int64)

    def spawn(self) -> "Rng":
        return Rng(self.next_u64())

    # -- bulk draws -------------------------------------------------------

    def _lane_words(self, n: int) -> np.ndarray:
        seed = self.next_u64()
        s = seed
        init = np.empty((4, LANES), dtype=np.uint64)
        for lane in range(LANES):
            for w in range(4):
                s, out = splitmix64(s)
                init[w, lane] = out
        s0, s1, s2, s3 = (init[w].copy() for w in range(4))
        steps = -(-n // LANES)
        out = np.empty((steps, LANES), dtype=np.uint64)
        u5, u9 = np.uint64(5), np.uint64(9)
        r7, l7 = np.uint64(7), np.uint64(57)
        r45, l45 = np.uint64(45), np.uint64(19)
        sh17 = np.uint64(17)
        with np.errstate(over="ignore"):
            for i in range(steps):
                x = s1 * u5
                out[i] = ((x << r7) | (x >> l7)) * u9
                t = s1 << sh17
                s2 ^= s0
                s3 ^= s1
                s1 ^= s2
                s0 ^= s3
                s2 ^= t
                s3 = (s3 << r45) | (s3 >> l45)
        return out.reshape(-1)[:n]

    def uniform_array(self, shape) -> np.ndarray:
        shape = (shape,) if isinstance(shape, int) else tuple(shape)
        n = int(np.prod(shape)) if shape else 1
        words = self._lane_words(n)
        return ((words >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))).reshape(shape)

    def normal_array(self, shape) -> np.ndarray:
        shape = (shape,) if isinstance(shape, int) else tuple(shape)
        n = int(np.prod(shape)) if shape else 1
        half = -(-n // 2)
        u = self.uniform_array(2 * half).reshape(half, 2)
        r = np.sqrt(-2.0 * np.log1p(-u[:, 0]))
        theta = 2.0 * np.pi * u[:, 1]
        z = np.stack([r * np.cos(theta), r * np.sin(theta)], axis=1).reshape(-1)
        return z[:n].reshape(shape)

    def integers_array(self, n: int, size: int) -> np.ndarray:
        """``size`` integers uniform in [0, n) (multiply-shift on 53-bit uniforms)."""
        if n <= 0:
            raise ValueError(f"integers_array() needs n >= 1, got {n}")
        u = self.uniform_array(size)
        return np.minimum((u * n).astype(np.int64), n - 1)
