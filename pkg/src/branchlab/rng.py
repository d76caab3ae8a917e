"""Portable xoshiro256** generator seeded through SplitMix64.

The stream is defined bit-for-bit so that any implementation of the same
two published algorithms reproduces identical collapse outcomes:

* state seeding: four successive SplitMix64 outputs from the 64-bit seed;
* uniform doubles: ``(next() >> 11) * 2**-53``, i.e. 53 random bits in [0, 1).
"""
from __future__ import annotations

MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> tuple[int, int]:
    """Return ``(new_state, output)``."""
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return x, z ^ (z >> 31)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class Xoshiro256StarStar:
    __slots__ = ("_s",)

    def __init__(self, seed: int):
        if not (0 <= seed <= MASK64):
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
        s = []
        x = seed
        for _ in range(4):
            x, out = splitmix64(x)
            s.append(out)
        self._s = s

    def next_u64(self) -> int:
        s = self._s
        result = (_rotl((s[1] * 5) & MASK64, 7) * 9) & MASK64
        t = (s[1] << 17) & MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def random(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))
