"""Seeded pseudo-random generator used by all instance generators.

The generator is SplitMix64 (Steele, Lea, Flood 2014): state advances by
the 64-bit golden-gamma constant 0x9E3779B97F4A7C15 and each output is
the finalized mix

    z  = state
    z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9
    z ^= z >> 27;  z *= 0x94D049BB133111EB
    z ^= z >> 31

with all arithmetic mod 2^64.  The algorithm is fixed and documented so
that generated instances are bit-reproducible from a seed across
implementations and platforms.  Bounded draws use rejection sampling
(never bare modulo), which keeps them exactly uniform.

Monte Carlo experiments that need bulk vectorised sampling use numpy's
PCG64 streams instead (see `experiments`); SplitMix64 is the contract
for anything that becomes part of a generated artifact.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


class SplitMix64:
    """Deterministic 64-bit generator; one instance per generation task."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection; n must be positive."""
        if n <= 0:
            raise ValueError(f"below() needs a positive bound, got {n}")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n

    def sample_without_replacement(self, n: int, k: int) -> list[int]:
        """k distinct values from [0, n), in draw order (partial Fisher-Yates)."""
        if not 0 <= k <= n:
            raise ValueError(f"cannot draw {k} distinct values from [0, {n})")
        pool = list(range(n))
        out = []
        for i in range(k):
            j = i + self.below(n - i)
            pool[i], pool[j] = pool[j], pool[i]
            out.append(pool[i])
        return out

    def spawn(self, index: int) -> "SplitMix64":
        """Derived stream for worker `index`; distinct indices give
        independent-looking streams from the same master seed."""
        child = SplitMix64(self._state ^ (0xB5297A4D3F84D5B5 * (index + 1) & _MASK64))
        child.next_u64()
        return child
