"""Deterministic sampling on top of splitmix64.

splitmix64 is a tiny public-domain 64-bit generator with published
reference outputs (seed 0 yields 0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4,
0x06C45D188009454F, ...), so seeded splits can be re-derived in any
language without pinning a library version.
"""

_MASK64 = (1 << 64) - 1
_INCREMENT = 0x9E3779B97F4A7C15


class SplitMix64:
    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _INCREMENT) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        """Uniform integer in [0, bound); rejection sampling, no modulo bias."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        limit = ((1 << 64) // bound) * bound
        while True:
            u = self.next_u64()
            if u < limit:
                return u % bound


def sample_indices(n: int, count: int, rng: SplitMix64) -> list[int]:
    """Choose `count` distinct indices from range(n), returned ascending.

    Partial Fisher-Yates over the index pool; ascending output keeps
    survivors in their original relative order.
    """
    if count < 0:
        raise ValueError("count must be non-negative")
    if count > n:
        raise ValueError(f"cannot sample {count} items from a pool of {n}")
    pool = list(range(n))
    for i in range(count):
        j = i + rng.below(n - i)
        pool[i], pool[j] = pool[j], pool[i]
    return sorted(pool[:count])
