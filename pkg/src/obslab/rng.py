"""Portable seeded random stream.

The generator is xorshift64* seeded through one round of splitmix64, so the
coefficient streams are reproducible in any language with 64-bit unsigned
arithmetic:

    seed  -> x = splitmix64(seed); if x == 0: x = 0x9E3779B97F4A7C15
    next  -> x ^= x >> 12; x ^= x << 25; x ^= x >> 27
             return (x * 0x2545F4914F6CDD1D) mod 2**64
    uniform -> (next >> 11) * 2**-53        in [0, 1)
"""

import numpy as np

_MASK = (1 << 64) - 1
_MULT = 0x2545F4914F6CDD1D
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(z):
    z = (z + _GOLDEN) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


class Xorshift64Star:
    """xorshift64* generator with a splitmix64-scrambled seed.

    Parameters
    ----------
    seed : int
        Any integer; reduced modulo 2**64.
    """

    def __init__(self, seed):
        x = splitmix64(int(seed) & _MASK)
        self._x = x if x != 0 else _GOLDEN

    def next_u64(self):
        x = self._x
        x ^= x >> 12
        x ^= (x << 25) & _MASK
        x ^= x >> 27
        self._x = x
        return (x * _MULT) & _MASK

    def uniform(self, size=None):
        """Uniform doubles on [0, 1) with 53 random bits each."""
        if size is None:
            return (self.next_u64() >> 11) * 2.0**-53
        n = int(np.prod(size))
        out = np.fromiter(((self.next_u64() >> 11) for _ in range(n)),
                          dtype=np.float64, count=n)
        return (out * 2.0**-53).reshape(size)

    def symmetric(self, size=None):
        """Uniform on [-1, 1)."""
        return 2.0 * self.uniform(size) - 1.0

    def complex_symmetric(self, n):
        """n complex numbers, real and imaginary parts drawn in that order."""
        v = self.symmetric(2 * n)
        return v[0::2] + 1j * v[1::2]
