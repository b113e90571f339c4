"""Counter-based random streams keyed by ``(seed, stream index)``.

Each stream is a Philox4x64 generator whose 128-bit key packs the 64-bit
experiment seed and the stream index, so trial ``t`` of an experiment always
sees the same bits no matter how trials are scheduled.  Only ``random_raw``
words are consumed; their byte order is pinned to little-endian before bits
are unpacked.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def bit_generator(seed: int, stream: int = 0) -> np.random.Philox:
    return np.random.Philox(key=((stream & _MASK64) << 64) | (seed & _MASK64))


def random_words(seed: int, stream: int, count: int) -> np.ndarray:
    return np.asarray(bit_generator(seed, stream).random_raw(count), dtype=np.uint64)


def random_bits(seed: int, stream: int, n: int) -> np.ndarray:
    """``n`` fair bits (uint8 0/1) from one stream."""
    words = random_words(seed, stream, -(-n // 64))
    raw = words.astype("<u8").view(np.uint8)
    return np.unpackbits(raw, bitorder="little")[:n]


def bits_matrix(seed: int, streams: range, n: int) -> np.ndarray:
    """One row of ``n`` bits per stream index."""
    return np.stack([random_bits(seed, s, n) for s in streams])


class UniformIntSampler:
    """Sample integers uniformly from ``[1, bound]`` by rejection.

    Draws ``(bound - 1).bit_length()``-bit strings from 64-bit words and rejects
    values ``>= bound``, so there is no modulo bias for big bounds.
    """

    def __init__(self, seed: int, stream: int, bound: int):
        if bound < 1:
            raise ValueError(f"bound must be >= 1, got {bound}")
        self.bound = bound
        self._bits = (bound - 1).bit_length()
        self._words_per = max(1, -(-self._bits // 64))
        self._gen = bit_generator(seed, stream)

    def draw(self) -> int:
        if self.bound == 1:
            return 1
        excess = 64 * self._words_per - self._bits
        while True:
            words = self._gen.random_raw(self._words_per)
            value = 0
            for w in np.atleast_1d(words):
                value = (value << 64) | int(w)
            value >>= excess
            if value < self.bound:
                return value + 1

    def sample(self, count: int) -> list[int]:
        return [self.draw() for _ in range(count)]
