"""Deterministic randomness for splits, pair sampling, and questionnaires.

Every seeded operation in this package draws from SeededRng, a thin layer
over the Philox4x64-10 counter-based bit generator. Only the raw 64-bit
output stream is consumed; bounded integers come from unbiased rejection
sampling and shuffles are descending Fisher-Yates, so the exact procedure
is pinned down by this module plus the published Philox definition.
"""

from __future__ import annotations

import numpy as np

_U64 = 1 << 64
_BLOCK = 1024


class SeededRng:
    """Reproducible random source keyed by a 64-bit integer seed."""

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._bits = np.random.Philox(key=self.seed & (_U64 - 1))
        self._buf = np.empty(0, dtype=np.uint64)
        self._pos = 0

    def _next64(self) -> int:
        if self._pos >= len(self._buf):
            self._buf = self._bits.random_raw(_BLOCK)
            self._pos = 0
        value = int(self._buf[self._pos])
        self._pos += 1
        return value

    def randbelow(self, k: int) -> int:
        """Uniform integer in [0, k) via rejection sampling on raw words."""
        if k <= 0:
            raise ValueError(f"randbelow requires k >= 1, got {k}")
        limit = _U64 - (_U64 % k)
        while True:
            u = self._next64()
            if u < limit:
                return u % k

    def coin(self) -> bool:
        return self.randbelow(2) == 1

    def uniform(self) -> float:
        """Float in [0, 1) with 53 random bits."""
        return (self._next64() >> 11) * 2.0**-53

    def shuffle(self, items: list) -> None:
        """In-place descending Fisher-Yates."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]

    def sample(self, items: list, k: int) -> list:
        """k distinct items, selection-order Fisher-Yates over a copy."""
        n = len(items)
        if not 0 <= k <= n:
            raise ValueError(f"cannot sample {k} items from {n}")
        pool = list(items)
        for i in range(k):
            j = i + self.randbelow(n - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]

    def sample_indices(self, n: int, k: int) -> np.ndarray:
        """Like sample(range(n), k) without materializing a Python list."""
        if not 0 <= k <= n:
            raise ValueError(f"cannot sample {k} items from {n}")
        pool = np.arange(n)
        for i in range(k):
            j = i + self.randbelow(n - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]

    def weighted_index(self, cumulative: np.ndarray) -> int:
        """Index drawn proportionally to weights, given their cumulative sum."""
        total = float(cumulative[-1])
        if not total > 0.0:
            raise ValueError("weights must have a positive sum")
        u = self.uniform() * total
        idx = int(np.searchsorted(cumulative, u, side="right"))
        return min(idx, len(cumulative) - 1)
