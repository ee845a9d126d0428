"""Truncated Zipf sampling over popularity ranks 1..N.

The idealized rank distribution k^-z normalizes over an infinite support;
on a finite catalog we renormalize over ranks 1..N so sampling is exact.
Draws that hit an excluded rank are rejected and retried.
"""

from __future__ import annotations

import numpy as np


class ZipfSampler:
    def __init__(
        self,
        size: int,
        exponent: float = 1.05,
        seed: int = 0,
        max_attempts: int = 1000,
    ):
        if size < 1:
            raise ValueError("size must be >= 1")
        if exponent <= 0:
            raise ValueError("exponent must be positive")
        self.size = size
        self.exponent = exponent
        self.max_attempts = max_attempts
        weights = np.arange(1, size + 1, dtype=np.float64) ** (-exponent)
        self._probs = weights / weights.sum()
        self._cdf = np.cumsum(self._probs)
        self._cdf[-1] = 1.0
        self._rng = np.random.default_rng(np.random.SeedSequence(entropy=(seed, 0x21BF)))

    def probabilities(self) -> np.ndarray:
        """Exact truncated rank probabilities, summing to 1."""
        return self._probs.copy()

    def sample(self, exclude=None, rng: np.random.Generator | None = None) -> int:
        """Draw one rank in 1..N, rejecting members of ``exclude``."""
        rng = rng or self._rng
        exclude = exclude or ()
        for _ in range(self.max_attempts):
            rank = int(np.searchsorted(self._cdf, rng.random(), side="right")) + 1
            if rank not in exclude:
                return rank
        raise RuntimeError(
            f"no admissible rank found in {self.max_attempts} attempts"
        )

    def sample_many(
        self, n: int, exclude=None, rng: np.random.Generator | None = None
    ) -> np.ndarray:
        rng = rng or self._rng
        draws = np.searchsorted(self._cdf, rng.random(n), side="right") + 1
        if exclude:
            for i in range(n):
                if draws[i] in exclude:
                    draws[i] = self.sample(exclude, rng)
        return draws.astype(np.int64)


def zipf_sample(sampler: ZipfSampler, exclude=None, rng=None) -> int:
    return sampler.sample(exclude=exclude, rng=rng)
