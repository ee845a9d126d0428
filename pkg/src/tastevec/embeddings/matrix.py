"""Embedding matrix container and its on-disk text format.

File format: first line ``N D`` (ASCII decimals, space separated), then N
lines ``song_id v1 ... vD``. Values are written in shortest exact decimal
form (always round-trippable, never fewer meaningful digits than the float
carries), so reading a written file reproduces the matrix bit for bit.
"""

from __future__ import annotations

import hashlib
from pathlib import Path

import numpy as np

from ..errors import DataError
from ..validation import check_finite
from .vocab import Vocabulary


class EmbeddingMatrix:
    """Learned song vectors, row-aligned with a Vocabulary."""

    def __init__(self, vocab: Vocabulary, vectors: np.ndarray):
        vectors = np.asarray(vectors, dtype=np.float64)
        if vectors.ndim != 2 or vectors.shape[0] != len(vocab):
            raise ValueError(
                f"vectors must be ({len(vocab)}, D), got {vectors.shape}"
            )
        check_finite(vectors, "embedding vectors")
        self.vocab = vocab
        self.vectors = vectors

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return self.vectors.shape[0]

    def __contains__(self, song_id: int) -> bool:
        return song_id in self.vocab

    def get(self, song_id: int) -> np.ndarray:
        return self.vectors[self.vocab.index_of[int(song_id)]]

    def take(self, song_ids) -> np.ndarray:
        """Stack the vectors for a sequence of song ids, in order."""
        return self.vectors[self.vocab.indices(song_ids)]

    def content_hash(self) -> str:
        """Stable digest of the vocabulary and vector values."""
        h = hashlib.sha256()
        h.update(self.vocab.song_ids.tobytes())
        h.update(self.vectors.tobytes())
        return h.hexdigest()[:16]

    def save(self, path: str | Path) -> None:
        n, d = self.vectors.shape
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"{n} {d}\n")
            for i in range(n):
                values = " ".join(repr(float(v)) for v in self.vectors[i])
                fh.write(f"{self.vocab.song_ids[i]} {values}\n")

    @classmethod
    def load(cls, path: str | Path) -> "EmbeddingMatrix":
        with open(path, encoding="utf-8") as fh:
            header = fh.readline().split()
            if len(header) != 2:
                raise DataError(f"{path}: malformed embedding header")
            n, d = int(header[0]), int(header[1])
            ids = np.empty(n, dtype=np.int64)
            vectors = np.empty((n, d), dtype=np.float64)
            for i in range(n):
                parts = fh.readline().split()
                if len(parts) != d + 1:
                    raise DataError(f"{path}: row {i} has {len(parts) - 1} values, expected {d}")
                ids[i] = int(parts[0])
                vectors[i] = [float(p) for p in parts[1:]]
        vocab = Vocabulary(ids, np.ones(n, dtype=np.int64))
        return cls(vocab, vectors)
