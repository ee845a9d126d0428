"""Aggregation baselines: exponential discounting and learned weights.

Both reduce a song-vector history to one taste vector by weighted summation;
the weight model learns its per-position weights with the same sampled-offset
Adam loop used by the recurrent models, plus an L2-norm penalty on the
weight vector.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ..corpus.types import TrainSequence
from ..embeddings.matrix import EmbeddingMatrix
from ..errors import TrainingDivergedError
from ..taste.model import draw_offsets
from ..validation import check_matrix, check_vector


def discount_taste(songs, gamma: float) -> np.ndarray:
    """Sum of song vectors weighted by gamma^(age): last song has weight 1."""
    songs = check_matrix(songs, name="songs")
    if songs.shape[0] == 0:
        raise ValueError("song sequence must be non-empty")
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must lie in [0, 1], got {gamma}")
    k = songs.shape[0]
    weights = gamma ** np.arange(k - 1, -1, -1, dtype=np.float64)
    return weights @ songs


def weight_taste(songs, weights) -> np.ndarray:
    """Weighted sum of song vectors with one free weight per position."""
    songs = check_matrix(songs, name="songs")
    weights = check_vector(weights, dim=songs.shape[0], name="weights")
    return weights @ songs


class DiscountModel(BaseEstimator):
    """Stateless exponential-discount aggregator."""

    def __init__(self, gamma: float = 0.97):
        self.gamma = gamma

    def fit(self, X=None, y=None):
        return self

    def taste_vector(self, song_vectors) -> np.ndarray:
        return discount_taste(song_vectors, self.gamma)


class WeightModel(BaseEstimator):
    """Learned per-position aggregation weights.

    ``history_length`` is the fixed input window k; training minimizes
    ||future_song - sum_j s_j w_j||_2 + reg_lambda * ||w||_2 with one Adam
    step per batch of sampled offsets.
    """

    def __init__(
        self,
        history_length: int,
        reg_lambda: float = 0.001,
        offset_min: int = 1,
        offset_max: int = 10,
        learning_rate: float = 1e-3,
        batch_size: int = 32,
        epochs: int = 10,
        seed: int = 0,
    ):
        self.history_length = history_length
        self.reg_lambda = reg_lambda
        self.offset_min = offset_min
        self.offset_max = offset_max
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.epochs = epochs
        self.seed = seed

    def fit(self, sequences: list[TrainSequence], embeddings: EmbeddingMatrix):
        from ..nn.adam import AdamOptimizer

        if not sequences:
            raise ValueError("training set must be non-empty")
        k = self.history_length
        for seq in sequences:
            if len(seq.inputs) != k:
                raise ValueError(f"expected input length {k}, got {len(seq.inputs)}")
            if len(seq.targets) < self.offset_max:
                raise ValueError("targets must reach offset_max")
        rng = np.random.default_rng(np.random.SeedSequence(entropy=(self.seed, 0x3E16)))
        w = np.full(k, 1.0 / k)
        optimizer = AdamOptimizer([w], learning_rate=self.learning_rate)
        self.history_ = []
        items = list(sequences)
        for epoch in range(self.epochs):
            order = rng.permutation(len(items))
            total = 0.0
            for start in range(0, len(items), self.batch_size):
                batch = [items[i] for i in order[start : start + self.batch_size]]
                offsets = draw_offsets(rng, self.offset_min, self.offset_max, len(batch))
                grad = np.zeros_like(w)
                batch_loss = 0.0
                for seq, off in zip(batch, offsets):
                    S = embeddings.take(seq.inputs)
                    target = embeddings.get(seq.targets[off - 1])
                    pred = w @ S
                    diff = pred - target
                    norm = float(np.linalg.norm(diff))
                    batch_loss += norm
                    if norm > 0:
                        grad += S @ (diff / norm)
                    wnorm = float(np.linalg.norm(w))
                    batch_loss += self.reg_lambda * wnorm
                    if wnorm > 0:
                        grad += self.reg_lambda * w / wnorm
                if not np.isfinite(batch_loss):
                    raise TrainingDivergedError(
                        f"weight-model loss diverged at epoch {epoch}", step=epoch
                    )
                total += batch_loss
                optimizer.update([grad])
            self.history_.append((epoch, total / len(items), float("nan")))
        self.weights_ = w
        self.embeddings_ = embeddings
        return self

    def taste_vector(self, song_vectors) -> np.ndarray:
        check_is_fitted(self, "weights_")
        return weight_taste(song_vectors, self.weights_)

    def save_weights(self, path: str | Path) -> None:
        """Export as TSV rows ``index <TAB> weight`` (1-based positions)."""
        check_is_fitted(self, "weights_")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for j, value in enumerate(self.weights_, start=1):
                fh.write(f"{j}\t{value!r}\n")

    @staticmethod
    def load_weights(path: str | Path) -> np.ndarray:
        """Read a weight TSV back into an array ordered by position."""
        rows = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                idx, value = line.rstrip("\n").split("\t")
                rows.append((int(idx), float(value)))
        rows.sort()
        return np.array([v for _, v in rows], dtype=np.float64)


def train_weight_model(
    sequences: list[TrainSequence],
    embeddings: EmbeddingMatrix,
    history_length: int,
    reg_lambda: float = 0.001,
    offsets: tuple[int, int] = (1, 10),
    learning_rate: float = 1e-3,
    epochs: int = 10,
    seed: int = 0,
) -> WeightModel:
    model = WeightModel(
        history_length=history_length,
        reg_lambda=reg_lambda,
        offset_min=offsets[0],
        offset_max=offsets[1],
        learning_rate=learning_rate,
        epochs=epochs,
        seed=seed,
    )
    return model.fit(sequences, embeddings)
