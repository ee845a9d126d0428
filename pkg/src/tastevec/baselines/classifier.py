"""Catalog-wide softmax classifier baseline.

The taste-network trunk is kept intact (its 40-dim output included) and a
final dense layer widens to one score per vocabulary song. Training uses the
same sampled-offset loop as the regression models with either a categorical
cross-entropy loss or a pairwise BPR loss against Zipf-sampled negatives.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ..corpus.types import TrainSequence
from ..embeddings.matrix import EmbeddingMatrix
from ..errors import DataError, TrainingDivergedError
from ..nn.adam import AdamOptimizer
from ..nn.layers import DenseLayer, sigmoid
from ..nn.network import Network
from ..nn.serialize import load_network, save_network
from ..taste.model import draw_offsets
from .zipf import ZipfSampler


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - np.max(logits, axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def cross_entropy_loss(logits, target_index: int) -> float:
    """-log softmax(logits)[target], computed stably from raw logits."""
    logits = np.asarray(logits, dtype=np.float64)
    if not 0 <= target_index < logits.shape[-1]:
        raise ValueError(f"target index {target_index} out of range")
    shifted = logits - logits.max()
    return float(np.log(np.exp(shifted).sum()) - shifted[target_index])


def bpr_loss(logits, positive_index: int, negatives, reg_coef: float = 0.0) -> float:
    """Mean pairwise -log sigmoid(positive - negative) over sampled negatives.

    The optional penalty anchors the (otherwise shift-invariant) scores by
    squaring the summed positive and negative output values.
    """
    logits = np.asarray(logits, dtype=np.float64)
    negatives = np.asarray(list(negatives), dtype=np.int64)
    if negatives.size == 0:
        raise ValueError("need at least one negative sample")
    margins = logits[positive_index] - logits[negatives]
    core = float(-np.log(sigmoid(margins)).mean())
    if reg_coef:
        total = float(logits[positive_index] + logits[negatives].sum())
        core += reg_coef * total * total
    return core


class SoftmaxClassifier(BaseEstimator):
    """Next-song classifier over the whole vocabulary.

    ``loss`` selects cross-entropy or BPR training. ``scores`` returns
    softmax probabilities in cross-entropy mode and raw logits in BPR mode
    (the sigmoid lives inside the BPR loss).
    """

    def __init__(
        self,
        loss: str = "cross_entropy",
        num_negatives: int = 100,
        zipf_exponent: float = 1.05,
        reg_coef: float = 1e-4,
        hidden_size: int = 50,
        num_recurrent: int = 2,
        dense_size: int | None = None,
        offset_min: int = 1,
        offset_max: int = 10,
        learning_rate: float = 1e-3,
        batch_size: int = 32,
        epochs: int = 5,
        seed: int = 0,
    ):
        self.loss = loss
        self.num_negatives = num_negatives
        self.zipf_exponent = zipf_exponent
        self.reg_coef = reg_coef
        self.hidden_size = hidden_size
        self.num_recurrent = num_recurrent
        self.dense_size = dense_size
        self.offset_min = offset_min
        self.offset_max = offset_max
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.epochs = epochs
        self.seed = seed

    def _forward(self, xs: np.ndarray) -> np.ndarray:
        trunk_out = self.trunk_.forward_sequence(xs)
        return self.output_.forward(trunk_out)

    def _backward(self, dlogits: np.ndarray) -> None:
        grad = self.output_.backward(dlogits)
        self.trunk_.backward(grad)

    def fit(
        self,
        sequences: list[TrainSequence],
        embeddings: EmbeddingMatrix,
    ):
        if self.loss not in ("cross_entropy", "bpr"):
            raise ValueError(f"unknown loss {self.loss!r}")
        if not sequences:
            raise ValueError("training set must be non-empty")
        n = len(sequences[0].inputs)
        vocab_size = len(embeddings)
        rng = np.random.default_rng(np.random.SeedSequence(entropy=(self.seed, 0xC1A5)))
        self.embeddings_ = embeddings
        self.vocab_size_ = vocab_size
        self.trunk_ = Network.taste_architecture(
            input_dim=embeddings.dim,
            hidden_size=self.hidden_size,
            num_recurrent=self.num_recurrent,
            dense_size=self.dense_size,
            output_dim=embeddings.dim,
            rng=rng,
        )
        self.output_ = DenseLayer(embeddings.dim, vocab_size, activation="linear", rng=rng)
        params = [arr for _, arr in self.trunk_.parameters()]
        params += [arr for _, arr in self.output_.params()]
        optimizer = AdamOptimizer(params, learning_rate=self.learning_rate)
        sampler = ZipfSampler(vocab_size, exponent=self.zipf_exponent)

        self.history_ = []
        items = list(sequences)
        for epoch in range(self.epochs):
            order = rng.permutation(len(items))
            total = 0.0
            for start in range(0, len(items), self.batch_size):
                batch = [items[i] for i in order[start : start + self.batch_size]]
                offsets = draw_offsets(rng, self.offset_min, self.offset_max, len(batch))
                xs = np.stack([embeddings.take(s.inputs) for s in batch], axis=1)
                logits = self._forward(xs)
                dlogits = np.zeros_like(logits)
                batch_loss = 0.0
                for row, (seq, off) in enumerate(zip(batch, offsets)):
                    target = embeddings.vocab.index_of[seq.targets[off - 1]]
                    if self.loss == "cross_entropy":
                        batch_loss += cross_entropy_loss(logits[row], target)
                        p = softmax(logits[row])
                        dlogits[row] = p
                        dlogits[row, target] -= 1.0
                    else:
                        heard = {
                            embeddings.vocab.index_of[s] + 1
                            for s in set(seq.inputs) | set(seq.targets)
                        }
                        negs = sampler.sample_many(
                            self.num_negatives, exclude=heard, rng=rng
                        ) - 1
                        batch_loss += bpr_loss(logits[row], target, negs, self.reg_coef)
                        s_neg = sigmoid(logits[row, negs] - logits[row, target])
                        np.add.at(dlogits[row], negs, s_neg / self.num_negatives)
                        dlogits[row, target] -= float(s_neg.sum()) / self.num_negatives
                        if self.reg_coef:
                            total_out = float(
                                logits[row, target] + logits[row, negs].sum()
                            )
                            anchor = 2.0 * self.reg_coef * total_out
                            dlogits[row, target] += anchor
                            np.add.at(dlogits[row], negs, anchor)
                if not np.isfinite(batch_loss):
                    raise TrainingDivergedError(
                        f"classifier loss diverged at epoch {epoch}", step=epoch
                    )
                total += batch_loss
                self.trunk_.zero_grads()
                self.output_.zero_grads()
                self._backward(dlogits)
                grads = [g for _, g in self.trunk_.gradients()]
                grads += [g for _, g in self.output_.grads()]
                optimizer.update(grads)
            self.history_.append((epoch, total / len(items), float("nan")))
        return self

    def scores(self, song_ids) -> np.ndarray:
        """Catalog-wide scores for one input sequence."""
        check_is_fitted(self, "trunk_")
        xs = self.embeddings_.take(song_ids)
        logits = self._forward(xs[:, None, :])[0]
        if self.loss == "cross_entropy":
            return softmax(logits)
        return logits

    def save(self, path: str | Path) -> None:
        check_is_fitted(self, "trunk_")
        network = Network(self.trunk_.recurrent, [*self.trunk_.head, self.output_])
        save_network(
            network,
            path,
            extra={
                "kind": "classifier",
                "loss": self.loss,
                "offset_min": str(self.offset_min),
                "offset_max": str(self.offset_max),
                "embeddings_hash": self.embeddings_.content_hash(),
            },
        )

    @classmethod
    def load(
        cls, path: str | Path, embeddings: EmbeddingMatrix, verify_hash: bool = True
    ) -> "SoftmaxClassifier":
        network, meta = load_network(path)
        if meta.get("kind") != "classifier":
            raise DataError(f"{path}: not a classifier model file")
        stored = meta.get("embeddings_hash", "")
        if verify_hash and stored and stored != embeddings.content_hash():
            raise DataError(f"{path}: classifier embeddings hash mismatch")
        model = cls(
            loss=meta.get("loss", "cross_entropy"),
            offset_min=int(meta.get("offset_min", 1)),
            offset_max=int(meta.get("offset_max", 10)),
        )
        model.trunk_ = Network(network.recurrent, network.head[:-1])
        model.output_ = network.head[-1]
        model.embeddings_ = embeddings
        model.vocab_size_ = model.output_.out_dim
        model.history_ = []
        return model
