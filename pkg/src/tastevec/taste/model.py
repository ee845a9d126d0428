"""Taste-vector regressors: recurrent networks trained to land near a
future song vector.

Training follows the sampled-offset procedure: each epoch shuffles the
dataset, every sequence in a batch draws its own prediction offset from a
discrete uniform range, the summed L2 losses of the batch produce one Adam
step, and the parameters with the best validation loss are kept.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ..corpus.types import ListeningEvent, TrainSequence
from ..embeddings.matrix import EmbeddingMatrix
from ..errors import DataError, TrainingDivergedError
from ..nn.adam import AdamOptimizer
from ..nn.layers import LSTMLayer
from ..nn.network import Network
from ..nn.serialize import load_network, save_network
from .context import CONTEXT_VECTOR_DIM, build_context_vector, context_matrix
from .losses import batch_cosine, batch_l2

#: variant -> (input length, offset range) presets
VARIANTS: dict[str, tuple[int, int, int]] = {
    "rPST": (60, 1, 10),
    "rPLT": (60, 25, 50),
    "rHST": (100, 1, 10),
    "rHLT": (100, 25, 50),
}


def draw_offsets(
    rng: np.random.Generator, offset_min: int, offset_max: int, size: int | None = None
):
    """Uniform integer offsets over the inclusive range [offset_min, offset_max]."""
    if not 1 <= offset_min <= offset_max:
        raise ValueError(f"need 1 <= offset_min <= offset_max, got ({offset_min}, {offset_max})")
    return rng.integers(offset_min, offset_max + 1, size=size)


@dataclass
class UserState:
    """Per-user recurrent states for incremental taste updates."""

    states: list  # one entry per recurrent layer; (h,) arrays or (h, c) tuples
    last_timestamp: int | None = None

    def copy(self) -> "UserState":
        states = [
            (s[0].copy(), s[1].copy()) if isinstance(s, tuple) else s.copy()
            for s in self.states
        ]
        return UserState(states=states, last_timestamp=self.last_timestamp)

    def to_bytes(self) -> bytes:
        buf = io.BytesIO()
        flat = []
        kinds = []
        for s in self.states:
            if isinstance(s, tuple):
                kinds.append(1)
                flat.extend(s)
            else:
                kinds.append(0)
                flat.append(s)
        np.savez(
            buf,
            kinds=np.array(kinds, dtype=np.int64),
            last=np.array([-1 if self.last_timestamp is None else self.last_timestamp]),
            *flat,
        )
        return buf.getvalue()

    @classmethod
    def from_bytes(cls, blob: bytes) -> "UserState":
        data = np.load(io.BytesIO(blob))
        kinds = data["kinds"]
        last = int(data["last"][0])
        arrays = [data[f"arr_{i}"] for i in range(len(data.files) - 2)]
        states = []
        pos = 0
        for kind in kinds:
            if kind == 1:
                states.append((arrays[pos], arrays[pos + 1]))
                pos += 2
            else:
                states.append(arrays[pos])
                pos += 1
        return cls(states=states, last_timestamp=None if last < 0 else last)


class TasteRegressor(BaseEstimator):
    """Sequential taste-vector model over song embeddings.

    The variant presets fix the input window and offset range; passing
    explicit ``input_length`` / ``offset_min`` / ``offset_max`` overrides
    them. With ``context_enabled`` the per-step input is the song vector
    concatenated with its play-context vector.
    """

    def __init__(
        self,
        variant: str = "rHST",
        input_length: int | None = None,
        offset_min: int | None = None,
        offset_max: int | None = None,
        hidden_size: int = 50,
        num_recurrent: int = 2,
        dense_size: int | None = None,
        cell: str = "gru",
        loss: str = "l2",
        context_enabled: bool = False,
        time_scaling: str = "log",
        learning_rate: float = 1e-3,
        batch_size: int = 32,
        epochs: int = 10,
        seed: int = 0,
    ):
        self.variant = variant
        self.input_length = input_length
        self.offset_min = offset_min
        self.offset_max = offset_max
        self.hidden_size = hidden_size
        self.num_recurrent = num_recurrent
        self.dense_size = dense_size
        self.cell = cell
        self.loss = loss
        self.context_enabled = context_enabled
        self.time_scaling = time_scaling
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.epochs = epochs
        self.seed = seed

    # -- configuration ----------------------------------------------------

    def _resolved(self) -> tuple[int, int, int]:
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        n, lo, hi = VARIANTS[self.variant]
        n = self.input_length if self.input_length is not None else n
        lo = self.offset_min if self.offset_min is not None else lo
        hi = self.offset_max if self.offset_max is not None else hi
        if not 1 <= lo <= hi:
            raise ValueError(f"need 1 <= offset_min <= offset_max, got ({lo}, {hi})")
        return n, lo, hi

    def _batch_loss(self, preds, targets):
        if self.loss == "l2":
            return batch_l2(preds, targets)
        if self.loss == "cosine":
            return batch_cosine(preds, targets)
        raise ValueError(f"unknown loss {self.loss!r}")

    # -- input assembly ----------------------------------------------------

    def _inputs_for(self, seq: TrainSequence) -> np.ndarray:
        xs = self.embeddings_.take(seq.inputs)
        if self.context_enabled:
            if seq.events is None:
                raise ValueError("context_enabled model needs sequences with events")
            xs = np.hstack([xs, context_matrix(seq.events, self.time_scaling)])
        return xs

    def _batch_tensor(self, sequences: list[TrainSequence]) -> np.ndarray:
        rows = [self._inputs_for(s) for s in sequences]
        return np.stack(rows, axis=1)  # (T, B, D)

    # -- training ----------------------------------------------------------

    def fit(
        self,
        sequences: list[TrainSequence],
        embeddings: EmbeddingMatrix,
        validation: list[TrainSequence] | None = None,
    ):
        if not sequences:
            raise ValueError("training set must be non-empty")
        n, lo, hi = self._resolved()
        for seq in sequences:
            if len(seq.inputs) != n:
                raise ValueError(f"expected input length {n}, got {len(seq.inputs)}")
            if len(seq.targets) < hi:
                raise ValueError(
                    f"targets must reach offset {hi}, got only {len(seq.targets)}"
                )
        self.embeddings_ = embeddings
        input_dim = embeddings.dim + (CONTEXT_VECTOR_DIM if self.context_enabled else 0)
        rng = np.random.default_rng(np.random.SeedSequence(entropy=(self.seed, 0x7A57)))
        self.network_ = Network.taste_architecture(
            input_dim=input_dim,
            hidden_size=self.hidden_size,
            num_recurrent=self.num_recurrent,
            dense_size=self.dense_size,
            output_dim=embeddings.dim,
            cell=self.cell,
            rng=rng,
        )
        params = [arr for _, arr in self.network_.parameters()]
        optimizer = AdamOptimizer(params, learning_rate=self.learning_rate)

        # Validation offsets are drawn once so epoch-to-epoch comparisons and
        # best-snapshot selection are not dominated by resampling noise.
        valid_offsets = None
        if validation:
            valid_offsets = draw_offsets(rng, lo, hi, size=len(validation))

        self.history_ = []
        best_valid = np.inf
        best_params = None
        items = list(sequences)
        for epoch in range(self.epochs):
            order = rng.permutation(len(items))
            total = 0.0
            for start in range(0, len(items), self.batch_size):
                batch = [items[i] for i in order[start : start + self.batch_size]]
                offsets = draw_offsets(rng, lo, hi, size=len(batch))
                xs = self._batch_tensor(batch)
                targets = np.stack(
                    [
                        embeddings.get(seq.targets[off - 1])
                        for seq, off in zip(batch, offsets)
                    ]
                )
                preds = self.network_.forward_sequence(xs)
                losses, grads = self._batch_loss(preds, targets)
                batch_loss = float(losses.sum())
                if not np.isfinite(batch_loss):
                    raise TrainingDivergedError(
                        f"loss diverged at epoch {epoch} batch {start // self.batch_size}",
                        step=epoch,
                    )
                total += batch_loss
                self.network_.zero_grads()
                self.network_.backward(grads)
                optimizer.update([g for _, g in self.network_.gradients()])
            train_loss = total / len(items)

            valid_loss = float("nan")
            if validation:
                valid_loss = self._evaluate(validation, valid_offsets)
                if valid_loss < best_valid:
                    best_valid = valid_loss
                    best_params = [p.copy() for p in params]
            self.history_.append((epoch, train_loss, valid_loss))

        if best_params is not None:
            for p, best in zip(params, best_params):
                p[...] = best
        return self

    def _evaluate(self, sequences: list[TrainSequence], offsets) -> float:
        total = 0.0
        for start in range(0, len(sequences), 256):
            batch = sequences[start : start + 256]
            offs = offsets[start : start + 256]
            xs = self._batch_tensor(batch)
            targets = np.stack(
                [self.embeddings_.get(s.targets[o - 1]) for s, o in zip(batch, offs)]
            )
            preds = self.network_.forward_sequence(xs)
            losses, _ = self._batch_loss(preds, targets)
            total += float(losses.sum())
        return total / len(sequences)

    # -- inference ---------------------------------------------------------

    def taste_vector(self, song_ids, events=None) -> np.ndarray:
        """Taste vector for one (arbitrary-length, non-empty) song sequence."""
        check_is_fitted(self, "network_")
        seq = TrainSequence(
            inputs=tuple(song_ids), targets=(), events=tuple(events) if events else None
        )
        if len(seq.inputs) == 0:
            raise ValueError("song sequence must be non-empty")
        return self.network_.forward_sequence(self._inputs_for(seq))

    def predict(self, sequences: list[TrainSequence]) -> np.ndarray:
        """Taste vectors for a list of equal-length training sequences."""
        check_is_fitted(self, "network_")
        out = np.empty((len(sequences), self.network_.output_dim))
        for start in range(0, len(sequences), 256):
            batch = sequences[start : start + 256]
            out[start : start + len(batch)] = self.network_.forward_sequence(
                self._batch_tensor(batch)
            )
        return out

    # -- incremental serving -----------------------------------------------

    def new_user_state(self) -> UserState:
        check_is_fitted(self, "network_")
        states = []
        for layer in self.network_.recurrent:
            if isinstance(layer, LSTMLayer):
                states.append((np.zeros(layer.hid_dim), np.zeros(layer.hid_dim)))
            else:
                states.append(np.zeros(layer.hid_dim))
        return UserState(states=states)

    def update_user_state(
        self, state: UserState, event: ListeningEvent
    ) -> tuple[UserState, np.ndarray]:
        """Advance by one played song; returns (new state, fresh taste vector).

        Replaying a whole history through this method matches the one-shot
        ``taste_vector`` computation on the same songs.
        """
        check_is_fitted(self, "network_")
        if len(state.states) != len(self.network_.recurrent):
            raise ValueError("user state does not match model architecture")
        x = self.embeddings_.get(event.song_id)
        if self.context_enabled:
            prev = (
                None
                if state.last_timestamp is None
                else ListeningEvent(0, state.last_timestamp, frozenset())
            )
            x = np.concatenate([x, build_context_vector(event, prev, self.time_scaling)])
        h = x
        new_states = []
        for layer, layer_state in zip(self.network_.recurrent, state.states):
            if isinstance(layer, LSTMLayer):
                h, c = layer.step(h, layer_state)
                new_states.append((h, c))
            else:
                h = layer.step(h, layer_state)
                new_states.append(h)
        out = h
        for dense in self.network_.head:
            out = dense.forward(out[None, :])[0]
        return (
            UserState(states=new_states, last_timestamp=event.timestamp),
            out,
        )

    # -- persistence ---------------------------------------------------------

    def save(self, path: str | Path) -> None:
        check_is_fitted(self, "network_")
        n, lo, hi = self._resolved()
        save_network(
            self.network_,
            path,
            extra={
                "kind": "taste",
                "variant": self.variant,
                "input_length": str(n),
                "offset_min": str(lo),
                "offset_max": str(hi),
                "context": "1" if self.context_enabled else "0",
                "time_scaling": self.time_scaling,
                "loss": self.loss,
                "embeddings_hash": self.embeddings_.content_hash(),
            },
        )

    @classmethod
    def load(
        cls, path: str | Path, embeddings: EmbeddingMatrix, verify_hash: bool = True
    ) -> "TasteRegressor":
        network, meta = load_network(path)
        if meta.get("kind") != "taste":
            raise DataError(f"{path}: not a taste model file")
        stored = meta.get("embeddings_hash", "")
        if verify_hash and stored and stored != embeddings.content_hash():
            raise DataError(
                f"{path}: model was trained against different embeddings "
                f"(stored {stored}, loaded {embeddings.content_hash()})"
            )
        model = cls(
            variant=meta["variant"],
            input_length=int(meta["input_length"]),
            offset_min=int(meta["offset_min"]),
            offset_max=int(meta["offset_max"]),
            context_enabled=meta.get("context") == "1",
            time_scaling=meta.get("time_scaling", "log"),
            loss=meta.get("loss", "l2"),
        )
        model.network_ = network
        model.embeddings_ = embeddings
        model.history_ = []
        return model
