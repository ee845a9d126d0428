"""CBoW embedding training with negative sampling, from scratch.

Every playlist position is one SGD step: the window's context vectors are
averaged, a logistic objective contrasts the true center song against
sampled negatives, and both weight tables are updated in place. The inner
loop is JIT-compiled; training is single-threaded and fully deterministic
for a given seed.
"""

from __future__ import annotations

import numpy as np
from numba import njit
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ..corpus.types import Catalog, Playlist
from ..errors import TrainingDivergedError
from .matrix import EmbeddingMatrix
from .vocab import Vocabulary, build_vocabulary

_NEG_POWER = 0.75  # unigram counts raised to 3/4 for negative sampling
_EXP_CLIP = 30.0


@njit(cache=True, inline="always")
def _next_rand(state):
    # xorshift64: fast, deterministic, good enough for sampling table slots
    s = state[0]
    s ^= s << np.uint64(13)
    s ^= s >> np.uint64(7)
    s ^= s << np.uint64(17)
    state[0] = s
    return s


@njit(cache=True)
def _train_span(
    tokens,
    starts,
    ends,
    syn0,
    syn1,
    neg_table,
    window,
    negatives,
    alpha_start,
    alpha_end,
    step,
    total_steps,
    rng_state,
):
    dims = syn0.shape[1]
    table_len = neg_table.shape[0]
    h = np.empty(dims, dtype=np.float64)
    neu1e = np.empty(dims, dtype=np.float64)
    for p in range(starts.shape[0]):
        for pos in range(starts[p], ends[p]):
            center = tokens[pos]
            lo = max(starts[p], pos - window)
            hi = min(ends[p], pos + window + 1)
            step += 1
            context_count = hi - lo - 1
            if context_count <= 0:
                continue
            frac = step / total_steps
            alpha = alpha_start + (alpha_end - alpha_start) * frac
            if alpha < alpha_end:
                alpha = alpha_end

            for d in range(dims):
                h[d] = 0.0
                neu1e[d] = 0.0
            for j in range(lo, hi):
                if j == pos:
                    continue
                row = tokens[j]
                for d in range(dims):
                    h[d] += syn0[row, d]
            for d in range(dims):
                h[d] /= context_count

            for k in range(negatives + 1):
                if k == 0:
                    target = center
                    label = 1.0
                else:
                    target = neg_table[
                        np.int64(_next_rand(rng_state) >> np.uint64(1)) % table_len
                    ]
                    tries = 0
                    while target == center and tries < 8:
                        target = neg_table[
                            np.int64(_next_rand(rng_state) >> np.uint64(1)) % table_len
                        ]
                        tries += 1
                    if target == center:
                        continue
                    label = 0.0
                f = 0.0
                for d in range(dims):
                    f += h[d] * syn1[target, d]
                if f > _EXP_CLIP:
                    g = (label - 1.0) * alpha
                elif f < -_EXP_CLIP:
                    g = label * alpha
                else:
                    g = (label - 1.0 / (1.0 + np.exp(-f))) * alpha
                for d in range(dims):
                    neu1e[d] += g * syn1[target, d]
                    syn1[target, d] += g * h[d]

            for j in range(lo, hi):
                if j == pos:
                    continue
                row = tokens[j]
                for d in range(dims):
                    syn0[row, d] += neu1e[d]
    return step


def _build_negative_table(counts: np.ndarray) -> np.ndarray:
    weights = counts.astype(np.float64) ** _NEG_POWER
    weights /= weights.sum()
    size = int(min(10_000_000, max(100_000, 100 * len(counts))))
    bounds = np.floor(np.cumsum(weights) * size).astype(np.int64)
    table = np.empty(size, dtype=np.int64)
    prev = 0
    for idx, bound in enumerate(bounds):
        table[prev:bound] = idx
        prev = bound
    table[prev:] = len(counts) - 1
    return table


def _tokenize(playlists: list[Playlist], vocab: Vocabulary):
    tokens: list[int] = []
    starts: list[int] = []
    ends: list[int] = []
    for playlist in playlists:
        row = [vocab.index_of[s] for s in playlist.songs if s in vocab]
        if not row:
            continue
        starts.append(len(tokens))
        tokens.extend(row)
        ends.append(len(tokens))
    return (
        np.asarray(tokens, dtype=np.int64),
        np.asarray(starts, dtype=np.int64),
        np.asarray(ends, dtype=np.int64),
    )


def train_cbow(
    playlists: list[Playlist],
    vocab: Vocabulary,
    dims: int = 40,
    window: int = 5,
    negatives: int = 5,
    learning_rate: tuple[float, float] = (0.025, 0.0001),
    epochs: int = 1,
    seed: int = 0,
    checkpoint_every: int | None = None,
    on_checkpoint=None,
) -> EmbeddingMatrix:
    """Run CBoW negative-sampling training and return the input table.

    The learning rate decays linearly from ``learning_rate[0]`` to
    ``learning_rate[1]`` over all planned steps. ``on_checkpoint(step,
    vectors)`` fires between playlists whenever ``checkpoint_every`` steps
    have accrued. With ``epochs=0`` the random initialization is returned.
    """
    if len(vocab) == 0:
        raise ValueError("vocabulary must be non-empty")
    if dims < 1 or window < 1 or negatives < 1:
        raise ValueError("dims, window, and negatives must all be >= 1")
    if epochs < 0:
        raise ValueError("epochs must be >= 0")
    if np.isscalar(learning_rate):
        learning_rate = (float(learning_rate), float(learning_rate))
    alpha_start, alpha_end = float(learning_rate[0]), float(learning_rate[1])

    rng = np.random.default_rng(np.random.SeedSequence(entropy=(seed, 0xCB01)))
    syn0 = rng.uniform(-0.5 / dims, 0.5 / dims, size=(len(vocab), dims))
    syn1 = np.zeros((len(vocab), dims), dtype=np.float64)

    tokens, starts, ends = _tokenize(playlists, vocab)
    total_positions = int(tokens.shape[0])
    if epochs == 0 or total_positions == 0:
        return EmbeddingMatrix(vocab, syn0)

    neg_table = _build_negative_table(vocab.counts)
    rng_state = np.array([rng.integers(1, 2**63)], dtype=np.uint64)
    total_steps = total_positions * epochs

    # Kernel calls are chunked so divergence checks (and optional
    # checkpoints) happen at bounded step intervals.
    chunk_target = checkpoint_every if checkpoint_every else 200_000
    step = 0
    next_checkpoint = checkpoint_every if checkpoint_every else None
    for _ in range(epochs):
        chunk_start = 0
        while chunk_start < len(starts):
            chunk_end = chunk_start
            span = 0
            while chunk_end < len(starts) and span < chunk_target:
                span += ends[chunk_end] - starts[chunk_end]
                chunk_end += 1
            step = _train_span(
                tokens,
                starts[chunk_start:chunk_end],
                ends[chunk_start:chunk_end],
                syn0,
                syn1,
                neg_table,
                window,
                negatives,
                alpha_start,
                alpha_end,
                step,
                total_steps,
                rng_state,
            )
            if not (np.all(np.isfinite(syn0)) and np.all(np.isfinite(syn1))):
                raise TrainingDivergedError(
                    f"non-finite embedding values by step {step}", step=int(step)
                )
            if next_checkpoint is not None and step >= next_checkpoint:
                on_checkpoint(int(step), syn0)
                next_checkpoint += checkpoint_every
            chunk_start = chunk_end
    return EmbeddingMatrix(vocab, syn0)


class CbowEmbedder(BaseEstimator):
    """Learns song vectors from a playlist corpus.

    Parameters mirror ``train_cbow``; ``top_n`` truncates the vocabulary to
    the most popular songs (None keeps every song seen in the corpus).
    """

    def __init__(
        self,
        dims: int = 40,
        window: int = 5,
        negatives: int = 5,
        initial_lr: float = 0.025,
        final_lr: float = 0.0001,
        epochs: int = 1,
        top_n: int | None = None,
        seed: int = 0,
    ):
        self.dims = dims
        self.window = window
        self.negatives = negatives
        self.initial_lr = initial_lr
        self.final_lr = final_lr
        self.epochs = epochs
        self.top_n = top_n
        self.seed = seed

    def fit(self, playlists: list[Playlist], catalog: Catalog):
        top_n = self.top_n if self.top_n is not None else catalog.num_songs
        self.vocabulary_ = build_vocabulary(playlists, catalog, top_n)
        self.embeddings_ = train_cbow(
            playlists,
            self.vocabulary_,
            dims=self.dims,
            window=self.window,
            negatives=self.negatives,
            learning_rate=(self.initial_lr, self.final_lr),
            epochs=self.epochs,
            seed=self.seed,
        )
        return self

    def transform(self, song_ids) -> np.ndarray:
        """Map a sequence of song ids to their learned vectors."""
        check_is_fitted(self, "embeddings_")
        return self.embeddings_.take(song_ids)
