"""Deterministic dataset assembly shared by training and evaluation commands.

Splits are derived from (seed, item order) alone, so any command can rebuild
the same train/valid/test partition from the persisted TSV artifacts without
hidden state.
"""

from __future__ import annotations

import numpy as np

from ..corpus.filtering import (
    extract_history_chunks,
    extract_playlist_chunks,
    restrict_history,
)
from ..corpus.types import Catalog, ListeningHistory, Playlist, TrainSequence
from ..embeddings.matrix import EmbeddingMatrix
from .config import PipelineConfig


def three_way_split(
    count: int, seed: int, train_fraction: float, valid_fraction: float
) -> np.ndarray:
    """Label indices 0..count-1 as 0=train, 1=valid, 2=test."""
    if train_fraction + valid_fraction >= 1.0:
        raise ValueError("train and valid fractions must leave room for test data")
    rng = np.random.default_rng(np.random.SeedSequence(entropy=(seed, 0x5B117)))
    order = rng.permutation(count)
    labels = np.full(count, 2, dtype=np.int64)
    n_train = int(round(count * train_fraction))
    n_valid = int(round(count * valid_fraction))
    labels[order[:n_train]] = 0
    labels[order[n_train : n_train + n_valid]] = 1
    return labels


def history_datasets(
    histories: list[ListeningHistory],
    catalog: Catalog,
    embeddings: EmbeddingMatrix,
    config: PipelineConfig,
) -> tuple[list[TrainSequence], list[TrainSequence], list[TrainSequence]]:
    """Per-user split, then chunk extraction with the four target rules."""
    keep = {int(s) for s in embeddings.vocab.song_ids}
    labels = three_way_split(
        len(histories), config.seed, config.train_fraction, config.valid_fraction
    )
    out: tuple[list, list, list] = ([], [], [])
    for history, label in zip(histories, labels):
        usable = restrict_history(history, keep)
        out[label].extend(extract_history_chunks(usable, catalog))
    return out


def playlist_datasets(
    playlists: list[Playlist],
    config: PipelineConfig,
    embeddings: EmbeddingMatrix,
) -> tuple[list[TrainSequence], list[TrainSequence], list[TrainSequence]]:
    """Per-playlist split; songs without embeddings are dropped first."""
    keep = {int(s) for s in embeddings.vocab.song_ids}
    labels = three_way_split(
        len(playlists), config.seed, config.train_fraction, config.valid_fraction
    )
    out: tuple[list, list, list] = ([], [], [])
    for playlist, label in zip(playlists, labels):
        songs = [s for s in playlist.songs if s in keep]
        if not songs:
            continue
        out[label].extend(extract_playlist_chunks(Playlist(songs)))
    return out
