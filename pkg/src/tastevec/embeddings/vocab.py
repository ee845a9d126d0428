"""Song vocabulary: contiguous indices over the most popular catalog songs."""

from __future__ import annotations

from collections import Counter

import numpy as np

from ..corpus.types import Catalog, Playlist


class Vocabulary:
    """Bijective song_id <-> index mapping plus corpus occurrence counts.

    Indices are ordered by ascending popularity rank, so index 0 is the most
    popular retained song. This makes popularity-rank r map to index r-1 in
    relative order, which downstream samplers rely on.
    """

    def __init__(self, song_ids: np.ndarray, counts: np.ndarray):
        if len(song_ids) == 0:
            raise ValueError("vocabulary must be non-empty")
        if np.any(counts < 1):
            raise ValueError("every retained song needs at least one occurrence")
        self.song_ids = np.asarray(song_ids, dtype=np.int64)
        self.counts = np.asarray(counts, dtype=np.int64)
        self.index_of = {int(s): i for i, s in enumerate(self.song_ids)}
        if len(self.index_of) != len(self.song_ids):
            raise ValueError("duplicate song ids in vocabulary")

    def __len__(self) -> int:
        return len(self.song_ids)

    def __contains__(self, song_id: int) -> bool:
        return song_id in self.index_of

    def indices(self, song_ids) -> np.ndarray:
        return np.fromiter(
            (self.index_of[int(s)] for s in song_ids), dtype=np.int64
        )


def build_vocabulary(
    playlists: list[Playlist], catalog: Catalog, top_n: int
) -> Vocabulary:
    """Count song occurrences across playlists, keep the top_n by popularity."""
    if not playlists:
        raise ValueError("playlist corpus must be non-empty")
    if top_n < 1:
        raise ValueError("top_n must be positive")
    counts = Counter()
    for playlist in playlists:
        counts.update(playlist.songs)
    retained = [s for s in counts if catalog.ranks[s] <= top_n]
    retained.sort(key=lambda s: int(catalog.ranks[s]))
    if not retained:
        raise ValueError("no songs survive the top_n popularity cut")
    ids = np.array(retained, dtype=np.int64)
    occ = np.array([counts[s] for s in retained], dtype=np.int64)
    return Vocabulary(ids, occ)
