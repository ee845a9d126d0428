"""Corpus filtering and training-chunk extraction.

Playlists are kept only when, after dropping unpopular songs, they have more
than 10 and fewer than 5000 songs from at least 3 distinct artists and 3
distinct albums. History chunks keep a 150-song window only when the final
50 songs (the prediction ground truth) are unique, unseen in the first 100
songs, and likewise for their artists; the first 100 songs are left intact,
repeats and all.
"""

from __future__ import annotations

from ..validation import check_positive
from .types import Catalog, ListeningHistory, Playlist, TrainSequence

PLAYLIST_INPUT_LENGTH = 60
HISTORY_INPUT_LENGTH = 100
TARGET_LENGTH = 50

MIN_PLAYLIST_LENGTH = 11  # strictly more than 10 songs
MAX_PLAYLIST_LENGTH = 4999  # strictly fewer than 5000
MIN_DISTINCT_ARTISTS = 3
MIN_DISTINCT_ALBUMS = 3


def filter_playlists(
    playlists: list[Playlist], catalog: Catalog, top_n: int
) -> list[Playlist]:
    """Drop unpopular songs, then playlists lacking length or diversity."""
    top_n = check_positive(top_n, "top_n")
    kept = []
    for playlist in playlists:
        songs = [s for s in playlist.songs if catalog.ranks[s] <= top_n]
        if not MIN_PLAYLIST_LENGTH <= len(songs) <= MAX_PLAYLIST_LENGTH:
            continue
        artists = {int(catalog.artist_ids[s]) for s in songs}
        if len(artists) < MIN_DISTINCT_ARTISTS:
            continue
        albums = {int(catalog.album_ids[s]) for s in songs}
        if len(albums) < MIN_DISTINCT_ALBUMS:
            continue
        kept.append(Playlist(songs))
    return kept


def extract_playlist_chunks(
    playlist: Playlist,
    input_length: int = PLAYLIST_INPUT_LENGTH,
    target_length: int = TARGET_LENGTH,
) -> list[TrainSequence]:
    """Cut non-overlapping windows of input_length + target_length songs."""
    window = input_length + target_length
    chunks = []
    for start in range(0, len(playlist) - window + 1, window):
        block = playlist.songs[start : start + window]
        chunks.append(
            TrainSequence(
                inputs=tuple(block[:input_length]),
                targets=tuple(block[input_length:]),
            )
        )
    return chunks


def history_window_ok(
    songs: list[int], catalog: Catalog, input_length: int = HISTORY_INPUT_LENGTH
) -> bool:
    """Apply the four ground-truth filtering rules to one window."""
    head = songs[:input_length]
    tail = songs[input_length:]
    if len(set(tail)) != len(tail):
        return False
    if set(tail) & set(head):
        return False
    tail_artists = [int(catalog.artist_ids[s]) for s in tail]
    if len(set(tail_artists)) != len(tail_artists):
        return False
    head_artists = {int(catalog.artist_ids[s]) for s in head}
    if set(tail_artists) & head_artists:
        return False
    return True


def extract_history_chunks(
    history: ListeningHistory,
    catalog: Catalog,
    input_length: int = HISTORY_INPUT_LENGTH,
    target_length: int = TARGET_LENGTH,
) -> list[TrainSequence]:
    """Cut non-overlapping windows, keeping those that pass the four rules."""
    window = input_length + target_length
    chunks = []
    for start in range(0, len(history) - window + 1, window):
        events = history.events[start : start + window]
        songs = [e.song_id for e in events]
        if not history_window_ok(songs, catalog, input_length):
            continue
        chunks.append(
            TrainSequence(
                inputs=tuple(songs[:input_length]),
                targets=tuple(songs[input_length:]),
                events=tuple(events[:input_length]),
            )
        )
    return chunks


def restrict_history(history: ListeningHistory, keep: set[int]) -> ListeningHistory:
    """Remove events whose songs are outside ``keep`` (no embedding exists)."""
    events = [e for e in history.events if e.song_id in keep]
    return ListeningHistory(user_id=history.user_id, events=events)
