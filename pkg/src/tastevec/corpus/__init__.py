"""Synthetic corpus generation, filtering, and chunk extraction."""

from .filtering import (
    HISTORY_INPUT_LENGTH,
    PLAYLIST_INPUT_LENGTH,
    TARGET_LENGTH,
    extract_history_chunks,
    extract_playlist_chunks,
    filter_playlists,
    history_window_ok,
    restrict_history,
)
from .generate import generate_catalog, generate_histories, generate_playlists
from .tsv import (
    read_catalog,
    read_histories,
    read_playlists,
    write_catalog,
    write_histories,
    write_playlists,
)
from .types import (
    CONTEXTS,
    NUM_CONTEXTS,
    Catalog,
    ListeningEvent,
    ListeningHistory,
    PlayContext,
    Playlist,
    Song,
    TrainSequence,
)

__all__ = [
    "CONTEXTS",
    "NUM_CONTEXTS",
    "HISTORY_INPUT_LENGTH",
    "PLAYLIST_INPUT_LENGTH",
    "TARGET_LENGTH",
    "Catalog",
    "ListeningEvent",
    "ListeningHistory",
    "PlayContext",
    "Playlist",
    "Song",
    "TrainSequence",
    "extract_history_chunks",
    "extract_playlist_chunks",
    "filter_playlists",
    "history_window_ok",
    "restrict_history",
    "generate_catalog",
    "generate_histories",
    "generate_playlists",
    "read_catalog",
    "read_histories",
    "read_playlists",
    "write_catalog",
    "write_histories",
    "write_playlists",
]
