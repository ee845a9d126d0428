"""Core domain types: songs, catalogs, playlists, and listening events."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np


class PlayContext(enum.Enum):
    """How a song play was initiated. UNKNOWN only ever appears alone."""

    COLLECTION = "collection"
    LIBRARY = "library"
    RADIO = "radio"
    OWN_PLAYLIST = "own_playlist"
    SHARED_PLAYLIST = "shared_playlist"
    CURATED_PLAYLIST = "curated_playlist"
    SEARCH = "search"
    BROWSE = "browse"
    ARTIST = "artist"
    ALBUM = "album"
    CHART = "chart"
    TRACK = "track"
    CLICKED = "clicked"
    UNKNOWN = "unknown"

    @property
    def index(self) -> int:
        return _CONTEXT_ORDER[self]


CONTEXTS: tuple[PlayContext, ...] = tuple(PlayContext)
_CONTEXT_ORDER: dict[PlayContext, int] = {c: i for i, c in enumerate(CONTEXTS)}
NUM_CONTEXTS = len(CONTEXTS)


@dataclass(frozen=True)
class Song:
    id: int
    artist_id: int
    album_id: int
    genre_id: int
    popularity_rank: int  # 1 = most popular


class Catalog:
    """Immutable song catalog with O(1) lookups by song id.

    Song ids are contiguous integers 0..num_songs-1; per-song attributes are
    kept in parallel arrays indexed by id.
    """

    def __init__(self, songs: list[Song]):
        if not songs:
            raise ValueError("catalog must contain at least one song")
        n = len(songs)
        ids = sorted(s.id for s in songs)
        if ids != list(range(n)):
            raise ValueError("song ids must be the contiguous range 0..n-1")
        self.artist_ids = np.empty(n, dtype=np.int64)
        self.album_ids = np.empty(n, dtype=np.int64)
        self.genre_ids = np.empty(n, dtype=np.int64)
        self.ranks = np.empty(n, dtype=np.int64)
        for s in songs:
            self.artist_ids[s.id] = s.artist_id
            self.album_ids[s.id] = s.album_id
            self.genre_ids[s.id] = s.genre_id
            self.ranks[s.id] = s.popularity_rank
        album_artist: dict[int, int] = {}
        for s in songs:
            prev = album_artist.setdefault(s.album_id, s.artist_id)
            if prev != s.artist_id:
                raise ValueError(f"album {s.album_id} spans multiple artists")
        if sorted(self.ranks.tolist()) != list(range(1, n + 1)):
            raise ValueError("popularity ranks must be a permutation of 1..n")

    @property
    def num_songs(self) -> int:
        return len(self.ranks)

    @property
    def num_genres(self) -> int:
        return int(self.genre_ids.max()) + 1

    def song(self, song_id: int) -> Song:
        return Song(
            id=song_id,
            artist_id=int(self.artist_ids[song_id]),
            album_id=int(self.album_ids[song_id]),
            genre_id=int(self.genre_ids[song_id]),
            popularity_rank=int(self.ranks[song_id]),
        )

    def songs(self) -> list[Song]:
        return [self.song(i) for i in range(self.num_songs)]

    def songs_in_genre(self, genre_id: int) -> np.ndarray:
        return np.nonzero(self.genre_ids == genre_id)[0]

    def songs_by_artist(self, artist_id: int) -> np.ndarray:
        return np.nonzero(self.artist_ids == artist_id)[0]


@dataclass
class Playlist:
    songs: list[int]

    def __post_init__(self):
        if not self.songs:
            raise ValueError("playlist must be non-empty")

    def __len__(self) -> int:
        return len(self.songs)


@dataclass(frozen=True)
class ListeningEvent:
    song_id: int
    timestamp: int  # seconds since epoch
    contexts: frozenset[PlayContext]

    def __post_init__(self):
        if PlayContext.UNKNOWN in self.contexts and len(self.contexts) > 1:
            raise ValueError("UNKNOWN context must appear alone")


@dataclass
class ListeningHistory:
    user_id: int
    events: list[ListeningEvent] = field(default_factory=list)

    def __post_init__(self):
        ts = [e.timestamp for e in self.events]
        if any(b < a for a, b in zip(ts, ts[1:])):
            raise ValueError("event timestamps must be non-decreasing")

    def song_ids(self) -> list[int]:
        return [e.song_id for e in self.events]

    def __len__(self) -> int:
        return len(self.events)


@dataclass
class TrainSequence:
    """A fixed-size training chunk: model inputs plus future ground truth.

    ``events`` parallels ``inputs`` when the chunk came from a listening
    history (used for play-context features); it is None for playlist chunks.
    """

    inputs: tuple[int, ...]
    targets: tuple[int, ...]
    events: tuple[ListeningEvent, ...] | None = None

    def __post_init__(self):
        if self.events is not None and len(self.events) != len(self.inputs):
            raise ValueError("events must parallel inputs one-to-one")

    @property
    def all_songs(self) -> tuple[int, ...]:
        return self.inputs + self.targets
