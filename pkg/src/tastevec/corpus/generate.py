"""Synthetic catalog, playlist, and listening-history generators.

All generators are pure functions of their arguments and a seed: the same
call produces byte-identical output. Histories derive one RNG per user so
disjoint user ranges can be generated in parallel without changing results.
"""

from __future__ import annotations

import numpy as np

from ..validation import check_positive, check_probability
from .types import (
    CONTEXTS,
    Catalog,
    ListeningEvent,
    ListeningHistory,
    PlayContext,
    Playlist,
    Song,
)

_EPOCH_START = 1_450_000_000  # arbitrary fixed origin for synthetic timestamps
_REAL_CONTEXTS = tuple(c for c in CONTEXTS if c is not PlayContext.UNKNOWN)


def generate_catalog(
    num_songs: int,
    num_artists: int,
    num_genres: int,
    seed: int,
    album_size_range: tuple[int, int] = (8, 16),
) -> Catalog:
    """Build a random catalog of songs partitioned into artists, albums, genres.

    Every genre receives at least one artist and every artist at least one
    song; popularity ranks are a uniform random permutation of 1..num_songs.
    """
    num_songs = check_positive(num_songs, "num_songs")
    num_artists = check_positive(num_artists, "num_artists")
    num_genres = check_positive(num_genres, "num_genres")
    if not num_songs >= num_artists >= num_genres:
        raise ValueError("need num_songs >= num_artists >= num_genres")

    rng = np.random.default_rng(np.random.SeedSequence(entropy=(seed, 0xCA7)))

    artist_genre = np.concatenate(
        [
            np.arange(num_genres),
            rng.integers(0, num_genres, size=num_artists - num_genres),
        ]
    )
    rng.shuffle(artist_genre)

    song_artist = np.concatenate(
        [
            np.arange(num_artists),
            rng.integers(0, num_artists, size=num_songs - num_artists),
        ]
    )
    rng.shuffle(song_artist)

    ranks = rng.permutation(num_songs) + 1

    # Chunk each artist's songs into albums; album ids are global and unique.
    album_of = np.empty(num_songs, dtype=np.int64)
    next_album = 0
    lo, hi = album_size_range
    for artist in range(num_artists):
        songs = np.nonzero(song_artist == artist)[0]
        pos = 0
        while pos < len(songs):
            size = int(rng.integers(lo, hi + 1))
            album_of[songs[pos : pos + size]] = next_album
            next_album += 1
            pos += size

    songs = [
        Song(
            id=i,
            artist_id=int(song_artist[i]),
            album_id=int(album_of[i]),
            genre_id=int(artist_genre[song_artist[i]]),
            popularity_rank=int(ranks[i]),
        )
        for i in range(num_songs)
    ]
    return Catalog(songs)


class _GenreSampler:
    """Popularity-weighted song sampling within each genre."""

    def __init__(self, catalog: Catalog, exponent: float):
        self.genres = []
        for g in range(catalog.num_genres):
            ids = catalog.songs_in_genre(g)
            weights = catalog.ranks[ids].astype(np.float64) ** (-exponent)
            cumulative = np.cumsum(weights)
            self.genres.append((ids, cumulative / cumulative[-1]))

    def draw(self, genre: int, rng: np.random.Generator, used: set[int]) -> int:
        """Draw a song from the genre, preferring songs not in ``used``."""
        ids, cdf = self.genres[genre]
        for _ in range(16):
            song = int(ids[np.searchsorted(cdf, rng.random())])
            if song not in used:
                return song
        remaining = [s for s in ids.tolist() if s not in used]
        if remaining:
            return remaining[int(rng.integers(0, len(remaining)))]
        # Genre exhausted: repeats allowed.
        return int(ids[np.searchsorted(cdf, rng.random())])


def generate_playlists(
    catalog: Catalog,
    count: int,
    length_range: tuple[int, int],
    genre_coherence: float,
    seed: int,
    popularity_exponent: float = 1.05,
) -> list[Playlist]:
    """Generate playlists via a genre-sticky random walk.

    With probability ``genre_coherence`` the next song keeps the current
    genre; otherwise a genre is redrawn uniformly (possibly the same one).
    Songs within a genre are drawn popularity-weighted, avoiding repeats
    while the genre has unused songs.
    """
    if catalog.num_songs == 0:
        raise ValueError("catalog must be non-empty")
    check_probability(genre_coherence, "genre_coherence")
    count = check_positive(count, "count")
    lo, hi = length_range
    if not 1 <= lo <= hi:
        raise ValueError(f"invalid length_range {length_range}")

    rng = np.random.default_rng(np.random.SeedSequence(entropy=(seed, 0x9157)))
    sampler = _GenreSampler(catalog, popularity_exponent)
    num_genres = catalog.num_genres

    playlists = []
    for _ in range(count):
        length = int(rng.integers(lo, hi + 1))
        genre = int(rng.integers(0, num_genres))
        used: set[int] = set()
        songs = []
        for _ in range(length):
            if songs and rng.random() >= genre_coherence:
                genre = int(rng.integers(0, num_genres))
            song = sampler.draw(genre, rng, used)
            used.add(song)
            songs.append(song)
        playlists.append(Playlist(songs))
    return playlists


def _draw_contexts(rng: np.random.Generator) -> frozenset[PlayContext]:
    if rng.random() < 0.1:
        return frozenset((PlayContext.UNKNOWN,))
    n = 1 + int(rng.random() < 0.35)
    picks = rng.choice(len(_REAL_CONTEXTS), size=n, replace=False)
    return frozenset(_REAL_CONTEXTS[int(i)] for i in picks)


class _GenreRotation:
    """Cycles through genres in shuffled order, avoiding immediate repeats."""

    def __init__(self, num_genres: int, rng: np.random.Generator):
        self.num_genres = num_genres
        self.rng = rng
        self.order = rng.permutation(num_genres)
        self.pos = 0

    def next_genre(self) -> int:
        if self.pos == self.num_genres:
            last = self.order[-1]
            self.order = self.rng.permutation(self.num_genres)
            if self.num_genres > 1 and self.order[0] == last:
                swap = int(self.rng.integers(1, self.num_genres))
                self.order[0], self.order[swap] = self.order[swap], self.order[0]
            self.pos = 0
        genre = int(self.order[self.pos])
        self.pos += 1
        return genre


def _fixation_songs(
    catalog: Catalog,
    genre: int,
    run_length: int,
    artist_focused: bool,
    rng: np.random.Generator,
) -> list[int]:
    """Pick the songs for one fixation run inside a single genre.

    Genre-focused runs draw one song per distinct artist (artist repeats only
    once the genre's artists are exhausted); artist-focused runs dwell on one
    artist's songs, repeating once the artist catalog runs out.
    """
    songs: list[int] = []
    if artist_focused:
        genre_songs = catalog.songs_in_genre(genre)
        artists = np.unique(catalog.artist_ids[genre_songs])
        artist = int(artists[rng.integers(0, len(artists))])
        pool = catalog.songs_by_artist(artist).tolist()
        rng.shuffle(pool)
        while len(songs) < run_length:
            if pool:
                songs.append(int(pool.pop()))
            else:
                repeat = catalog.songs_by_artist(artist)
                songs.append(int(repeat[rng.integers(0, len(repeat))]))
        return songs

    genre_songs = catalog.songs_in_genre(genre)
    artists = np.unique(catalog.artist_ids[genre_songs]).tolist()
    rng.shuffle(artists)
    used: set[int] = set()
    queue = list(artists)
    while len(songs) < run_length:
        if not queue:
            queue = list(artists)
            rng.shuffle(queue)
        artist = queue.pop()
        artist_songs = catalog.songs_by_artist(artist)
        weights = catalog.ranks[artist_songs].astype(np.float64) ** -1.0
        weights /= weights.sum()
        order = rng.choice(len(artist_songs), size=len(artist_songs), replace=False, p=weights)
        pick = None
        for idx in order:
            cand = int(artist_songs[idx])
            if cand not in used:
                pick = cand
                break
        if pick is None:
            pick = int(artist_songs[order[0]])
        used.add(pick)
        songs.append(pick)
    return songs


def generate_histories(
    catalog: Catalog,
    num_users: int,
    length: int,
    fixation_mean: int,
    seed: int,
    artist_focus: float = 0.15,
    session_mean: int = 25,
) -> list[ListeningHistory]:
    """Generate per-user listening histories with fixation/switch structure.

    Each history alternates fixation runs (geometric length with the given
    mean, dwelling on one genre or one artist) and switches to a fresh genre.
    Timestamps use ~3-minute gaps within sessions and multi-hour gaps between
    sessions. If ``fixation_mean >= length`` the whole history is one run.
    """
    num_users = check_positive(num_users, "num_users")
    check_probability(artist_focus, "artist_focus")
    if length < 150:
        raise ValueError("history length must be at least 150")
    if fixation_mean < 1:
        raise ValueError("fixation_mean must be >= 1")

    histories = []
    for user in range(num_users):
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=(seed, 0xF1C5), spawn_key=(user,))
        )
        rotation = _GenreRotation(catalog.num_genres, rng)

        song_ids: list[int] = []
        while len(song_ids) < length:
            if fixation_mean >= length:
                run = length
            else:
                run = min(int(rng.geometric(1.0 / fixation_mean)), length - len(song_ids))
            genre = rotation.next_genre()
            focused = rng.random() < artist_focus
            song_ids.extend(_fixation_songs(catalog, genre, run, focused, rng))
        song_ids = song_ids[:length]

        timestamp = _EPOCH_START + user * 977
        session_left = int(rng.geometric(1.0 / session_mean))
        events = []
        for song in song_ids:
            if session_left == 0:
                timestamp += int(rng.integers(4 * 3600, 14 * 3600))
                session_left = int(rng.geometric(1.0 / session_mean))
            else:
                timestamp += int(rng.integers(150, 240))
            session_left -= 1
            events.append(
                ListeningEvent(
                    song_id=song, timestamp=timestamp, contexts=_draw_contexts(rng)
                )
            )
        histories.append(ListeningHistory(user_id=user, events=events))
    return histories
