"""Line-oriented TSV persistence for catalogs, playlists, and histories.

All files are UTF-8 with LF line endings and no header row:

    catalog:   song_id <TAB> artist_id <TAB> album_id <TAB> genre_id <TAB> rank
    playlists: playlist_id <TAB> comma-separated song ids
    histories: user_id <TAB> timestamp <TAB> song_id <TAB> comma-separated contexts
"""

from __future__ import annotations

from pathlib import Path

from ..errors import DataError
from .types import Catalog, ListeningEvent, ListeningHistory, PlayContext, Playlist, Song


def write_catalog(catalog: Catalog, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for s in catalog.songs():
            fh.write(
                f"{s.id}\t{s.artist_id}\t{s.album_id}\t{s.genre_id}\t{s.popularity_rank}\n"
            )


def read_catalog(path: str | Path) -> Catalog:
    songs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 5:
                raise DataError(f"{path}:{lineno}: expected 5 fields, got {len(parts)}")
            sid, artist, album, genre, rank = (int(p) for p in parts)
            songs.append(Song(sid, artist, album, genre, rank))
    if not songs:
        raise DataError(f"{path}: empty catalog file")
    return Catalog(songs)


def write_playlists(playlists: list[Playlist], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for i, playlist in enumerate(playlists):
            ids = ",".join(str(s) for s in playlist.songs)
            fh.write(f"{i}\t{ids}\n")


def read_playlists(path: str | Path) -> list[Playlist]:
    playlists = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 2:
                raise DataError(f"{path}:{lineno}: expected 2 fields, got {len(parts)}")
            playlists.append(Playlist([int(s) for s in parts[1].split(",")]))
    return playlists


def write_histories(histories: list[ListeningHistory], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for history in histories:
            for e in history.events:
                ctx = ",".join(sorted(c.value for c in e.contexts))
                fh.write(f"{history.user_id}\t{e.timestamp}\t{e.song_id}\t{ctx}\n")


def read_histories(path: str | Path) -> list[ListeningHistory]:
    by_user: dict[int, list[ListeningEvent]] = {}
    order: list[int] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 4:
                raise DataError(f"{path}:{lineno}: expected 4 fields, got {len(parts)}")
            user, timestamp, song = int(parts[0]), int(parts[1]), int(parts[2])
            try:
                contexts = frozenset(PlayContext(v) for v in parts[3].split(","))
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from exc
            if user not in by_user:
                by_user[user] = []
                order.append(user)
            by_user[user].append(ListeningEvent(song, timestamp, contexts))
    return [ListeningHistory(user_id=u, events=by_user[u]) for u in order]
