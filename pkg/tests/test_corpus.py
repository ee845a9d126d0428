"""Generators, filtering rules, and chunk extraction."""

import numpy as np
import pytest

from tastevec.corpus import (
    PlayContext,
    Playlist,
    extract_history_chunks,
    extract_playlist_chunks,
    filter_playlists,
    generate_catalog,
    generate_histories,
    generate_playlists,
    history_window_ok,
    read_catalog,
    read_histories,
    read_playlists,
    restrict_history,
    write_catalog,
    write_histories,
    write_playlists,
)
from tastevec.corpus.types import Catalog, ListeningEvent, ListeningHistory, Song


class TestGenerateCatalog:
    def test_degenerate_single_song(self):
        catalog = generate_catalog(1, 1, 1, seed=7)
        assert catalog.num_songs == 1
        assert int(catalog.ranks[0]) == 1

    def test_ids_unique_and_albums_consistent(self):
        catalog = generate_catalog(10_000, 500, 20, seed=1)
        assert catalog.num_songs == 10_000
        # brute-force scan: every album's songs share exactly one artist
        album_artists = {}
        for song in catalog.songs():
            album_artists.setdefault(song.album_id, set()).add(song.artist_id)
        assert all(len(a) == 1 for a in album_artists.values())
        assert sorted(catalog.ranks.tolist()) == list(range(1, 10_001))

    def test_every_genre_and_artist_used(self):
        catalog = generate_catalog(200, 50, 7, seed=2)
        assert set(catalog.genre_ids.tolist()) == set(range(7))
        assert set(catalog.artist_ids.tolist()) == set(range(50))

    def test_deterministic(self):
        a = generate_catalog(500, 50, 5, seed=9)
        b = generate_catalog(500, 50, 5, seed=9)
        assert np.array_equal(a.ranks, b.ranks)
        assert np.array_equal(a.artist_ids, b.artist_ids)
        assert np.array_equal(a.album_ids, b.album_ids)

    def test_invalid_counts_rejected(self):
        with pytest.raises(ValueError):
            generate_catalog(0, 1, 1, seed=0)
        with pytest.raises(ValueError):
            generate_catalog(10, 20, 1, seed=0)
        with pytest.raises(ValueError):
            generate_catalog(10, 5, 6, seed=0)


class TestGeneratePlaylists:
    def test_full_coherence_single_genre(self, small_catalog):
        playlists = generate_playlists(small_catalog, 30, (10, 30), 1.0, seed=4)
        for p in playlists:
            genres = {int(small_catalog.genre_ids[s]) for s in p.songs}
            assert len(genres) == 1

    def test_adjacent_same_genre_fraction(self, mid_catalog):
        playlists = generate_playlists(mid_catalog, 1000, (50, 50), 0.9, seed=8)
        same = total = 0
        for p in playlists:
            g = mid_catalog.genre_ids[np.array(p.songs)]
            same += int((g[:-1] == g[1:]).sum())
            total += len(p.songs) - 1
        # expected rate: stick w.p. 0.9, else uniform redraw hits same w.p. 1/20
        expected = 0.9 + 0.1 / mid_catalog.num_genres
        assert abs(same / total - expected) < 0.03

    def test_zero_coherence_two_genres(self):
        catalog = generate_catalog(400, 40, 2, seed=5)
        playlists = generate_playlists(catalog, 2500, (41, 41), 0.0, seed=6)
        same = total = 0
        for p in playlists:
            g = catalog.genre_ids[np.array(p.songs)]
            same += int((g[:-1] == g[1:]).sum())
            total += len(p.songs) - 1
        assert total >= 100_000
        # every step redraws the genre uniformly over both genres
        assert abs(same / total - 0.5) < 0.02

    def test_invalid_arguments_rejected(self, small_catalog):
        with pytest.raises(ValueError):
            generate_playlists(small_catalog, 1, (0, 5), 0.5, seed=0)
        with pytest.raises(ValueError):
            generate_playlists(small_catalog, 1, (5, 10), 1.5, seed=0)
        with pytest.raises(ValueError):
            generate_playlists(small_catalog, 0, (5, 10), 0.5, seed=0)

    def test_deterministic(self, small_catalog):
        a = generate_playlists(small_catalog, 10, (10, 20), 0.8, seed=3)
        b = generate_playlists(small_catalog, 10, (10, 20), 0.8, seed=3)
        assert [p.songs for p in a] == [p.songs for p in b]


class TestGenerateHistories:
    def test_timestamps_non_decreasing_and_contexts_legal(self, small_catalog):
        histories = generate_histories(small_catalog, 10, 200, 15, seed=1)
        for h in histories:
            ts = [e.timestamp for e in h.events]
            assert all(b >= a for a, b in zip(ts, ts[1:]))
            for e in h.events:
                if PlayContext.UNKNOWN in e.contexts:
                    assert e.contexts == frozenset((PlayContext.UNKNOWN,))

    def test_fixation_mean_at_length_single_genre(self, small_catalog):
        histories = generate_histories(small_catalog, 5, 150, 150, seed=2)
        for h in histories:
            genres = {int(small_catalog.genre_ids[s]) for s in h.song_ids()}
            assert len(genres) == 1

    def test_deterministic(self, small_catalog):
        a = generate_histories(small_catalog, 20, 150, 21, seed=4)
        b = generate_histories(small_catalog, 20, 150, 21, seed=4)
        assert all(
            x.events == y.events for x, y in zip(a, b)
        )

    def test_short_history_rejected(self, small_catalog):
        with pytest.raises(ValueError):
            generate_histories(small_catalog, 1, 149, 21, seed=0)

    def test_median_transitions_near_observed(self, mid_catalog, mid_playlists, mid_vocab):
        # Sharper-trained embeddings separate genres enough that fixation
        # switches cross cosine distance 1; the median count per 150 plays
        # should land near 7 (+-50%).
        from tastevec.embeddings import train_cbow

        emb = train_cbow(
            mid_playlists,
            mid_vocab,
            dims=40,
            window=5,
            negatives=15,
            learning_rate=(0.05, 1e-4),
            epochs=25,
            seed=5,
        )
        histories = generate_histories(mid_catalog, 40, 150, 21, seed=11)
        keep = {int(s) for s in emb.vocab.song_ids}
        counts = []
        for h in histories:
            ids = [e.song_id for e in h.events if e.song_id in keep]
            M = emb.take(ids)
            U = M / np.linalg.norm(M, axis=1, keepdims=True)
            dist = 1.0 - np.sum(U[:-1] * U[1:], axis=1)
            counts.append(int((dist > 1.0).sum()))
        median = float(np.median(counts))
        assert 3.5 <= median <= 10.5


def _mk_catalog_three_artists():
    songs = [
        Song(id=i, artist_id=i % 3, album_id=i % 3, genre_id=0, popularity_rank=i + 1)
        for i in range(60)
    ]
    return Catalog(songs)


class TestFilterPlaylists:
    def test_length_boundaries(self):
        catalog = _mk_catalog_three_artists()
        ten = Playlist(list(range(10)))
        eleven = Playlist(list(range(11)))
        assert filter_playlists([ten], catalog, 60) == []
        kept = filter_playlists([eleven], catalog, 60)
        assert len(kept) == 1

    def test_single_artist_dropped(self):
        catalog = _mk_catalog_three_artists()
        one_artist = Playlist([0, 3, 6, 9, 12, 15, 18, 21, 24, 27, 30, 33, 36])
        assert filter_playlists([one_artist], catalog, 60) == []

    def test_unpopular_songs_removed_first(self):
        catalog = _mk_catalog_three_artists()
        # ranks are id+1, so top_n=12 keeps ids 0..11 only
        playlist = Playlist(list(range(20)))
        kept = filter_playlists([playlist], catalog, 12)
        assert kept and kept[0].songs == list(range(12))

    def test_idempotent(self, mid_catalog):
        playlists = generate_playlists(mid_catalog, 200, (5, 120), 0.8, seed=12)
        once = filter_playlists(playlists, mid_catalog, 1500)
        twice = filter_playlists(once, mid_catalog, 1500)
        assert [p.songs for p in once] == [p.songs for p in twice]


class TestPlaylistChunks:
    def test_below_window(self):
        assert extract_playlist_chunks(Playlist(list(range(109)))) == []

    def test_exact_window(self):
        playlist = Playlist(list(range(110)))
        chunks = extract_playlist_chunks(playlist)
        assert len(chunks) == 1
        assert chunks[0].inputs[0] == playlist.songs[0]
        assert len(chunks[0].inputs) == 60
        assert len(chunks[0].targets) == 50
        assert chunks[0].targets[49] == playlist.songs[109]

    def test_non_overlapping_count(self):
        chunks = extract_playlist_chunks(Playlist(list(range(330))))
        assert len(chunks) == 3  # floor(330 / 110)

    def test_no_fabricated_ids(self, small_catalog):
        playlists = generate_playlists(small_catalog, 5, (120, 250), 0.9, seed=3)
        for p in playlists:
            for chunk in extract_playlist_chunks(p):
                assert set(chunk.all_songs) <= set(p.songs)


def _history_from_songs(songs, user=0):
    events = [
        ListeningEvent(song_id=s, timestamp=1000 + 200 * i, contexts=frozenset())
        for i, s in enumerate(songs)
    ]
    return ListeningHistory(user_id=user, events=events)


def _brute_force_rules(window, catalog):
    head, tail = window[:100], window[100:]
    artists = lambda ids: [int(catalog.artist_ids[s]) for s in ids]
    return (
        len(set(tail)) == 50
        and not set(tail) & set(head)
        and len(set(artists(tail))) == 50
        and not set(artists(tail)) & set(artists(head))
    )


class TestHistoryChunks:
    def test_target_song_in_head_rejected(self, mid_catalog):
        # distinct songs everywhere, then copy target position 0 into head
        songs = list(range(150))
        songs[2] = songs[100]
        history = _history_from_songs(songs)
        assert extract_history_chunks(history, mid_catalog) == []

    def test_all_distinct_kept(self, mid_catalog):
        # 150 distinct songs by 150 distinct artists
        by_artist = {}
        for s in range(mid_catalog.num_songs):
            by_artist.setdefault(int(mid_catalog.artist_ids[s]), s)
        songs = [by_artist[a] for a in sorted(by_artist)[:150]]
        history = _history_from_songs(songs)
        chunks = extract_history_chunks(history, mid_catalog)
        assert len(chunks) == 1
        assert chunks[0].inputs == tuple(songs[:100])
        assert chunks[0].targets == tuple(songs[100:])
        assert chunks[0].events is not None and len(chunks[0].events) == 100

    def test_matches_brute_force_checker(self, mid_catalog):
        histories = generate_histories(mid_catalog, 40, 300, 21, seed=17)
        for h in histories:
            ids = h.song_ids()
            kept = {c.inputs[0] for c in extract_history_chunks(h, mid_catalog)}
            expected = set()
            for start in range(0, len(ids) - 149, 150):
                window = ids[start : start + 150]
                if _brute_force_rules(window, mid_catalog):
                    expected.add(window[0])
            assert kept == expected

    def test_head_repeats_allowed(self, mid_catalog):
        by_artist = {}
        for s in range(mid_catalog.num_songs):
            by_artist.setdefault(int(mid_catalog.artist_ids[s]), s)
        songs = [by_artist[a] for a in sorted(by_artist)[:150]]
        songs[1] = songs[0]  # repeat inside the first 100 is fine
        history = _history_from_songs(songs)
        assert len(extract_history_chunks(history, mid_catalog)) == 1

    def test_emitted_chunks_pass_recheck(self, history_splits, mid_catalog):
        train, valid, test = history_splits
        for chunk in (train + valid + test)[:200]:
            assert history_window_ok(list(chunk.all_songs), mid_catalog)

    def test_restrict_history_drops_unembeddable(self, small_catalog):
        history = _history_from_songs([0, 1, 2, 3])
        restricted = restrict_history(history, keep={1, 3})
        assert [e.song_id for e in restricted.events] == [1, 3]


class TestTsvRoundTrips:
    def test_catalog(self, tmp_path, small_catalog):
        path = tmp_path / "catalog.tsv"
        write_catalog(small_catalog, path)
        again = read_catalog(path)
        assert np.array_equal(again.ranks, small_catalog.ranks)
        assert np.array_equal(again.artist_ids, small_catalog.artist_ids)
        assert np.array_equal(again.album_ids, small_catalog.album_ids)
        assert np.array_equal(again.genre_ids, small_catalog.genre_ids)

    def test_playlists(self, tmp_path, small_catalog):
        playlists = generate_playlists(small_catalog, 7, (5, 30), 0.7, seed=2)
        path = tmp_path / "playlists.tsv"
        write_playlists(playlists, path)
        again = read_playlists(path)
        assert [p.songs for p in again] == [p.songs for p in playlists]

    def test_histories(self, tmp_path, small_catalog):
        histories = generate_histories(small_catalog, 4, 160, 10, seed=2)
        path = tmp_path / "histories.tsv"
        write_histories(histories, path)
        again = read_histories(path)
        assert len(again) == len(histories)
        for x, y in zip(again, histories):
            assert x.user_id == y.user_id
            assert x.events == y.events

    def test_lf_line_endings_no_header(self, tmp_path, small_catalog):
        path = tmp_path / "catalog.tsv"
        write_catalog(small_catalog, path)
        raw = path.read_bytes()
        assert b"\r" not in raw
        first = raw.split(b"\n", 1)[0].split(b"\t")
        assert len(first) == 5 and first[0].isdigit()
