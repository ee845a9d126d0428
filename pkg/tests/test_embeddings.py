"""Vocabulary building, cosine distance, and CBoW training behavior."""

from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tastevec.corpus.types import Catalog, Playlist, Song
from tastevec.embeddings import (
    EmbeddingMatrix,
    build_vocabulary,
    cosine_distance,
    train_cbow,
)
from tastevec.errors import TrainingDivergedError


def _flat_catalog(n):
    songs = [
        Song(id=i, artist_id=i, album_id=i, genre_id=0, popularity_rank=i + 1)
        for i in range(n)
    ]
    return Catalog(songs)


class TestVocabulary:
    def test_never_exceeds_distinct_songs(self):
        catalog = _flat_catalog(10)
        vocab = build_vocabulary([Playlist([0, 1, 2, 1])], catalog, top_n=6_000_000)
        assert len(vocab) == 3

    def test_top_n_truncation(self):
        catalog = _flat_catalog(3)
        vocab = build_vocabulary([Playlist([0, 1, 2])], catalog, top_n=2)
        assert 2 not in vocab  # song with rank 3 excluded
        assert len(vocab) == 2

    def test_counts_match_brute_force(self, mid_playlists, mid_catalog, mid_vocab):
        tally = Counter()
        for p in mid_playlists:
            tally.update(p.songs)
        for song_id, count in list(tally.items())[:500]:
            assert mid_vocab.counts[mid_vocab.index_of[song_id]] == count

    def test_ordered_by_popularity_rank(self, mid_vocab, mid_catalog):
        ranks = mid_catalog.ranks[mid_vocab.song_ids]
        assert np.all(np.diff(ranks) > 0)

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError):
            build_vocabulary([], _flat_catalog(3), top_n=3)


class TestCosineDistance:
    def test_identity(self):
        v = np.array([1.0, 2.0, -3.0])
        assert cosine_distance(v, v) == pytest.approx(0.0, abs=1e-12)

    def test_antipodal(self):
        v = np.array([0.5, -1.5, 2.0])
        assert cosine_distance(v, -v) == pytest.approx(2.0, abs=1e-12)

    def test_orthogonal(self):
        assert cosine_distance([1.0, 0.0], [0.0, 1.0]) == pytest.approx(1.0)

    def test_zero_norm_rejected(self):
        with pytest.raises(ValueError):
            cosine_distance([0.0, 0.0], [1.0, 0.0])
        with pytest.raises(ValueError):
            cosine_distance([1.0, 0.0], [0.0, 0.0])

    def test_dim_mismatch_rejected(self):
        with pytest.raises(ValueError):
            cosine_distance([1.0, 0.0], [1.0, 0.0, 0.0])

    @given(
        st.lists(st.floats(-100, 100), min_size=3, max_size=3),
        st.lists(st.floats(-100, 100), min_size=3, max_size=3),
        st.floats(0.01, 50),
        st.floats(0.01, 50),
    )
    @settings(max_examples=150, deadline=None)
    def test_symmetry_and_scale_invariance(self, xs, ys, a, b):
        x, y = np.array(xs), np.array(ys)
        if np.linalg.norm(x) < 1e-6 or np.linalg.norm(y) < 1e-6:
            return
        d = cosine_distance(x, y)
        assert 0.0 <= d <= 2.0 + 1e-12
        assert d == pytest.approx(cosine_distance(y, x), abs=1e-12)
        assert d == pytest.approx(cosine_distance(a * x, b * y), abs=1e-9)


def _pair_corpus():
    """Repeated [a, b] playlists mixed with background songs that soak up
    the negative samples."""
    catalog = _flat_catalog(22)
    rng = np.random.default_rng(0)
    corpus = []
    for i in range(400):
        corpus.extend(Playlist([0, 1]) for _ in range(5))
        corpus.append(Playlist([int(x) for x in rng.integers(2, 22, size=10)]))
    return catalog, corpus


class TestTrainCbow:
    def test_cooccurring_pair_distance_decreases(self):
        catalog, corpus = _pair_corpus()
        vocab = build_vocabulary(corpus, catalog, 22)
        trace = []

        def log(step, vectors):
            a, b = vocab.index_of[0], vocab.index_of[1]
            trace.append(cosine_distance(vectors[a], vectors[b]))

        train_cbow(
            corpus,
            vocab,
            dims=16,
            window=1,
            negatives=5,
            epochs=5,
            seed=3,
            checkpoint_every=4000,
            on_checkpoint=log,
        )
        assert len(trace) >= 5
        assert all(b <= a + 1e-9 for a, b in zip(trace, trace[1:]))
        assert trace[-1] < trace[0]

    def test_genre_clusters(self, mid_embeddings, mid_catalog, rng):
        sample = rng.choice(len(mid_embeddings), size=1000, replace=False)
        V = mid_embeddings.vectors[sample]
        U = V / np.linalg.norm(V, axis=1, keepdims=True)
        genres = mid_catalog.genre_ids[mid_embeddings.vocab.song_ids[sample]]
        sims = U @ U.T
        iu = np.triu_indices(len(sample), k=1)
        dist = 1.0 - sims[iu]
        same = (genres[:, None] == genres[None, :])[iu]
        assert dist[same].mean() < dist[~same].mean()

    def test_zero_epochs_returns_initialization(self):
        catalog, corpus = _pair_corpus()
        vocab = build_vocabulary(corpus, catalog, 22)
        a = train_cbow(corpus, vocab, dims=8, epochs=0, seed=9)
        b = train_cbow(corpus, vocab, dims=8, epochs=0, seed=9)
        assert np.array_equal(a.vectors, b.vectors)
        assert np.abs(a.vectors).max() <= 0.5 / 8  # untouched uniform init
        trained = train_cbow(corpus, vocab, dims=8, epochs=1, seed=9)
        assert not np.array_equal(a.vectors, trained.vectors)

    def test_deterministic(self):
        catalog, corpus = _pair_corpus()
        vocab = build_vocabulary(corpus, catalog, 22)
        a = train_cbow(corpus, vocab, dims=8, epochs=2, seed=4)
        b = train_cbow(corpus, vocab, dims=8, epochs=2, seed=4)
        assert np.array_equal(a.vectors, b.vectors)

    def test_all_finite(self, mid_embeddings):
        assert np.all(np.isfinite(mid_embeddings.vectors))

    def test_divergence_reports_step(self):
        catalog, corpus = _pair_corpus()
        vocab = build_vocabulary(corpus, catalog, 22)
        with pytest.raises(TrainingDivergedError) as err:
            train_cbow(
                corpus,
                vocab,
                dims=8,
                epochs=4,
                learning_rate=(1e160, 1e160),
                seed=1,
            )
        assert err.value.step is not None

    def test_invalid_arguments(self):
        catalog, corpus = _pair_corpus()
        vocab = build_vocabulary(corpus, catalog, 22)
        for kwargs in ({"dims": 0}, {"window": 0}, {"negatives": 0}, {"epochs": -1}):
            with pytest.raises(ValueError):
                train_cbow(corpus, vocab, seed=0, **kwargs)


class TestEmbeddingFile:
    def test_round_trip_exact(self, tmp_path, mid_embeddings):
        path = tmp_path / "emb.txt"
        mid_embeddings.save(path)
        again = EmbeddingMatrix.load(path)
        assert np.array_equal(again.vectors, mid_embeddings.vectors)
        assert np.array_equal(again.vocab.song_ids, mid_embeddings.vocab.song_ids)

    def test_rewrite_identical_bytes(self, tmp_path, mid_embeddings):
        first = tmp_path / "emb1.txt"
        second = tmp_path / "emb2.txt"
        mid_embeddings.save(first)
        EmbeddingMatrix.load(first).save(second)
        assert first.read_bytes() == second.read_bytes()

    def test_header_format(self, tmp_path, mid_embeddings):
        path = tmp_path / "emb.txt"
        mid_embeddings.save(path)
        header = path.read_text().splitlines()[0]
        n, d = header.split(" ")
        assert int(n) == len(mid_embeddings)
        assert int(d) == mid_embeddings.dim
