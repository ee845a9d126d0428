"""Offset sampling, losses, context vectors, training, incremental serving."""

import math

import numpy as np
import pytest
from gradcheck import max_relative_error

from tastevec.corpus.types import ListeningEvent, PlayContext, TrainSequence
from tastevec.embeddings import cosine_distance
from tastevec.errors import DataError, TrainingDivergedError
from tastevec.taste import (
    CONTEXT_VECTOR_DIM,
    TasteRegressor,
    build_context_vector,
    context_matrix,
    cosine_loss,
    cosine_loss_grad,
    draw_offsets,
    l2_loss,
    scale_time_delta,
)
from tastevec.taste.model import VARIANTS


class TestOffsetSampling:
    def test_short_term_range(self, rng):
        draws = draw_offsets(rng, 1, 10, size=5000)
        assert draws.min() >= 1 and draws.max() <= 10
        assert set(np.unique(draws)) == set(range(1, 11))

    def test_degenerate_range(self, rng):
        draws = draw_offsets(rng, 7, 7, size=100)
        assert np.all(draws == 7)

    @pytest.mark.parametrize("low,high", [(1, 10), (25, 50)])
    def test_uniformity_within_three_sigma(self, low, high):
        gen = np.random.default_rng(99)
        n = 100_000
        draws = draw_offsets(gen, low, high, size=n)
        k = high - low + 1
        p = 1.0 / k
        sigma = math.sqrt(n * p * (1 - p))
        counts = np.bincount(draws - low, minlength=k)
        assert np.all(np.abs(counts - n * p) <= 3 * sigma)

    def test_invalid_range_rejected(self, rng):
        with pytest.raises(ValueError):
            draw_offsets(rng, 0, 5)
        with pytest.raises(ValueError):
            draw_offsets(rng, 6, 5)

    def test_variant_presets(self):
        assert VARIANTS["rPST"] == (60, 1, 10)
        assert VARIANTS["rPLT"] == (60, 25, 50)
        assert VARIANTS["rHST"] == (100, 1, 10)
        assert VARIANTS["rHLT"] == (100, 25, 50)


class TestLosses:
    def test_l2_identity(self):
        v = np.array([1.0, 2.0, 3.0])
        assert l2_loss(v, v) == 0.0

    def test_l2_three_four_five(self):
        assert l2_loss([0.0, 0.0], [3.0, 4.0]) == pytest.approx(5.0)

    def test_l2_matches_scalar_loop(self, rng):
        pred, target = rng.normal(size=6), rng.normal(size=6)
        expect = math.sqrt(sum((t - p) ** 2 for p, t in zip(pred, target)))
        assert l2_loss(pred, target) == pytest.approx(expect, rel=1e-12)

    def test_cosine_loss_is_cosine_distance(self, rng):
        x, y = rng.normal(size=5), rng.normal(size=5)
        assert cosine_loss(x, y) == pytest.approx(cosine_distance(x, y), abs=1e-12)

    def test_cosine_grad_matches_finite_differences(self, rng):
        x = rng.normal(size=5)
        y = rng.normal(size=5)
        g = cosine_loss_grad(x, y)
        err = max_relative_error(lambda: cosine_loss(x, y), [x], [g], rng, samples_per_param=5)
        assert err < 1e-5


def _event(song, ts, contexts=()):
    return ListeningEvent(song_id=song, timestamp=ts, contexts=frozenset(contexts))


class TestContextVectors:
    def test_first_event_zero_delta(self):
        vec = build_context_vector(_event(1, 5000), prev_event=None)
        assert vec[0] == 0.0
        assert vec.shape == (CONTEXT_VECTOR_DIM,)
        assert CONTEXT_VECTOR_DIM == 15

    def test_two_contexts_two_indicator_ones(self):
        contexts = (PlayContext.OWN_PLAYLIST, PlayContext.CLICKED)
        vec = build_context_vector(_event(1, 5000, contexts))
        indicators = vec[1:]
        assert indicators.sum() == 2.0
        assert indicators[PlayContext.OWN_PLAYLIST.index] == 1.0
        assert indicators[PlayContext.CLICKED.index] == 1.0

    def test_delta_scaling_180s(self):
        prev = _event(1, 1000)
        cur = _event(2, 1180)
        raw = build_context_vector(cur, prev, time_scaling="raw")
        assert raw[0] == 180.0
        logged = build_context_vector(cur, prev, time_scaling="log")
        assert logged[0] == pytest.approx(math.log1p(180.0))
        assert scale_time_delta(180, "log") == pytest.approx(math.log1p(180.0))

    def test_matrix_chains_deltas(self):
        events = [_event(1, 1000), _event(2, 1300), _event(3, 1400)]
        M = context_matrix(events, time_scaling="raw")
        assert M[:, 0] == pytest.approx([0.0, 300.0, 100.0])

    def test_unknown_scaling_rejected(self):
        with pytest.raises(ValueError):
            scale_time_delta(10, "sqrt")


class TestTasteVector:
    def test_single_song_output_dim(self, trained_rhst):
        sid = int(trained_rhst.embeddings_.vocab.song_ids[0])
        out = trained_rhst.taste_vector([sid])
        assert out.shape == (40,)
        assert np.all(np.isfinite(out))

    def test_equals_network_forward(self, trained_rhst, history_splits):
        seq = history_splits[2][0]
        via_model = trained_rhst.taste_vector(seq.inputs)
        xs = trained_rhst.embeddings_.take(seq.inputs)
        via_network = trained_rhst.network_.forward_sequence(xs)
        assert np.array_equal(via_model, via_network)

    def test_closer_to_next_song_than_random(self, trained_rhst, history_splits, rng):
        _, _, test = history_splits
        emb = trained_rhst.embeddings_
        to_next, to_random = [], []
        for seq in test[:30]:
            taste = trained_rhst.taste_vector(seq.inputs)
            to_next.append(cosine_distance(taste, emb.get(seq.targets[0])))
            for _ in range(30):
                row = int(rng.integers(0, len(emb)))
                to_random.append(cosine_distance(taste, emb.vectors[row]))
        assert np.mean(to_next) < np.mean(to_random)

    def test_empty_sequence_rejected(self, trained_rhst):
        with pytest.raises(ValueError):
            trained_rhst.taste_vector([])


class TestTraining:
    def test_loss_history_and_improvement(self, trained_rhst, history_splits, mid_embeddings):
        train, valid, _ = history_splits
        assert len(trained_rhst.history_) == 6
        # trained model beats the untrained initialization on validation data
        untrained = TasteRegressor(variant="rHST", epochs=0, seed=1)
        untrained.fit(train, mid_embeddings)

        def mean_valid_loss(model):
            total = 0.0
            for seq in valid:
                pred = model.taste_vector(seq.inputs)
                total += l2_loss(pred, mid_embeddings.get(seq.targets[4]))
            return total / len(valid)

        assert mean_valid_loss(trained_rhst) < mean_valid_loss(untrained)

    def test_train_loss_decreases(self, trained_rhst):
        losses = [row[1] for row in trained_rhst.history_]
        assert losses[-1] < losses[0]

    def test_deterministic_history(self, history_splits, mid_embeddings):
        train, valid, _ = history_splits
        a = TasteRegressor(variant="rHST", epochs=2, seed=11).fit(
            train[:64], mid_embeddings, validation=valid[:16]
        )
        b = TasteRegressor(variant="rHST", epochs=2, seed=11).fit(
            train[:64], mid_embeddings, validation=valid[:16]
        )
        assert a.history_ == b.history_
        for (_, x), (_, y) in zip(a.network_.parameters(), b.network_.parameters()):
            assert np.array_equal(x, y)

    def test_divergence_reports_location(self, history_splits, mid_embeddings):
        train, _, _ = history_splits
        with pytest.raises(TrainingDivergedError) as err:
            TasteRegressor(
                variant="rHST", epochs=3, learning_rate=1e150, seed=0
            ).fit(train[:64], mid_embeddings)
        assert "epoch" in str(err.value)

    def test_wrong_input_length_rejected(self, history_splits, mid_embeddings):
        train, _, _ = history_splits
        with pytest.raises(ValueError):
            TasteRegressor(variant="rPST", epochs=1).fit(train[:8], mid_embeddings)

    def test_cosine_loss_mode_trains(self, history_splits, mid_embeddings):
        train, _, _ = history_splits
        model = TasteRegressor(variant="rHST", loss="cosine", epochs=1, seed=2)
        model.fit(train[:64], mid_embeddings)
        assert model.history_[0][1] > 0

    def test_context_model_widens_input(self, history_splits, mid_embeddings):
        train, _, _ = history_splits
        model = TasteRegressor(variant="rHST", context_enabled=True, epochs=1, seed=2)
        model.fit(train[:64], mid_embeddings)
        assert model.network_.input_dim == 55

    def test_context_model_needs_events(self, history_splits, mid_embeddings):
        train, _, _ = history_splits
        stripped = [TrainSequence(s.inputs, s.targets) for s in train[:64]]
        model = TasteRegressor(variant="rHST", context_enabled=True, epochs=1, seed=2)
        with pytest.raises(ValueError):
            model.fit(stripped, mid_embeddings)


class TestUserState:
    def test_incremental_equals_static(self, trained_rhst, history_splits):
        _, _, test = history_splits
        seq = test[0]
        state = trained_rhst.new_user_state()
        taste = None
        for song, ts in zip(seq.inputs, range(0, 100 * 180, 180)):
            state, taste = trained_rhst.update_user_state(state, _event(song, 1000 + ts))
        static = trained_rhst.taste_vector(seq.inputs)
        assert np.max(np.abs(taste - static)) < 1e-6

    def test_fresh_state_single_song_matches(self, trained_rhst):
        sid = int(trained_rhst.embeddings_.vocab.song_ids[3])
        state = trained_rhst.new_user_state()
        _, taste = trained_rhst.update_user_state(state, _event(sid, 1000))
        assert taste == pytest.approx(trained_rhst.taste_vector([sid]), abs=1e-12)

    def test_serialized_state_continues_identically(self, trained_rhst, history_splits):
        from tastevec.taste import UserState

        _, _, test = history_splits
        seq = test[0]
        state = trained_rhst.new_user_state()
        for song in seq.inputs[:50]:
            state, _ = trained_rhst.update_user_state(state, _event(song, 1000))
        blob = state.to_bytes()
        restored = UserState.from_bytes(blob)
        a, b = state, restored
        for song in seq.inputs[50:]:
            a, ta = trained_rhst.update_user_state(a, _event(song, 2000))
            b, tb = trained_rhst.update_user_state(b, _event(song, 2000))
        assert np.array_equal(ta, tb)

    def test_wrong_architecture_rejected(self, trained_rhst):
        from tastevec.taste import UserState

        bad = UserState(states=[np.zeros(50)])
        with pytest.raises(ValueError):
            trained_rhst.update_user_state(bad, _event(0, 1000))


class TestPersistence:
    def test_round_trip(self, tmp_path, trained_rhst, history_splits):
        path = tmp_path / "model.tseq"
        trained_rhst.save(path)
        again = TasteRegressor.load(path, trained_rhst.embeddings_)
        assert again.variant == "rHST"
        seq = history_splits[2][0]
        a = trained_rhst.taste_vector(seq.inputs)
        b = again.taste_vector(seq.inputs)
        assert np.max(np.abs(a - b)) < 1e-4  # float32 storage

    def test_header_fields(self, tmp_path, trained_rhst):
        path = tmp_path / "model.tseq"
        trained_rhst.save(path)
        header = path.read_bytes().partition(b"\n\n")[0].decode("ascii")
        for needle in ("variant=rHST", "input_length=100", "offset_min=1",
                       "offset_max=10", "context=0", "embeddings_hash="):
            assert needle in header

    def test_hash_mismatch_rejected(self, tmp_path, trained_rhst, mid_vocab, mid_playlists):
        from tastevec.embeddings import train_cbow

        path = tmp_path / "model.tseq"
        trained_rhst.save(path)
        other = train_cbow(mid_playlists, mid_vocab, dims=40, epochs=0, seed=123)
        with pytest.raises(DataError):
            TasteRegressor.load(path, other)
