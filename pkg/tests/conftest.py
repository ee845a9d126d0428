"""Shared fixtures: one mid-sized synthetic pipeline reused across modules.

Building embeddings and history chunks dominates test runtime, so anything
downstream of CBoW training shares these session-scoped artifacts.
"""

import numpy as np
import pytest

from tastevec.corpus import (
    filter_playlists,
    generate_catalog,
    generate_histories,
    generate_playlists,
)
from tastevec.embeddings import build_vocabulary, train_cbow
from tastevec.pipeline.config import PipelineConfig
from tastevec.pipeline.data import history_datasets


@pytest.fixture(scope="session")
def small_catalog():
    return generate_catalog(300, 60, 6, seed=13)


@pytest.fixture(scope="session")
def mid_catalog():
    return generate_catalog(2000, 1000, 20, seed=3)


@pytest.fixture(scope="session")
def mid_playlists(mid_catalog):
    playlists = generate_playlists(
        mid_catalog, 1500, (40, 160), 0.95, seed=1, popularity_exponent=0.7
    )
    return filter_playlists(playlists, mid_catalog, 2000)


@pytest.fixture(scope="session")
def mid_vocab(mid_playlists, mid_catalog):
    return build_vocabulary(mid_playlists, mid_catalog, 2000)


@pytest.fixture(scope="session")
def mid_embeddings(mid_playlists, mid_vocab):
    return train_cbow(
        mid_playlists, mid_vocab, dims=40, window=5, negatives=5, epochs=5, seed=5
    )


@pytest.fixture(scope="session")
def mid_histories(mid_catalog):
    return generate_histories(mid_catalog, 700, 300, 21, seed=2)


@pytest.fixture(scope="session")
def history_splits(mid_histories, mid_catalog, mid_embeddings):
    cfg = PipelineConfig(seed=3)
    return history_datasets(mid_histories, mid_catalog, mid_embeddings, cfg)


@pytest.fixture(scope="session")
def trained_rhst(history_splits, mid_embeddings):
    from tastevec.taste import TasteRegressor

    train, valid, _ = history_splits
    model = TasteRegressor(variant="rHST", epochs=6, seed=1)
    model.fit(train, mid_embeddings, validation=valid or None)
    return model


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260809)
