"""Corpus statistics: pairwise-distance box plots and transition counts."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..corpus.types import TrainSequence
from ..embeddings.matrix import EmbeddingMatrix


@dataclass
class BoxStats:
    q1: float
    median: float
    q3: float
    whisker_low: float
    whisker_high: float
    count: int


@dataclass
class ListeningStats:
    all_pairs: BoxStats
    subsequent_pairs: BoxStats
    transitions_per_user: np.ndarray  # adjacent plays with cosine distance > 1
    median_transitions: float


def box_stats(values: np.ndarray) -> BoxStats:
    """Linear-interpolation quartiles with whiskers at 1.5 IQR fences."""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise ValueError("cannot compute box statistics of an empty sample")
    q1, median, q3 = np.quantile(values, [0.25, 0.5, 0.75], method="linear")
    iqr = q3 - q1
    low_fence = q1 - 1.5 * iqr
    high_fence = q3 + 1.5 * iqr
    inside = values[(values >= low_fence) & (values <= high_fence)]
    return BoxStats(
        q1=float(q1),
        median=float(median),
        q3=float(q3),
        whisker_low=float(inside.min()),
        whisker_high=float(inside.max()),
        count=int(values.size),
    )


def listening_stats(
    test_set: list[TrainSequence], embeddings: EmbeddingMatrix
) -> ListeningStats:
    """Distance statistics over every test sequence (inputs plus targets)."""
    if not test_set:
        raise ValueError("test set must be non-empty")
    all_pairs = []
    adjacent = []
    transitions = np.empty(len(test_set), dtype=np.int64)
    for i, seq in enumerate(test_set):
        M = embeddings.take(seq.all_songs)
        norms = np.linalg.norm(M, axis=1)
        if np.any(norms == 0.0):
            raise ValueError("sequence contains zero-norm song vectors")
        unit = M / norms[:, None]
        sims = unit @ unit.T
        iu = np.triu_indices(len(M), k=1)
        all_pairs.append(1.0 - sims[iu])
        steps = 1.0 - np.sum(unit[:-1] * unit[1:], axis=1)
        adjacent.append(steps)
        transitions[i] = int(np.count_nonzero(steps > 1.0))
    return ListeningStats(
        all_pairs=box_stats(np.concatenate(all_pairs)),
        subsequent_pairs=box_stats(np.concatenate(adjacent)),
        transitions_per_user=transitions,
        median_transitions=float(np.median(transitions)),
    )
