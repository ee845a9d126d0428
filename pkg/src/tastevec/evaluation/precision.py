"""precision@k and precision@[j:k] over recommended songs.

A recommendation counts as a hit when it appears among the user's future
plays at positions j..k. Recommendations never include songs from the
user's 100 input plays: vector models pass the input set to the index query
as an exclusion, and score models mask those entries before the top-k cut.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..ann.forest import ProjectionForest
from ..corpus.types import TrainSequence
from ..embeddings.matrix import EmbeddingMatrix

#: metric label -> (j, k) window over future positions
STANDARD_METRICS: dict[str, tuple[int, int]] = {
    "@10": (1, 10),
    "@25": (1, 25),
    "@50": (1, 50),
    "@[25:50]": (25, 50),
    "@[30:50]": (30, 50),
}


@dataclass
class PrecisionReport:
    values: dict[str, dict[str, float]] = field(default_factory=dict)

    def add(self, model: str, metric: str, value: float) -> None:
        self.values.setdefault(model, {})[metric] = value


def top_scoring_songs(
    scores: np.ndarray, embeddings: EmbeddingMatrix, width: int, exclude
) -> set[int]:
    """Highest-scoring non-excluded songs; ties break on lower song id."""
    song_ids = embeddings.vocab.song_ids
    order = np.lexsort((song_ids, -scores))
    out: set[int] = set()
    for idx in order:
        sid = int(song_ids[idx])
        if sid in exclude:
            continue
        out.add(sid)
        if len(out) == width:
            break
    return out


def precision_at(
    recommender,
    test_set: list[TrainSequence],
    j: int,
    k: int,
    forest: ProjectionForest | None = None,
    embeddings: EmbeddingMatrix | None = None,
    search_k: int | None = None,
) -> float:
    """Average fraction of recommended songs hitting future positions j..k.

    With a ``forest``, ``recommender(seq)`` must return a taste vector and
    the k-j+1 nearest songs are retrieved; without one it must return a
    score per vocabulary entry and the top k-j+1 scores are used instead.
    """
    if not 1 <= j <= k:
        raise ValueError(f"need 1 <= j <= k, got ({j}, {k})")
    if not test_set:
        raise ValueError("test set must be non-empty")
    width = k - j + 1
    total = 0.0
    for seq in test_set:
        if len(seq.targets) < k:
            raise ValueError(f"sequence targets must reach position {k}")
        exclude = set(seq.inputs)
        if forest is not None:
            taste = recommender(seq)
            hits = forest.query(taste, k=width, search_k=search_k, exclude=exclude)
            recommended = {sid for sid, _ in hits}
        else:
            if embeddings is None:
                raise ValueError("score-based precision needs embeddings")
            scores = np.asarray(recommender(seq), dtype=np.float64)
            if scores.shape != (len(embeddings),):
                raise ValueError(
                    f"expected one score per vocabulary song ({len(embeddings)}), "
                    f"got shape {scores.shape}"
                )
            recommended = top_scoring_songs(scores, embeddings, width, exclude)
        truth = set(seq.targets[j - 1 : k])
        total += len(recommended & truth) / width
    return total / len(test_set)


def precision_table(
    recommenders: dict[str, object],
    test_set: list[TrainSequence],
    forest: ProjectionForest,
    embeddings: EmbeddingMatrix,
    metrics: dict[str, tuple[int, int]] | None = None,
    search_k: int | None = None,
    score_models: set[str] | None = None,
) -> PrecisionReport:
    """Evaluate several models across the standard metric windows."""
    metrics = metrics or STANDARD_METRICS
    score_models = score_models or set()
    report = PrecisionReport()
    for name, fn in recommenders.items():
        for label, (j, k) in metrics.items():
            if name in score_models:
                value = precision_at(
                    fn, test_set, j, k, forest=None, embeddings=embeddings
                )
            else:
                value = precision_at(
                    fn, test_set, j, k, forest=forest, search_k=search_k
                )
            report.add(name, label, value)
    return report


def popularity_recommender(embeddings: EmbeddingMatrix):
    """Static score model: most popular song first (vocab is rank-ordered)."""
    scores = -np.arange(len(embeddings), dtype=np.float64)

    def fn(_seq: TrainSequence) -> np.ndarray:
        return scores

    return fn
