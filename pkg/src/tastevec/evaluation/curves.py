"""Forward and backward cosine-distance curves for taste models.

Forward: how far the taste vector (computed from the 100 input songs) lies
from each of the 50 future songs. Backward: how far it lies from each of
the 100 input songs it was computed from. Both are averaged over users.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..corpus.types import TrainSequence
from ..embeddings.matrix import EmbeddingMatrix

FORWARD_LENGTH = 50
BACKWARD_LENGTH = 100


@dataclass
class CurveReport:
    kind: str  # "forward" or "backward"
    curves: dict[str, np.ndarray] = field(default_factory=dict)

    def add(self, name: str, curve: np.ndarray) -> None:
        expected = FORWARD_LENGTH if self.kind == "forward" else BACKWARD_LENGTH
        if curve.shape != (expected,):
            raise ValueError(f"{self.kind} curve must have length {expected}")
        self.curves[name] = curve

    def merge(self, other: "CurveReport") -> "CurveReport":
        if other.kind != self.kind:
            raise ValueError("cannot merge forward and backward reports")
        self.curves.update(other.curves)
        return self


def _check_test_set(test_set: list[TrainSequence]) -> None:
    if not test_set:
        raise ValueError("test set must be non-empty")
    for seq in test_set:
        if len(seq.inputs) != BACKWARD_LENGTH or len(seq.targets) != FORWARD_LENGTH:
            raise ValueError(
                "curve analyses need sequences with 100 input and 50 future songs"
            )


def _distance_rows(
    taste_fn, test_set, embeddings: EmbeddingMatrix, songs_of
) -> np.ndarray:
    rows = []
    for seq in test_set:
        taste = np.asarray(taste_fn(seq), dtype=np.float64)
        tn = np.linalg.norm(taste)
        if tn == 0.0:
            raise ValueError("taste vector has zero norm")
        M = embeddings.take(songs_of(seq))
        norms = np.linalg.norm(M, axis=1)
        rows.append(1.0 - (M @ taste) / (norms * tn))
    return np.vstack(rows)


def forward_analysis(
    taste_fn, test_set: list[TrainSequence], embeddings: EmbeddingMatrix, name: str = "model"
) -> CurveReport:
    """Mean cosine distance from the taste vector to future song j, j=1..50."""
    _check_test_set(test_set)
    rows = _distance_rows(taste_fn, test_set, embeddings, lambda s: s.targets)
    report = CurveReport(kind="forward")
    report.add(name, rows.mean(axis=0))
    return report


def backward_analysis(
    taste_fn, test_set: list[TrainSequence], embeddings: EmbeddingMatrix, name: str = "model"
) -> CurveReport:
    """Mean cosine distance from the taste vector back to input song j, j=1..100."""
    _check_test_set(test_set)
    rows = _distance_rows(taste_fn, test_set, embeddings, lambda s: s.inputs)
    report = CurveReport(kind="backward")
    report.add(name, rows.mean(axis=0))
    return report
