"""Play-context feature vectors: time delta plus summed one-hot indicators."""

from __future__ import annotations

import math

import numpy as np

from ..corpus.types import NUM_CONTEXTS, ListeningEvent

CONTEXT_VECTOR_DIM = 1 + NUM_CONTEXTS


def scale_time_delta(delta_seconds: float, mode: str = "log") -> float:
    """Compress raw second gaps; 'raw' feeds the unscaled value through.

    Raw gaps span minutes to weeks, which conditions badly as a network
    input, so log(1 + delta) is the default.
    """
    if mode == "raw":
        return float(delta_seconds)
    if mode == "log":
        return math.log1p(float(delta_seconds))
    raise ValueError(f"unknown time scaling mode {mode!r}")


def build_context_vector(
    event: ListeningEvent,
    prev_event: ListeningEvent | None = None,
    time_scaling: str = "log",
) -> np.ndarray:
    """Delta-time component followed by one indicator slot per context value.

    The delta component is 0 when there is no previous play.
    """
    vec = np.zeros(CONTEXT_VECTOR_DIM)
    if prev_event is not None:
        vec[0] = scale_time_delta(event.timestamp - prev_event.timestamp, time_scaling)
    for ctx in event.contexts:
        vec[1 + ctx.index] = 1.0
    return vec


def context_matrix(
    events, time_scaling: str = "log", prev_event: ListeningEvent | None = None
) -> np.ndarray:
    """Stack context vectors for an event sequence, chaining time deltas."""
    rows = np.zeros((len(events), CONTEXT_VECTOR_DIM))
    prev = prev_event
    for j, event in enumerate(events):
        rows[j] = build_context_vector(event, prev, time_scaling)
        prev = event
    return rows
