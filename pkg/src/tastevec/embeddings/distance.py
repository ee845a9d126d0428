"""Vector-space distance primitives."""

from __future__ import annotations

import numpy as np

from ..validation import check_vector


def cosine_distance(x, y) -> float:
    """1 - cos(x, y), in [0, 2]. Zero-norm inputs are rejected."""
    x = check_vector(x, name="x")
    y = check_vector(y, dim=x.shape[0], name="y")
    nx = np.linalg.norm(x)
    ny = np.linalg.norm(y)
    if nx == 0.0 or ny == 0.0:
        raise ValueError("cosine distance is undefined for zero-norm vectors")
    # rounding can leave the result a few ulp outside the declared [0, 2]
    return float(min(2.0, max(0.0, 1.0 - np.dot(x, y) / (nx * ny))))


def cosine_distances_to(matrix: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Cosine distance from every row of ``matrix`` to ``q``, vectorized."""
    q = check_vector(q, dim=matrix.shape[1], name="q")
    nq = np.linalg.norm(q)
    if nq == 0.0:
        raise ValueError("cosine distance is undefined for zero-norm vectors")
    norms = np.linalg.norm(matrix, axis=1)
    if np.any(norms == 0.0):
        raise ValueError("matrix contains zero-norm rows")
    return np.clip(1.0 - (matrix @ q) / (norms * nq), 0.0, 2.0)


def pairwise_cosine_distances(matrix: np.ndarray) -> np.ndarray:
    """Condensed upper-triangle cosine distances between all row pairs."""
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    if np.any(norms == 0.0):
        raise ValueError("matrix contains zero-norm rows")
    unit = matrix / norms
    sims = unit @ unit.T
    iu = np.triu_indices(len(matrix), k=1)
    return np.clip(1.0 - sims[iu], 0.0, 2.0)
