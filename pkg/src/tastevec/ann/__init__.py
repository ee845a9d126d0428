"""Approximate nearest-neighbor retrieval over song vectors."""

from .forest import ProjectionForest, build_index, exact_knn

__all__ = ["ProjectionForest", "build_index", "exact_knn"]
