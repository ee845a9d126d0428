"""tastevec: song embeddings, recurrent taste vectors, and LSH-forest retrieval."""

from .ann import ProjectionForest, build_index, exact_knn
from .baselines import (
    DiscountModel,
    SoftmaxClassifier,
    WeightModel,
    ZipfSampler,
    discount_taste,
    weight_taste,
)
from .embeddings import CbowEmbedder, EmbeddingMatrix, Vocabulary, cosine_distance
from .errors import DataError, TasteVecError, TrainingDivergedError
from .taste import TasteRegressor, UserState

__version__ = "0.1.0"

__all__ = [
    "CbowEmbedder",
    "DataError",
    "DiscountModel",
    "EmbeddingMatrix",
    "ProjectionForest",
    "SoftmaxClassifier",
    "TasteRegressor",
    "TasteVecError",
    "TrainingDivergedError",
    "UserState",
    "Vocabulary",
    "WeightModel",
    "ZipfSampler",
    "build_index",
    "cosine_distance",
    "discount_taste",
    "exact_knn",
    "weight_taste",
]
