"""Song-embedding learning and vector-space primitives."""

from .cbow import CbowEmbedder, train_cbow
from .distance import cosine_distance, cosine_distances_to, pairwise_cosine_distances
from .matrix import EmbeddingMatrix
from .vocab import Vocabulary, build_vocabulary

__all__ = [
    "CbowEmbedder",
    "EmbeddingMatrix",
    "Vocabulary",
    "build_vocabulary",
    "cosine_distance",
    "cosine_distances_to",
    "pairwise_cosine_distances",
    "train_cbow",
]
