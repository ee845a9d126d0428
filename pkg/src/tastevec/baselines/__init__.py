"""Comparison models: discounting, learned weights, and classification."""

from .aggregate import (
    DiscountModel,
    WeightModel,
    discount_taste,
    train_weight_model,
    weight_taste,
)
from .classifier import SoftmaxClassifier, bpr_loss, cross_entropy_loss, softmax
from .zipf import ZipfSampler, zipf_sample

__all__ = [
    "DiscountModel",
    "SoftmaxClassifier",
    "WeightModel",
    "ZipfSampler",
    "bpr_loss",
    "cross_entropy_loss",
    "discount_taste",
    "softmax",
    "train_weight_model",
    "weight_taste",
    "zipf_sample",
]
