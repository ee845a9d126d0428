"""Taste-vector regressors and their training machinery."""

from .context import CONTEXT_VECTOR_DIM, build_context_vector, context_matrix, scale_time_delta
from .losses import cosine_loss, cosine_loss_grad, l2_loss, l2_loss_grad
from .model import VARIANTS, TasteRegressor, UserState, draw_offsets

__all__ = [
    "CONTEXT_VECTOR_DIM",
    "VARIANTS",
    "TasteRegressor",
    "UserState",
    "build_context_vector",
    "context_matrix",
    "cosine_loss",
    "cosine_loss_grad",
    "draw_offsets",
    "l2_loss",
    "l2_loss_grad",
    "scale_time_delta",
]
