"""Regression losses between predicted and true song vectors."""

from __future__ import annotations

import numpy as np

from ..validation import check_vector


def l2_loss(pred, target) -> float:
    """Euclidean distance ||target - pred||_2 (not squared)."""
    pred = check_vector(pred, name="pred")
    target = check_vector(target, dim=pred.shape[0], name="target")
    return float(np.linalg.norm(target - pred))


def l2_loss_grad(pred: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Gradient of the L2 loss w.r.t. pred; zero at the (non-smooth) minimum."""
    diff = pred - target
    norm = np.linalg.norm(diff)
    if norm == 0.0:
        return np.zeros_like(diff)
    return diff / norm


def cosine_loss(pred, target) -> float:
    from ..embeddings.distance import cosine_distance

    return cosine_distance(pred, target)


def cosine_loss_grad(pred: np.ndarray, target: np.ndarray) -> np.ndarray:
    np_pred = np.linalg.norm(pred)
    np_target = np.linalg.norm(target)
    if np_pred == 0.0 or np_target == 0.0:
        raise ValueError("cosine loss gradient undefined for zero-norm vectors")
    dot = float(pred @ target)
    return dot * pred / (np_pred**3 * np_target) - target / (np_pred * np_target)


def batch_l2(preds: np.ndarray, targets: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-row L2 losses and gradients for a batch; summed-loss convention."""
    diff = preds - targets
    norms = np.linalg.norm(diff, axis=1)
    grads = np.zeros_like(diff)
    nonzero = norms > 0
    grads[nonzero] = diff[nonzero] / norms[nonzero, None]
    return norms, grads


def batch_cosine(preds: np.ndarray, targets: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    pn = np.linalg.norm(preds, axis=1)
    tn = np.linalg.norm(targets, axis=1)
    if np.any(pn == 0.0) or np.any(tn == 0.0):
        raise ValueError("cosine loss undefined for zero-norm vectors")
    dots = np.sum(preds * targets, axis=1)
    losses = 1.0 - dots / (pn * tn)
    grads = (dots / (pn**3 * tn))[:, None] * preds - targets / (pn * tn)[:, None]
    return losses, grads
