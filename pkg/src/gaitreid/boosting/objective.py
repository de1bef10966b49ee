"""Multiclass softmax cross-entropy objective: probabilities, gradients, hessians."""

from __future__ import annotations

import numpy as np

from ..errors import ContractViolationError


def softmax_probabilities(logits: np.ndarray) -> np.ndarray:
    """Numerically stable softmax along the last axis."""
    logits = np.asarray(logits, dtype=np.float64)
    shifted = logits - logits.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


def softmax_gradients(logits: np.ndarray, labels) -> tuple[np.ndarray, np.ndarray]:
    """Per-class gradient and hessian of the log-loss w.r.t. raw scores.

    gradient_k = p_k - [k == label], hessian_k = p_k * (1 - p_k).

    Accepts a single score vector of shape (K,) with an integer label, or a
    batch of shape (n, K) with a label array of shape (n,). Labels are class
    INDICES into the score axis.
    """
    logits = np.asarray(logits, dtype=np.float64)
    if not np.all(np.isfinite(logits)):
        raise ContractViolationError("softmax_gradients requires finite logits")
    single = logits.ndim == 1
    batch = logits.reshape(1, -1) if single else logits
    label_idx = np.atleast_1d(np.asarray(labels, dtype=np.intp))
    n, k = batch.shape
    if np.any(label_idx < 0) or np.any(label_idx >= k):
        raise ContractViolationError("label outside the class set")
    probs = softmax_probabilities(batch)
    grad = probs.copy()
    grad[np.arange(n), label_idx] -= 1.0
    hess = probs * (1.0 - probs)
    if single:
        return grad[0], hess[0]
    return grad, hess


def log_loss(logits: np.ndarray, labels) -> float:
    """Mean negative log-likelihood of the true class under the softmax."""
    logits = np.asarray(logits, dtype=np.float64)
    label_idx = np.asarray(labels, dtype=np.intp)
    shifted = logits - logits.max(axis=-1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=-1))
    log_p_true = shifted[np.arange(logits.shape[0]), label_idx] - log_norm
    return float(-log_p_true.mean())
