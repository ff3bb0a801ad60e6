"""Ordinal losses on raw logits, plus probability and rank decoding.

All losses take 1-based rank labels and return a 1x1 :class:`Tensor`.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import expit

from .labels import build_subset_masks, check_ranks, extend_labels
from .tensor import Tensor, as_tensor, log_softmax, logsigmoid, matmul

__all__ = [
    "corn_loss",
    "corn_loss_reference",
    "binary_tasks_loss",
    "coral_logits",
    "coral_loss",
    "ornn_loss",
    "ce_loss",
    "chain_rule_probs",
    "decode_rank",
    "decode_rank_ce",
    "softmax",
    "task_probabilities",
]


def _task_count(logits: Tensor, num_classes: int | None) -> int:
    k = logits.shape[1] + 1 if num_classes is None else num_classes
    if k - 1 < 1:
        raise ValueError("need at least one binary task (K >= 2)")
    if logits.shape[1] != k - 1:
        raise ValueError(f"expected {k - 1} logit columns for K={k}, got {logits.shape[1]}")
    return k


def _masked_bce_sum(logits: Tensor, positive: np.ndarray, negative: np.ndarray) -> Tensor:
    # log(1 - sigmoid(z)) == logsigmoid(z) - z
    dtype = logits.dtype
    pos = Tensor(positive, dtype=dtype)
    neg = Tensor(negative, dtype=dtype)
    log_p = logsigmoid(logits)
    terms = log_p * pos + (log_p - logits) * neg
    return terms.sum()


def corn_loss(logits, ranks, num_classes: int | None = None) -> Tensor:
    """Conditional-subset loss for K-1 chained binary tasks.

    Task ``j`` only sees examples whose rank exceeds ``j - 1``; the summed
    binary cross-entropy is divided by the total subset size in the batch.
    Empty subsets contribute nothing to either sum.
    """
    logits = as_tensor(logits)
    k = _task_count(logits, num_classes)
    masks = build_subset_masks(ranks, k)
    bits = extend_labels(ranks, k).reshape(masks.members.shape).astype(bool)
    if masks.members.shape[0] != logits.shape[0]:
        raise ValueError("logits and labels disagree on batch size")
    positive = masks.members & bits
    negative = masks.members & ~bits
    return _masked_bce_sum(logits, positive, negative) * (-1.0 / masks.total)


def corn_loss_reference(probabilities, ranks, num_classes: int | None = None) -> float:
    """Plain log / log(1-p) form of the CORN loss, one example at a time.

    Slow on purpose. Probabilities are clamped to [1e-12, 1 - 1e-12].
    """
    probs = np.asarray(probabilities, dtype=np.float64)
    if probs.ndim == 1:
        probs = probs[None, :]
    k = probs.shape[1] + 1 if num_classes is None else num_classes
    ranks = check_ranks(ranks, k).reshape(-1)
    total = 0.0
    count = 0
    for j in range(1, k):
        for i in range(len(ranks)):
            y = int(ranks[i])
            if j > 1 and not y > j - 1:
                continue
            p = min(max(float(probs[i, j - 1]), 1e-12), 1.0 - 1e-12)
            if y > j:
                total += math.log(p)
            else:
                total += math.log(1.0 - p)
            count += 1
    return -total / count


def binary_tasks_loss(logits, ranks, num_classes: int | None = None) -> Tensor:
    """Extended-binary cross-entropy, every task on the full batch.

    Summed over tasks and examples, divided by the batch size.
    """
    logits = as_tensor(logits)
    k = _task_count(logits, num_classes)
    bits = extend_labels(ranks, k).reshape(logits.shape[0], k - 1).astype(bool)
    return _masked_bce_sum(logits, bits, ~bits) * (-1.0 / logits.shape[0])


def ornn_loss(logits, ranks, num_classes: int | None = None) -> Tensor:
    return binary_tasks_loss(logits, ranks, num_classes)


def coral_logits(shared_logit, biases) -> Tensor:
    """Per-task logits from one shared column plus K-1 task biases."""
    shared_logit, biases = as_tensor(shared_logit), as_tensor(biases)
    if shared_logit.shape[1] != 1:
        raise ValueError(f"shared logit must be a single column, got {shared_logit.shape}")
    ones = Tensor(np.ones((1, biases.shape[1]), dtype=shared_logit.dtype))
    return matmul(shared_logit, ones) + biases


def coral_loss(shared_logit, biases, ranks) -> Tensor:
    biases = as_tensor(biases)
    return binary_tasks_loss(coral_logits(shared_logit, biases), ranks, biases.shape[1] + 1)


def ce_loss(logits, ranks, num_classes: int | None = None) -> Tensor:
    """Multi-category cross-entropy averaged over the batch."""
    logits = as_tensor(logits)
    k = logits.shape[1] if num_classes is None else num_classes
    if logits.shape[1] != k:
        raise ValueError(f"expected {k} logit columns, got {logits.shape[1]}")
    ranks = check_ranks(ranks, k).reshape(-1)
    onehot = np.zeros(logits.shape, dtype=logits.dtype)
    onehot[np.arange(len(ranks)), ranks - 1] = 1
    return (log_softmax(logits) * Tensor(onehot)).sum() * (-1.0 / logits.shape[0])


def softmax(logits) -> np.ndarray:
    z = np.asarray(logits.data if isinstance(logits, Tensor) else logits, dtype=float)
    e = np.exp(z - z.max(axis=1, keepdims=True))
    return e / e.sum(axis=1, keepdims=True)


def task_probabilities(logits) -> np.ndarray:
    z = logits.data if isinstance(logits, Tensor) else np.asarray(logits)
    return expit(z)


def chain_rule_probs(conditional) -> np.ndarray:
    """Unconditional exceedance probabilities as running products."""
    return np.cumprod(np.asarray(conditional), axis=-1)


def decode_rank(unconditional) -> np.ndarray:
    """Rank index 1 + number of tasks with probability strictly above 0.5."""
    probs = np.atleast_2d(np.asarray(unconditional))
    if probs.shape[1] < 1:
        raise ValueError("need at least one task column")
    return 1 + (probs > 0.5).sum(axis=1)


def decode_rank_ce(logits) -> np.ndarray:
    z = np.atleast_2d(logits.data if isinstance(logits, Tensor) else np.asarray(logits))
    # argmax returns the first maximum, so ties go to the lower rank
    return z.argmax(axis=1) + 1
