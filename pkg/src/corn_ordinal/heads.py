"""Output layers for the four training strategies.

========  ===============  ==========  ==========================
kind      weight columns   biases      loss
========  ===============  ==========  ==========================
corn      K-1              K-1         conditional subsets
ornn      K-1              K-1         full-batch binary tasks
coral     1 (shared)       K-1         full-batch binary tasks
ce        K                K           softmax cross-entropy
========  ===============  ==========  ==========================
"""

from __future__ import annotations

import numpy as np

from . import losses
from .tensor import Tensor, matmul

HEAD_KINDS = ("corn", "coral", "ornn", "ce")


class OrdinalHead:
    def __init__(self, kind: str, num_classes: int, in_features: int, rng: np.random.Generator, dtype=np.float32):
        kind = kind.lower()
        if kind not in HEAD_KINDS:
            raise ValueError(f"unknown head kind {kind!r}; choose from {', '.join(HEAD_KINDS)}")
        if num_classes < 2:
            raise ValueError(f"need at least 2 ranks, got K={num_classes}")
        self.kind = kind
        self.num_classes = num_classes
        n_bias = num_classes if kind == "ce" else num_classes - 1
        n_cols = 1 if kind == "coral" else n_bias
        bound = np.sqrt(1.0 / in_features)
        self.weight = Tensor(rng.uniform(-bound, bound, size=(in_features, n_cols)), requires_grad=True, dtype=dtype)
        self.bias = Tensor(np.zeros((1, n_bias)), requires_grad=True, dtype=dtype)

    @property
    def parameters(self) -> list[Tensor]:
        return [self.weight, self.bias]

    @property
    def output_width(self) -> int:
        return self.bias.shape[1]

    def logits(self, hidden: Tensor) -> Tensor:
        """Raw output-layer net inputs; CORAL expands its shared column per task."""
        if self.kind == "coral":
            return losses.coral_logits(matmul(hidden, self.weight), self.bias)
        return matmul(hidden, self.weight) + self.bias

    def loss(self, logits: Tensor, ranks) -> Tensor:
        if self.kind == "corn":
            return losses.corn_loss(logits, ranks, self.num_classes)
        if self.kind == "ce":
            return losses.ce_loss(logits, ranks, self.num_classes)
        return losses.binary_tasks_loss(logits, ranks, self.num_classes)

    def probabilities(self, logits) -> np.ndarray:
        """P(y > r_k) per task, or class probabilities for ``ce``."""
        if self.kind == "ce":
            return losses.softmax(logits)
        probs = losses.task_probabilities(logits)
        if self.kind == "corn":
            probs = losses.chain_rule_probs(probs)
        return probs

    def predict(self, logits) -> np.ndarray:
        if self.kind == "ce":
            return losses.decode_rank_ce(logits)
        return losses.decode_rank(self.probabilities(logits))
