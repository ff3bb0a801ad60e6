"""Rank labels, their extended binary form, and conditional subsets.

Ranks are 1-based everywhere outside this module (1..K). Column ``c`` of
any (N, K-1) array produced here belongs to binary task ``c + 1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "LabelError",
    "check_ranks",
    "extend_labels",
    "SubsetMasks",
    "build_subset_masks",
]


class LabelError(ValueError):
    pass


def check_ranks(ranks, num_classes: int) -> np.ndarray:
    """Validate 1-based rank labels and return them as an int64 array."""
    if num_classes < 2:
        raise LabelError(f"need at least 2 ranks, got K={num_classes}")
    arr = np.asarray(ranks)
    if arr.dtype.kind == "f":
        if not np.all(arr == np.round(arr)):
            raise LabelError("rank labels must be integers")
    elif arr.dtype.kind not in "iu":
        raise LabelError(f"rank labels must be integers, got dtype {arr.dtype}")
    arr = arr.astype(np.int64)
    if arr.size and (arr.min() < 1 or arr.max() > num_classes):
        bad = arr[(arr < 1) | (arr > num_classes)][0]
        raise LabelError(f"rank {bad} outside 1..{num_classes}")
    return arr


def extend_labels(ranks, num_classes: int) -> np.ndarray:
    """Binary expansion: bit k is 1 iff rank > k, for k = 1..K-1.

    >>> extend_labels(3, 5)
    array([1, 1, 0, 0])
    """
    arr = check_ranks(ranks, num_classes)
    thresholds = np.arange(1, num_classes)
    return (arr[..., None] > thresholds).astype(np.int64)


@dataclass(frozen=True)
class SubsetMasks:
    """Per-task membership of a batch in the conditional training subsets.

    ``members[i, j]`` is True when example ``i`` belongs to the subset of
    task ``j + 1``, i.e. its rank exceeds ``j``. Task 1 holds everyone.
    """

    members: np.ndarray
    sizes: np.ndarray

    @property
    def total(self) -> int:
        return int(self.sizes.sum())


def build_subset_masks(ranks, num_classes: int) -> SubsetMasks:
    arr = check_ranks(ranks, num_classes).reshape(-1)
    if arr.size == 0:
        raise LabelError("cannot build subsets for an empty batch")
    members = arr[:, None] > np.arange(num_classes - 1)
    return SubsetMasks(members=members, sizes=members.sum(axis=0))
