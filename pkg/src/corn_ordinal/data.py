"""Tabular ordinal datasets: CSV ingestion, balancing, splitting, scaling.

Every function is a pure function of its inputs and seed. ``row_ids`` on a
:class:`Dataset` always refer to data rows of the original source
(0-based, header excluded), so split manifests stay meaningful after
balancing and shuffling.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.special import ndtr

from .labels import LabelError

log = logging.getLogger(__name__)

DEFAULT_FRACTIONS = (0.75, 0.05, 0.20)


class DataError(ValueError):
    pass


@dataclass
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    num_classes: int
    feature_names: list[str] = field(default_factory=list)
    row_ids: np.ndarray | None = None
    mean: np.ndarray | None = None
    std: np.ndarray | None = None

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2 or len(self.features) != len(self.labels):
            raise DataError(f"features {self.features.shape} and labels {self.labels.shape} disagree")
        if self.row_ids is None:
            self.row_ids = np.arange(len(self.labels))
        if not self.feature_names:
            self.feature_names = [f"x{i}" for i in range(self.features.shape[1])]
        if len(self.labels) and (self.labels.min() < 1 or self.labels.max() > self.num_classes):
            raise LabelError(f"labels must lie in 1..{self.num_classes}")
        if np.isnan(self.features).any():
            raise DataError("features contain missing values")

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def subset(self, index) -> "Dataset":
        index = np.asarray(index)
        return replace(self, features=self.features[index], labels=self.labels[index], row_ids=self.row_ids[index])

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.num_classes + 1)[1:]


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def load_csv(path, num_classes: int | None = None, label_column: int = -1, remap_labels: bool = False) -> Dataset:
    """Read numeric features plus one integer rank column.

    A first row containing any non-numeric cell is taken as a header. With
    ``remap_labels`` the sorted distinct label values become ranks 1..m.
    Without it, labels must already be integers in 1..K.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        rows = [(i + 1, row) for i, row in enumerate(csv.reader(fh)) if row and any(c.strip() for c in row)]
    if not rows:
        raise DataError(f"{path}: file is empty")
    names = None
    if not all(_is_number(c) for c in rows[0][1]):
        names = [c.strip() for c in rows[0][1]]
        rows = rows[1:]
    if not rows:
        raise DataError(f"{path}: no data rows after the header")

    width = len(rows[0][1])
    if width < 2:
        raise DataError(f"{path}: need at least one feature column and a label column")
    col = label_column % width
    feats = np.empty((len(rows), width - 1))
    raw = np.empty(len(rows))
    for r, (lineno, row) in enumerate(rows):
        if len(row) != width:
            raise DataError(f"{path}:{lineno}: expected {width} columns, got {len(row)}")
        try:
            values = [float(c) for c in row]
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: {exc}") from None
        if any(math.isnan(v) for v in values):
            raise DataError(f"{path}:{lineno}: missing value")
        raw[r] = values.pop(col)
        feats[r] = values

    if remap_labels:
        distinct = np.unique(raw)
        labels = np.searchsorted(distinct, raw) + 1
        if num_classes is not None and len(distinct) != num_classes:
            raise LabelError(f"{path}: found {len(distinct)} distinct labels, expected K={num_classes}")
    else:
        bad = np.flatnonzero(raw != np.round(raw))
        if bad.size:
            raise LabelError(f"{path}:{rows[bad[0]][0]}: label {raw[bad[0]]} is not an integer")
        labels = raw.astype(np.int64)
    k = int(labels.max()) if num_classes is None else num_classes
    bad = np.flatnonzero((labels < 1) | (labels > k))
    if bad.size:
        raise LabelError(f"{path}:{rows[bad[0]][0]}: label {labels[bad[0]]} outside 1..{k}")

    feature_names = []
    if names is not None:
        feature_names = names[:col] + names[col + 1:]
    ds = Dataset(feats, labels, k, feature_names)
    log.info("loaded %s: N=%d d=%d K=%d counts=%s", path, len(ds), ds.n_features, k, ds.class_counts().tolist())
    return ds


def write_csv(path, ds: Dataset) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(list(ds.feature_names) + ["rank"])
        for x, y in zip(ds.features, ds.labels):
            w.writerow([repr(float(v)) for v in x] + [int(y)])


def balance_classes(ds: Dataset, rng: np.random.Generator) -> Dataset:
    """Subsample every class without replacement to the smallest class size.

    Kept rows stay in their original order.
    """
    counts = ds.class_counts()
    if counts.min() == 0:
        empty = int(np.argmin(counts)) + 1
        raise DataError(f"class {empty} has no examples; cannot balance")
    target = int(counts.min())
    keep = []
    for k in range(1, ds.num_classes + 1):
        idx = np.flatnonzero(ds.labels == k)
        keep.append(rng.choice(idx, size=target, replace=False) if len(idx) > target else idx)
    return ds.subset(np.sort(np.concatenate(keep)))


def split_sizes(n: int, fractions=DEFAULT_FRACTIONS) -> list[int]:
    """Largest-remainder rounding of ``n * fractions``; ties go to the earlier split."""
    if not math.isclose(sum(fractions), 1.0, abs_tol=1e-9):
        raise ValueError(f"fractions must sum to 1, got {fractions}")
    exact = [n * f for f in fractions]
    sizes = [math.floor(e) for e in exact]
    order = sorted(range(len(exact)), key=lambda i: (-(exact[i] - sizes[i]), i))
    for i in order[: n - sum(sizes)]:
        sizes[i] += 1
    return sizes


def split(ds: Dataset, fractions=DEFAULT_FRACTIONS, seed: int = 0) -> tuple[Dataset, ...]:
    """Shuffle and cut into disjoint train/val/test parts."""
    if len(ds) < 20:
        raise DataError(f"need at least 20 examples to split, got {len(ds)}")
    perm = np.random.default_rng(seed).permutation(len(ds))
    bounds = np.cumsum([0] + split_sizes(len(ds), fractions))
    return tuple(ds.subset(perm[a:b]) for a, b in zip(bounds[:-1], bounds[1:]))


def standardize(train: Dataset, *others: Dataset) -> tuple[Dataset, ...]:
    """Scale every dataset with the training columns' mean and std.

    Zero-variance columns are only centered.
    """
    if len(train) == 0:
        raise DataError("cannot standardize with an empty training set")
    mean = train.features.mean(axis=0)
    std = train.features.std(axis=0)
    std = np.where(std > 0, std, 1.0)
    return tuple(apply_standardization(d, mean, std) for d in (train, *others))


def apply_standardization(ds: Dataset, mean, std) -> Dataset:
    mean, std = np.asarray(mean, dtype=np.float64), np.asarray(std, dtype=np.float64)
    return replace(ds, features=(ds.features - mean) / std, mean=mean, std=std)


def synth_ordinal(n: int, d: int, num_classes: int, noise: float = 0.0, seed: int = 0) -> Dataset:
    """Gaussian features with ranks cut from a noisy monotone latent score.

    The linear score ``w.x`` is pushed through the normal CDF so it is
    uniform on (0, 1); Gaussian noise of scale ``noise`` is added and the
    result is cut at K-1 equally spaced thresholds ``k/K``.
    """
    if n < num_classes:
        raise ValueError(f"need n >= K, got n={n}, K={num_classes}")
    if num_classes < 2 or d < 1:
        raise ValueError("need K >= 2 and d >= 1")
    rng = np.random.default_rng(seed)
    w = rng.normal(size=d)
    w /= np.linalg.norm(w)
    x = rng.normal(size=(n, d))
    latent = ndtr(x @ w) + noise * rng.normal(size=n)
    thresholds = np.arange(1, num_classes) / num_classes
    labels = 1 + np.searchsorted(thresholds, latent, side="right")
    return Dataset(x, labels, num_classes)
