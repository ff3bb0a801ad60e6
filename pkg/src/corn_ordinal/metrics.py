"""Rank error metrics and the per-run training report."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

REPORT_VERSION = 1


def _pair(truth, pred) -> tuple[np.ndarray, np.ndarray]:
    truth = np.asarray(truth, dtype=np.float64).reshape(-1)
    pred = np.asarray(pred, dtype=np.float64).reshape(-1)
    if truth.shape != pred.shape:
        raise ValueError(f"length mismatch: {truth.size} truths vs {pred.size} predictions")
    if truth.size == 0:
        raise ValueError("metrics need at least one example")
    return truth, pred


def mae(truth, pred) -> float:
    truth, pred = _pair(truth, pred)
    return float(np.mean(np.abs(truth - pred)))


def rmse(truth, pred) -> float:
    truth, pred = _pair(truth, pred)
    return float(np.sqrt(np.mean((truth - pred) ** 2)))


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    val_mae: float
    val_rmse: float


@dataclass
class TrainReport:
    """Everything a training run produced, minus the weights.

    Serialized as JSON lines: one ``{"type": "epoch", ...}`` object per
    epoch followed by one ``{"type": "summary", ...}`` object.
    """

    method: str
    seed: int
    config: dict = field(default_factory=dict)
    epochs: list[EpochRecord] = field(default_factory=list)
    selected_epoch: int | None = None
    test_mae: float | None = None
    test_rmse: float | None = None

    def add_epoch(self, train_loss: float, val_mae: float, val_rmse: float) -> EpochRecord:
        rec = EpochRecord(len(self.epochs) + 1, float(train_loss), float(val_mae), float(val_rmse))
        self.epochs.append(rec)
        return rec

    def to_jsonl(self) -> str:
        lines = [json.dumps({"type": "epoch", **asdict(e)}) for e in self.epochs]
        summary = {
            "type": "summary",
            "version": REPORT_VERSION,
            "method": self.method,
            "seed": self.seed,
            "selected_epoch": self.selected_epoch,
            "test_mae": self.test_mae,
            "test_rmse": self.test_rmse,
            "config": self.config,
        }
        lines.append(json.dumps(summary, sort_keys=True))
        return "\n".join(lines) + "\n"

    def write(self, path) -> None:
        Path(path).write_text(self.to_jsonl())

    @classmethod
    def read(cls, path) -> "TrainReport":
        epochs, summary = [], None
        for line in Path(path).read_text().splitlines():
            if not line.strip():
                continue
            rec = json.loads(line)
            kind = rec.pop("type")
            if kind == "epoch":
                epochs.append(EpochRecord(**rec))
            elif kind == "summary":
                summary = rec
        if summary is None:
            raise ValueError(f"{path}: no summary record")
        return cls(
            method=summary["method"],
            seed=summary["seed"],
            config=summary.get("config", {}),
            epochs=epochs,
            selected_epoch=summary["selected_epoch"],
            test_mae=summary["test_mae"],
            test_rmse=summary["test_rmse"],
        )


def select_best(report_or_rmse) -> int:
    """1-based epoch with the lowest validation RMSE; the earliest wins ties."""
    if isinstance(report_or_rmse, TrainReport):
        values = [e.val_rmse for e in report_or_rmse.epochs]
    else:
        values = list(report_or_rmse)
    if not values:
        raise ValueError("no epochs recorded")
    return int(np.argmin(values)) + 1
