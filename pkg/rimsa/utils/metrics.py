"""Training metrics tracking."""

from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Union
import csv
import math

import numpy as np
import orjson

CSV_COLUMNS = [
    "epoch",
    "lr",
    "lambda_rate",
    "train_total",
    "l_mse",
    "l_rate",
    "l_fro",
    "val_rate",
    "val_maxmin",
]


def fmt9(value: float) -> str:
    """Serialize a float with 9 significant digits."""
    return f"{value:.9g}"


def round9(value: float) -> float:
    return float(fmt9(value))


@dataclass
class EpochMetrics:
    """Metrics for a single training epoch."""

    epoch: int
    lr: float
    lambda_rate: float
    train_total: float
    l_mse: float
    l_rate: float
    l_fro: float
    val_rate: float
    val_maxmin: float
    val_loss: float = 0.0
    duration_ms: float = 0.0

    def csv_row(self) -> List[str]:
        values = asdict(self)
        return [str(self.epoch)] + [fmt9(values[c]) for c in CSV_COLUMNS[1:]]


@dataclass
class RunSummary:
    """Overall summary of a training run."""

    epochs_run: int = 0
    best_epoch: int = -1
    best_val_loss: float = float("inf")
    early_stopped: bool = False
    total_duration_ms: float = 0.0


class MetricsTracker:
    """Track per-epoch metrics across a training run."""

    def __init__(self, utility: str = "sum"):
        self.utility = utility
        self._summary = RunSummary()
        self._epochs: List[EpochMetrics] = []

    def record_epoch(self, metrics: EpochMetrics) -> bool:
        """Record an epoch; returns True when it improves the best validation loss."""
        self._epochs.append(metrics)
        self._summary.epochs_run += 1
        self._summary.total_duration_ms += metrics.duration_ms

        improved = metrics.val_loss < self._summary.best_val_loss
        if improved:
            self._summary.best_val_loss = metrics.val_loss
            self._summary.best_epoch = metrics.epoch
        return improved

    def mark_early_stop(self) -> None:
        self._summary.early_stopped = True

    @property
    def epochs(self) -> List[EpochMetrics]:
        return list(self._epochs)

    def get_summary(self) -> RunSummary:
        return self._summary

    def epochs_since_best(self) -> int:
        if self._summary.best_epoch < 0:
            return len(self._epochs)
        return self._epochs[-1].epoch - self._summary.best_epoch

    def to_dict(self) -> Dict[str, Any]:
        """Convert metrics to dictionary for serialization."""
        return {
            "utility": self.utility,
            "summary": asdict(self._summary),
            "epochs": [asdict(m) for m in self._epochs],
        }

    def to_json(self) -> bytes:
        """Convert metrics to JSON bytes."""
        return orjson.dumps(self.to_dict(), option=orjson.OPT_INDENT_2)

    def write_csv(self, path: Union[str, Path]) -> None:
        """Write one row per epoch. val_loss itself is not a column; it follows the utility."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            for m in self._epochs:
                writer.writerow(m.csv_row())


def summarize(values: List[float]) -> Dict[str, Optional[float]]:
    """Mean and standard error of a list of floats."""
    if not values:
        return {"mean": None, "stderr": None}
    arr = np.asarray(values, dtype=np.float64)
    mean = float(np.mean(arr))
    if arr.size == 1:
        return {"mean": mean, "stderr": 0.0}
    return {"mean": mean, "stderr": float(np.std(arr, ddof=1) / math.sqrt(arr.size))}
