"""
Parameter sweeps: pilot length, downlink power, user count, decoder depth, epochs.

Each sweep point generates its own data, trains its own controller and scores
it against the random-phase baseline and the perfect-CSI ZF reference. Points
run in separate processes when workers > 1; a point's seed depends only on
(base_seed, axis value).
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Literal, Optional, Sequence, Union
import csv

import structlog

from rimsa.config import ExperimentConfig, parse_config
from rimsa.controller.model import RimsaController
from rimsa.training.dataset import generate_dataset
from rimsa.training.evaluation import EvalMetrics, evaluate, random_baseline, zf_reference
from rimsa.training.trainer import train
from rimsa.utils.metrics import fmt9
from rimsa.utils.rng import derive_seed

logger = structlog.get_logger(__name__)

Axis = Literal["pilot", "power", "users", "layers", "epochs"]
AXES = ("pilot", "power", "users", "layers", "epochs")
SWEEP_COLUMNS = ["axis_value", "method", "mean_rate", "mean_maxmin"]
PILOTS_PER_USER = 15


@dataclass(frozen=True)
class SweepRow:
    axis_value: float
    method: str
    mean_rate: float
    mean_maxmin: float

    def csv_row(self) -> List[str]:
        return [fmt9(self.axis_value), self.method, fmt9(self.mean_rate), fmt9(self.mean_maxmin)]


def with_overrides(exp: ExperimentConfig, source: str, **sections: Dict) -> ExperimentConfig:
    """Re-validate the config with some section fields replaced."""
    data = exp.model_dump(mode="json")
    for section, values in sections.items():
        data[section].update(values)
    return parse_config(data, source=source)


def point_config(exp: ExperimentConfig, axis: Axis, value: float) -> ExperimentConfig:
    source = f"sweep {axis}={value}"
    if axis == "pilot":
        return with_overrides(exp, source, system={"pilot_len": int(value)})
    if axis == "users":
        k = int(value)
        return with_overrides(exp, source, system={"k_users": k, "pilot_len": PILOTS_PER_USER * k})
    if axis == "layers":
        return with_overrides(exp, source, controller={"n_layers": int(value)})
    if axis == "epochs":
        return with_overrides(exp, source, training={"epochs": int(value)})
    if axis == "power":
        return with_overrides(exp, source, system={"p_data_dbm": float(value)})
    raise ValueError(f"unknown sweep axis '{axis}', expected one of {AXES}")


def _rows(value: float, results: Sequence[EvalMetrics]) -> List[SweepRow]:
    return [SweepRow(value, m.method, m.sum_rate, m.max_min) for m in results]


def _train_point(exp: ExperimentConfig, seed: int, n_train: Optional[int]):
    data = generate_dataset(exp.system, exp.data.split_sizes(n_train), seed=seed)
    exp = with_overrides(
        exp, f"seed {seed}", controller={"seed": seed}, training={"seed": seed}
    )
    model = RimsaController(exp.system, exp.controller)
    train(model, data, exp.training, exp.system)
    return model, data


def run_point(
    exp: ExperimentConfig, axis: Axis, value: float, base_seed: int, n_train: Optional[int] = None
) -> List[SweepRow]:
    """Generate, train and evaluate one sweep point."""
    cfg = point_config(exp, axis, value)
    seed = derive_seed(base_seed, value)
    logger.info(f"Sweep point {axis}={value}", seed=seed)
    model, data = _train_point(cfg, seed, n_train)
    test = data.split("test")
    return _rows(
        value,
        [
            evaluate(model, test, cfg.system),
            random_baseline(cfg.system, test, seed),
            zf_reference(cfg.system, test, seed),
        ],
    )


def run_power_sweep(
    exp: ExperimentConfig, values: Sequence[float], base_seed: int, n_train: Optional[int] = None
) -> List[SweepRow]:
    """One trained model, re-scored at every downlink power."""
    seed = derive_seed(base_seed)
    model, data = _train_point(exp, seed, n_train)
    test = data.split("test")
    rows: List[SweepRow] = []
    for value in values:
        cfg = point_config(exp, "power", value)
        rows += _rows(
            value,
            [
                evaluate(model, test, cfg.system),
                random_baseline(cfg.system, test, seed),
                zf_reference(cfg.system, test, seed),
            ],
        )
    return rows


def run_sweep(
    exp: ExperimentConfig,
    axis: Axis,
    values: Sequence[float],
    base_seed: int = 0,
    workers: int = 1,
    n_train: Optional[int] = None,
) -> List[SweepRow]:
    if not values:
        raise ValueError("sweep range is empty")
    if axis not in AXES:
        raise ValueError(f"unknown sweep axis '{axis}', expected one of {AXES}")
    logger.info(f"Starting {axis} sweep over {len(values)} points", workers=workers)

    if axis == "power":
        return run_power_sweep(exp, values, base_seed, n_train)
    # Validate every point up front so a bad value fails before any training.
    for value in values:
        point_config(exp, axis, value)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(run_point, exp, axis, v, base_seed, n_train) for v in values]
            return [row for f in futures for row in f.result()]
    return [row for v in values for row in run_point(exp, axis, v, base_seed, n_train)]


def write_sweep_csv(path: Union[str, Path], rows: Sequence[SweepRow]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SWEEP_COLUMNS)
        for row in rows:
            writer.writerow(row.csv_row())
