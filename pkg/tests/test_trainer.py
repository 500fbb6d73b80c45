"""Tests for the training loop."""

import numpy as np
import pytest
import structlog
from pydantic import ValidationError

from rimsa.autodiff import DTensor, Parameter, read_checkpoint
from rimsa.config import TrainConfig
from rimsa.controller import ControllerOutput, RimsaController
from rimsa.errors import ConfigError, EmptyDatasetError, ShapeError
from rimsa.nn import Module
from rimsa.training import generate_dataset, make_batches, train
from rimsa.training.trainer import steps_per_epoch
from tests.conftest import make_controller, make_system, slow_enabled

# Test logger
logger = structlog.get_logger(__name__)


class ConstantController(Module):
    """Ignores its input; outputs never change, so validation never improves after epoch 0."""

    def __init__(self, sys_cfg):
        super().__init__()
        self.sys_cfg = sys_cfg
        self.unused = Parameter(np.zeros(1))

    def forward(self, y, p_max=None):
        batch = np.asarray(y).shape[0]
        n_t, n_r, k = self.sys_cfg.n_t, self.sys_cfg.n_r, self.sys_cfg.k_users
        w = np.zeros((batch, 2, n_r, k))
        w[:, 0, :k, :] = np.eye(k) * 0.1
        return ControllerOutput(
            phases=DTensor(np.zeros((batch, n_t))),
            w=DTensor(w),
            h_est=DTensor(np.zeros((batch, 2, n_t, k))),
        )


@pytest.fixture
def dataset(tiny_experiment):
    return generate_dataset(tiny_experiment.system, tiny_experiment.data.split_sizes(), seed=3)


@pytest.fixture
def model(tiny_experiment):
    return RimsaController(tiny_experiment.system, tiny_experiment.controller)


def test_make_batches_merges_trailing_single():
    """Test a trailing single-sample batch joins the batch before it."""
    assert [len(b) for b in make_batches(np.arange(9), 4)] == [4, 5]
    assert [len(b) for b in make_batches(np.arange(5), 4)] == [5]
    assert [len(b) for b in make_batches(np.arange(10), 4)] == [4, 4, 2]
    assert [len(b) for b in make_batches(np.arange(1), 4)] == [1]


@pytest.mark.parametrize("n", [5, 9, 13])
def test_make_batches_covers_every_index_once(n):
    """Test merged batches still hold each sample exactly once, in order."""
    order = np.random.default_rng(n).permutation(n)
    batches = make_batches(order, 4)
    np.testing.assert_array_equal(np.concatenate(batches), order)
    assert all(len(b) >= 2 for b in batches)


def test_train_on_five_samples(tiny_experiment):
    """Test a split whose last batch would hold one sample trains in one step per epoch."""
    ds = generate_dataset(tiny_experiment.system, (5, 2, 2), seed=4)
    model = RimsaController(tiny_experiment.system, tiny_experiment.controller)
    cfg = tiny_experiment.training.model_copy(update={"epochs": 2, "accum_steps": 1})
    report = train(model, ds, cfg, tiny_experiment.system)
    assert steps_per_epoch(5, cfg) == 1
    assert report.steps == 2


def test_single_sample_training_split_rejected(model, tiny_experiment):
    """Test a one-sample training split fails before the first step."""
    ds = generate_dataset(tiny_experiment.system, (1, 2, 2), seed=0)
    with pytest.raises(ConfigError, match="at least 2"):
        train(model, ds, tiny_experiment.training, tiny_experiment.system)


def test_batch_size_of_one_rejected(tiny_train_config):
    """Test the config refuses batches BatchNorm cannot normalize."""
    with pytest.raises(ValidationError, match="batch_size"):
        TrainConfig(**{**tiny_train_config.model_dump(), "batch_size": 1})


def test_steps_per_epoch(tiny_train_config):
    """Test steps per epoch."""
    cfg = tiny_train_config.model_copy(update={"batch_size": 4, "accum_steps": 2})
    assert steps_per_epoch(10, cfg) == 2
    assert steps_per_epoch(8, cfg) == 1


def test_one_epoch_writes_history_and_checkpoint(model, dataset, tiny_experiment, tmp_path):
    """Test one epoch writes history and checkpoint."""
    cfg = tiny_experiment.training.model_copy(update={"epochs": 1})
    path = tmp_path / "best.rmck"
    report = train(model, dataset, cfg, tiny_experiment.system, checkpoint_path=path)

    assert report.epochs_run == 1
    assert len(report.history) == 1
    assert report.best_epoch == 0
    assert report.steps == 2
    assert path.exists()
    assert {r.name for r in read_checkpoint(path)} == {p.name for p in model.checkpoint_tensors()}
    entry = report.history[0]
    assert np.isfinite(entry.train_total)
    assert entry.lambda_rate == 0.0
    assert entry.val_loss == -entry.val_rate


def test_maxmin_validation_loss(model, dataset, tiny_experiment):
    """Test maxmin validation loss."""
    cfg = tiny_experiment.training.model_copy(update={"epochs": 1, "utility": "maxmin"})
    entry = train(model, dataset, cfg, tiny_experiment.system).history[0]
    assert entry.val_loss == -entry.val_maxmin


def test_early_stop_after_patience(dataset, tiny_experiment):
    """Test early stop after patience."""
    cfg = tiny_experiment.training.model_copy(update={"epochs": 20, "early_stop_patience": 3})
    report = train(ConstantController(tiny_experiment.system), dataset, cfg, tiny_experiment.system)
    assert report.early_stopped
    assert report.epochs_run == 4
    assert report.best_epoch == 0


def test_max_steps_caps_the_run(model, dataset, tiny_experiment):
    """Test max steps caps the run."""
    cfg = tiny_experiment.training.model_copy(update={"epochs": 5, "max_steps": 3})
    report = train(model, dataset, cfg, tiny_experiment.system)
    assert report.steps == 3
    assert report.epochs_run == 2


def test_frozen_backbone_bytes_unchanged(model, dataset, tiny_experiment):
    """Test frozen backbone bytes unchanged."""
    frozen = {p.name: p.data.tobytes() for p in model.parameters() if p.frozen}
    assert frozen
    train(model, dataset, tiny_experiment.training, tiny_experiment.system)
    for p in model.parameters():
        if p.frozen:
            assert p.data.tobytes() == frozen[p.name], p.name


def test_training_is_reproducible(dataset, tiny_experiment):
    """Test training is reproducible."""
    histories = []
    for _ in range(2):
        model = RimsaController(tiny_experiment.system, tiny_experiment.controller)
        report = train(model, dataset, tiny_experiment.training, tiny_experiment.system)
        histories.append([(m.train_total, m.val_rate) for m in report.history])
    assert histories[0] == histories[1]


def test_best_state_is_restored(model, dataset, tiny_experiment, tmp_path):
    """Test best state is restored."""
    path = tmp_path / "best.rmck"
    train(model, dataset, tiny_experiment.training, tiny_experiment.system, checkpoint_path=path)
    stored = {r.name: r.data for r in read_checkpoint(path)}
    for p in model.checkpoint_tensors():
        assert p.data.tobytes() == stored[p.name].tobytes(), p.name


def test_incompatible_dataset(model, tiny_experiment):
    """Test incompatible dataset."""
    ds = generate_dataset(make_system(pilot_len=10), 4, seed=0)
    with pytest.raises(ShapeError):
        train(model, ds, tiny_experiment.training, tiny_experiment.system)


def test_empty_training_split(model, tiny_experiment):
    """Test empty training split."""
    ds = generate_dataset(tiny_experiment.system, (0, 2, 2), seed=0)
    with pytest.raises(EmptyDatasetError):
        train(model, ds, tiny_experiment.training, tiny_experiment.system)


def test_missing_validation_split_falls_back(model, tiny_experiment):
    """Test missing validation split falls back."""
    ds = generate_dataset(tiny_experiment.system, 8, seed=0)
    report = train(model, ds, tiny_experiment.training, tiny_experiment.system)
    assert report.epochs_run == tiny_experiment.training.epochs


def overfit(tiny_experiment, epochs: int):
    """Train on channel loss only; returns the first and last epoch train losses."""
    system = tiny_experiment.system
    ds = generate_dataset(system, (8, 2, 2), seed=11)
    cfg = tiny_experiment.training.model_copy(
        update={
            "epochs": epochs,
            "batch_size": 8,
            "lr_max": 5e-3,
            "lambda_rate_max": 0.0,
            "lambda_pre": 0.0,
            "eps": 1e-14,
            "early_stop_patience": 1000,
        }
    )
    model = RimsaController(system, make_controller(channel_scale=1e-3))
    report = train(model, ds, cfg, system)
    first, last = report.history[0].train_total, report.history[-1].train_total
    logger.info("overfit run", first=first, last=last, epochs=report.epochs_run)
    return first, last


def test_channel_loss_decreases(tiny_experiment):
    """Test channel loss decreases."""
    first, last = overfit(tiny_experiment, 60)
    assert last < first


@pytest.mark.slow
@pytest.mark.skipif(not slow_enabled(), reason="set RIMSA_RUN_SLOW=1")
def test_overfits_a_small_set(tiny_experiment):
    """Test overfits a small set."""
    first, last = overfit(tiny_experiment, 200)
    assert last < 0.5 * first
