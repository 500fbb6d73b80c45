"""
Desk-scale acceptance checks.

The cheap ones always run; training-heavy ones are marked slow and need
RIMSA_RUN_SLOW=1.
"""

from pathlib import Path

import numpy as np
import pytest
import structlog

from rimsa.autodiff import grad_check
from rimsa.config import load_config
from rimsa.controller import RimsaController
from rimsa.experiments import point_config, with_overrides
from rimsa.precoding import equivalent_channel, zf_precoder
from rimsa.system import build_v, max_min_rate, per_user_rates, random_phases
from rimsa.training import (
    evaluate,
    generate_dataset,
    hybrid_loss,
    random_baseline,
    train,
    zf_reference,
)
from rimsa.utils.metrics import summarize
from rimsa.utils.rng import stream
from tests.conftest import make_controller, slow_enabled

# Test logger
logger = structlog.get_logger(__name__)

SCHEMA_DIR = Path(__file__).resolve().parent.parent / "schemas"

slow = pytest.mark.slow
needs_slow = pytest.mark.skipif(not slow_enabled(), reason="set RIMSA_RUN_SLOW=1")


@pytest.fixture
def desk():
    return load_config(SCHEMA_DIR / "desk_config.json")


def test_zf_reference_grows_with_power(desk):
    """Test zf reference grows with power."""
    split = generate_dataset(desk.system, 6, seed=8).split("train")
    rates = []
    for dbm in (-10.0, 0.0, 10.0, 20.0):
        cfg = point_config(desk, "power", dbm).system
        rates.append(zf_reference(cfg, split, seed=8).sum_rate)
    logger.info("zf reference power trend", rates=rates)
    assert all(a <= b + 1e-9 for a, b in zip(rates, rates[1:]))


def test_max_min_never_exceeds_mean_rate(desk):
    """Test max min never exceeds mean rate."""
    ds = generate_dataset(desk.system, 20, seed=9)
    cfg = desk.system
    for i in range(len(ds)):
        v = build_v(random_phases(cfg, stream(9, "baseline", i)), cfg)
        w = zf_precoder(equivalent_channel(ds.h[i], v), cfg.p_data_mw)
        rates = per_user_rates(ds.h[i], v, w, cfg.noise_dl_mw)
        assert max_min_rate(ds.h[i], v, w, cfg.noise_dl_mw) <= rates.mean() + 1e-12


def test_end_to_end_gradient_at_desk_scale(desk):
    """Test end to end gradient at desk scale."""
    system = desk.system.model_copy(update={"pilot_len": 16})
    ctrl = make_controller(
        n_p=32, n_layers=2, heads=4, max_seq=16, st_heads=4, phase_hidden=64, channel_hidden=64
    )
    model = RimsaController(system, ctrl)
    ds = generate_dataset(system, 2, seed=1)
    param = model.preprocessor.conv.weight

    def loss(_):
        out = model(ds.y)
        return hybrid_loss(out, ds.h, system, lambda_rate=1.0, lambda_pre=0.0).total

    err = grad_check(loss, param, coords=8, rng=np.random.default_rng(0))
    logger.info("desk end-to-end gradient check", relative_error=err)
    assert err < 1e-3


@slow
@needs_slow
def test_freeze_protocol_over_200_steps(tiny_experiment):
    """Test freeze protocol over 200 steps."""
    model = RimsaController(tiny_experiment.system, tiny_experiment.controller)
    frozen = {p.name: p.data.tobytes() for p in model.parameters() if p.frozen}
    ds = generate_dataset(tiny_experiment.system, (8, 2, 2), seed=2)
    cfg = tiny_experiment.training.model_copy(
        update={"epochs": 1000, "max_steps": 200, "early_stop_patience": 1000}
    )
    report = train(model, ds, cfg, tiny_experiment.system)
    assert report.steps == 200
    for p in model.parameters():
        if p.frozen:
            assert p.data.tobytes() == frozen[p.name], p.name


def _train_desk(exp, seed: int, counts=(512, 128, 128)):
    ds = generate_dataset(exp.system, counts, seed=seed)
    exp = with_overrides(exp, f"seed {seed}", controller={"seed": seed}, training={"seed": seed})
    model = RimsaController(exp.system, exp.controller)
    report = train(model, ds, exp.training, exp.system)
    return model, ds, report


@slow
@needs_slow
def test_learning_signal(desk):
    """Test learning signal."""
    model, ds, report = _train_desk(desk, seed=0)
    test = ds.split("test")
    learned = evaluate(model, test, desk.system)
    baseline = random_baseline(desk.system, test, seed=0)
    oracle = zf_reference(desk.system, test, seed=0)
    logger.info(
        "learning signal",
        model=learned.sum_rate,
        random=baseline.sum_rate,
        zf_oracle=oracle.sum_rate,
        epochs=report.epochs_run,
    )
    assert learned.sum_rate >= 1.2 * baseline.sum_rate
    assert learned.sum_rate <= oracle.sum_rate


@slow
@needs_slow
def test_longer_pilots_do_not_hurt(desk):
    """Test longer pilots do not hurt."""
    means = []
    for pilot_len in (15, 30, 45):
        exp = point_config(desk, "pilot", pilot_len)
        val_rates = []
        for seed in range(3):
            model, ds, _ = _train_desk(exp, seed)
            val_rates.append(evaluate(model, ds.split("val"), exp.system).sum_rate)
        means.append(summarize(val_rates))
    logger.info("pilot trend", stats=means)
    for shorter, longer in zip(means, means[1:]):
        assert longer["mean"] + longer["stderr"] >= shorter["mean"]


@slow
@needs_slow
def test_maxmin_training_favours_the_weakest_user(desk):
    """Test maxmin training favours the weakest user."""
    wins = 0
    for seed in range(3):
        results = {}
        for utility in ("sum", "maxmin"):
            exp = with_overrides(desk, utility, training={"utility": utility})
            model, ds, _ = _train_desk(exp, seed)
            results[utility] = evaluate(model, ds.split("test"), exp.system).max_min
        wins += results["maxmin"] > results["sum"]
        logger.info("fairness comparison", seed=seed, **results)
    if wins < 2:
        logger.warning(f"max-min training won only {wins} of 3 seeds")
