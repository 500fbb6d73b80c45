"""Shared fixtures: tiny and desk-scale configurations."""

import numpy as np
import pytest
import structlog

from rimsa.config import (
    ControllerConfig,
    DataConfig,
    ExperimentConfig,
    SystemConfig,
    TrainConfig,
    UserRegion,
    get_settings,
)

# Test logger
logger = structlog.get_logger(__name__)

REGION = UserRegion(x_min=20.0, x_max=30.0, y_min=20.0, y_max=30.0, z=1.5)


def make_system(**overrides) -> SystemConfig:
    fields = dict(
        n_ex=2,
        n_ey=2,
        n_rx=2,
        n_ry=2,
        k_users=2,
        wavelength=0.01,
        bs_position=(0.0, 0.0, 20.0),
        user_region=REGION,
        pilot_len=8,
    )
    fields.update(overrides)
    return SystemConfig(**fields)


def make_controller(**overrides) -> ControllerConfig:
    fields = dict(
        n_p=16,
        n_layers=1,
        heads=2,
        max_seq=8,
        st_heads=2,
        phase_hidden=32,
        channel_hidden=32,
        se_reduction=4,
    )
    fields.update(overrides)
    return ControllerConfig(**fields)


@pytest.fixture
def tiny_system() -> SystemConfig:
    """N_t=16 (4x4 aperture), N_R=4, N_E=4, K=2, L=8."""
    return make_system()


@pytest.fixture
def desk_system() -> SystemConfig:
    """N_t=128 (4x4 elements per chain, 4x2 chains), N_R=8, K=2, L=30."""
    return make_system(n_ex=4, n_ey=4, n_rx=4, n_ry=2, pilot_len=30, enforce_square_aperture=False)


@pytest.fixture
def tiny_controller_config() -> ControllerConfig:
    return make_controller()


@pytest.fixture
def tiny_train_config() -> TrainConfig:
    return TrainConfig(
        epochs=2,
        batch_size=4,
        accum_steps=1,
        early_stop_patience=5,
        lr_max=1e-3,
        lr_min=1e-5,
    )


@pytest.fixture
def tiny_experiment(tiny_system, tiny_controller_config, tiny_train_config) -> ExperimentConfig:
    return ExperimentConfig(
        system=tiny_system,
        controller=tiny_controller_config,
        training=tiny_train_config,
        data=DataConfig(n_train=8, val_ratio=0.5, test_ratio=0.5, seed=3),
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture(autouse=True)
def _fresh_settings():
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


def random_complex(rng: np.random.Generator, *shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def slow_enabled() -> bool:
    return get_settings().run_slow
