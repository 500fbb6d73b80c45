"""Tests for AdamW and gradient clipping."""

import numpy as np
import pytest
import structlog

from rimsa.autodiff import Parameter
from rimsa.training import AdamW, AdamWState, adamw_step, clip_grad_norm, global_grad_norm

# Test logger
logger = structlog.get_logger(__name__)


def param(values, frozen=False, name="p"):
    return Parameter(np.asarray(values, dtype=np.float64), name=name, frozen=frozen)


def test_zero_gradient_without_decay_is_a_no_op():
    """Test zero gradient without decay is a no op."""
    p = param([1.0, -2.0, 3.0])
    p.grad = np.zeros(3)
    AdamW([p], weight_decay=0.0).step(1e-3)
    np.testing.assert_array_equal(p.data, [1.0, -2.0, 3.0])


def test_first_step_moves_by_lr():
    """Test first step moves by lr."""
    p = param([0.5, 0.5])
    p.grad = np.ones(2)
    AdamW([p], weight_decay=0.0, grad_clip=10.0).step(1e-2)
    np.testing.assert_allclose(p.data, [0.49, 0.49], rtol=1e-6)


def test_decay_is_decoupled():
    """Test decay is decoupled."""
    p = param([2.0])
    p.grad = np.zeros(1)
    AdamW([p], weight_decay=0.1).step(0.5)
    np.testing.assert_allclose(p.data, [2.0 - 0.5 * 0.1 * 2.0])


def test_clip_scales_to_max_norm():
    """Test clip scales to max norm."""
    p, q = param([6.0, 0.0]), param([0.0, 8.0])
    p.grad, q.grad = np.array([6.0, 0.0]), np.array([0.0, 8.0])
    norm = clip_grad_norm([p, q], 1.0)
    assert norm == pytest.approx(10.0)
    assert global_grad_norm([p, q]) == pytest.approx(1.0)
    np.testing.assert_allclose(p.grad, [0.6, 0.0])


def test_clip_leaves_small_gradients():
    """Test clip leaves small gradients."""
    p = param([1.0])
    p.grad = np.array([0.5])
    assert clip_grad_norm([p], 1.0) == pytest.approx(0.5)
    np.testing.assert_array_equal(p.grad, [0.5])


def test_step_reports_pre_clip_norm():
    """Test step reports pre clip norm."""
    p = param([0.0, 0.0])
    p.grad = np.array([3.0, 4.0])
    assert AdamW([p], grad_clip=1.0).step(1e-3) == pytest.approx(5.0)


def test_frozen_parameters_are_untouched():
    """Test frozen parameters are untouched."""
    frozen, live = param([1.0, 2.0], frozen=True, name="f"), param([1.0, 2.0], name="l")
    frozen.grad = np.ones(2)
    live.grad = np.ones(2)
    before = frozen.data.tobytes()
    opt = AdamW([frozen, live], weight_decay=0.5)
    for _ in range(5):
        opt.step(1e-2)
    assert frozen.data.tobytes() == before
    assert np.all(live.data < [1.0, 2.0])


def test_zero_grad_clears():
    """Test zero grad clears."""
    p = param([1.0])
    p.grad = np.ones(1)
    AdamW([p]).zero_grad()
    assert not p.has_grad()


def test_functional_step_matches_optimizer():
    """Test functional step matches optimizer."""
    a, b = param([0.3, -0.7]), param([0.3, -0.7])
    opt = AdamW([a], weight_decay=1e-2)
    state = AdamWState()
    for g in ([0.1, 0.2], [-0.3, 0.4], [0.5, -0.6]):
        a.grad = np.array(g)
        opt.step(1e-2)
        adamw_step([b], [np.array(g)], state, 1e-2, weight_decay=1e-2)
    np.testing.assert_array_equal(a.data, b.data)
    assert state.step == 3
