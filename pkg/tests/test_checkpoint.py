"""Tests for binary parameter checkpoints."""

import numpy as np
import pytest
import structlog

from rimsa.autodiff import Parameter, load_checkpoint, read_checkpoint, save_checkpoint
from rimsa.errors import FormatError, ShapeError
from rimsa.nn import BatchNorm1d, Linear, Module

# Test logger
logger = structlog.get_logger(__name__)


class TinyNet(Module):
    def __init__(self, seed: int):
        super().__init__()
        rng = np.random.default_rng(seed)
        self.fc = Linear(3, 4, rng, init_std=1.0)
        self.norm = BatchNorm1d(4)


@pytest.fixture
def saved(tmp_path):
    net = TinyNet(seed=1)
    net.norm.running_mean.data = np.array([0.1, -0.2, 0.3, 0.4])
    net.fc.bias.frozen = True
    path = tmp_path / "net.rmck"
    count = save_checkpoint(path, net.checkpoint_tensors())
    return net, path, count


def test_round_trip_is_bitwise(saved):
    """Test round trip is bitwise."""
    net, path, count = saved
    other = TinyNet(seed=2)
    load_checkpoint(path, other.checkpoint_tensors())

    assert count == len(net.checkpoint_tensors())
    for name, value in net.state_dict().items():
        assert other.state_dict()[name].tobytes() == value.tobytes(), name


def test_named_children_follow_registration_order():
    """Test named children follow registration order."""
    net = TinyNet(seed=1)
    assert [name for name, _ in net.named_children()] == ["fc", "norm"]


def test_frozen_flags_restored(saved):
    """Test frozen flags restored."""
    _, path, _ = saved
    other = TinyNet(seed=2)
    load_checkpoint(path, other.checkpoint_tensors())
    assert other.fc.bias.frozen
    assert not other.fc.weight.frozen


def test_records_carry_dotted_names(saved):
    """Test records carry dotted names."""
    _, path, _ = saved
    names = [r.name for r in read_checkpoint(path)]
    assert names[:2] == ["fc.weight", "fc.bias"]
    assert "norm.running_mean" in names


def test_bad_magic(tmp_path):
    """Test bad magic."""
    path = tmp_path / "junk.rmck"
    path.write_bytes(b"NOPE" + b"\x00" * 16)
    with pytest.raises(FormatError, match="bad checkpoint"):
        read_checkpoint(path)


def test_unsupported_version(saved):
    """Test unsupported version."""
    _, path, _ = saved
    raw = bytearray(path.read_bytes())
    raw[4] = 9
    path.write_bytes(bytes(raw))
    with pytest.raises(FormatError, match="version"):
        read_checkpoint(path)


def test_truncated_file(saved):
    """Test truncated file."""
    _, path, _ = saved
    path.write_bytes(path.read_bytes()[:-5])
    with pytest.raises(FormatError, match="truncated"):
        read_checkpoint(path)


def test_trailing_bytes(saved):
    """Test trailing bytes."""
    _, path, _ = saved
    path.write_bytes(path.read_bytes() + b"\x00")
    with pytest.raises(FormatError, match="trailing"):
        read_checkpoint(path)


def test_name_mismatch(saved):
    """Test name mismatch."""
    _, path, _ = saved
    with pytest.raises(ShapeError, match="does not match"):
        load_checkpoint(path, [Parameter(np.zeros(2), name="other")])


def test_shape_mismatch(tmp_path):
    """Test shape mismatch."""
    path = tmp_path / "p.rmck"
    save_checkpoint(path, [Parameter(np.zeros((2, 3)), name="w")])
    with pytest.raises(ShapeError, match="shape"):
        load_checkpoint(path, [Parameter(np.zeros((3, 2)), name="w")])


def test_state_dict_round_trip():
    """Test state dict round trip."""
    net, other = TinyNet(seed=1), TinyNet(seed=2)
    other.load_state_dict(net.state_dict())
    np.testing.assert_array_equal(other.fc.weight.data, net.fc.weight.data)
    with pytest.raises(ShapeError, match="missing"):
        other.load_state_dict({})
