"""Tests for array geometry, path loss and Rician channel generation."""

import math

import numpy as np
import pytest
import structlog

from rimsa.channel import (
    angles_from_positions,
    element_indices,
    generate_episode,
    los_components,
    path_loss,
    rician_channel,
    sample_users,
    steering_vector,
)
from rimsa.channel.rician import UserSet
from rimsa.config import UserRegion
from rimsa.errors import DomainError, GeometryError
from rimsa.utils.rng import stream
from tests.conftest import make_system

# Test logger
logger = structlog.get_logger(__name__)


def test_angles_pure_y_offset():
    """Test angles pure y offset."""
    s1, s2, d = angles_from_positions((0.0, 7.0, 3.0), (0.0, 0.0, 3.0))
    assert (s1, s2, d) == (1.0, 0.0, 7.0)


def test_angles_pure_z_offset():
    """Test angles pure z offset."""
    s1, s2, d = angles_from_positions((2.0, 1.0, 8.0), (2.0, 1.0, 3.0))
    assert (s1, s2, d) == (0.0, 1.0, 5.0)


def test_angles_region_corner():
    """User (20, 20, 1.5) seen from (0, 0, 20)."""
    s1, s2, d = angles_from_positions((20.0, 20.0, 1.5), (0.0, 0.0, 20.0))
    expected_d = math.sqrt(20.0**2 + 20.0**2 + 18.5**2)
    assert d == pytest.approx(expected_d, rel=1e-15)
    assert s1 == pytest.approx(20.0 / expected_d, rel=1e-14)
    assert s2 == pytest.approx(-18.5 / expected_d, rel=1e-14)


def test_angles_zero_distance():
    """Test angles zero distance."""
    with pytest.raises(GeometryError):
        angles_from_positions((1.0, 2.0, 3.0), (1.0, 2.0, 3.0))


def test_element_indices_cover_square_raster(tiny_system):
    """Chain-major coordinates hit every (i_1, i_2) pair of the square aperture once."""
    i1, i2 = element_indices(tiny_system)
    side = 4
    pairs = set(zip(i1.tolist(), i2.tolist()))
    assert pairs == {(a, b) for a in range(side) for b in range(side)}
    # chain 0 owns the first N_E elements, a 2x2 patch in the corner
    assert set(zip(i1[:4].tolist(), i2[:4].tolist())) == {(0, 0), (1, 0), (0, 1), (1, 1)}


def test_single_chain_reduces_to_literal_indexing():
    """One chain: i_1 = n mod sqrt(N_t), i_2 = n div sqrt(N_t)."""
    cfg = make_system(n_ex=4, n_ey=4, n_rx=1, n_ry=1, k_users=1, pilot_len=2)
    i1, i2 = element_indices(cfg)
    n = np.arange(16)
    np.testing.assert_array_equal(i1, n % 4)
    np.testing.assert_array_equal(i2, n // 4)

    k = 2.0 * np.pi * cfg.d_r / cfg.wavelength
    literal = np.exp(1j * k * ((n % 4) * 0.3 + (n // 4) * -0.5))
    np.testing.assert_allclose(steering_vector(cfg, 0.3, -0.5), literal, atol=1e-12)


def test_non_square_aperture_rejected(desk_system):
    """Test non square aperture rejected."""
    cfg = desk_system.model_copy(update={"enforce_square_aperture": True})
    with pytest.raises(GeometryError, match="enforce_square_aperture"):
        element_indices(cfg)


def test_rectangular_aperture_allowed(desk_system):
    """Test rectangular aperture allowed."""
    i1, i2 = element_indices(desk_system)
    assert i1.max() == desk_system.aperture_x - 1
    assert i2.max() == desk_system.aperture_y - 1
    assert len(set(zip(i1.tolist(), i2.tolist()))) == desk_system.n_t


def test_steering_vector_broadside(tiny_system):
    """Test steering vector broadside."""
    a = steering_vector(tiny_system, 0.0, 0.0)
    np.testing.assert_allclose(a, np.ones(tiny_system.n_t))


def test_steering_vector_first_element_and_half_wavelength(tiny_system):
    """Test steering vector first element and half wavelength."""
    a = steering_vector(tiny_system, 1.0, 0.0)
    assert a[0] == 1 + 0j
    assert a[1] == pytest.approx(-1.0 + 0j, abs=1e-12)
    np.testing.assert_allclose(np.abs(a), 1.0, atol=1e-12)


def test_steering_vector_domain(tiny_system):
    """Test steering vector domain."""
    with pytest.raises(DomainError):
        steering_vector(tiny_system, 1.5, 0.0)


def test_path_loss_values():
    """Test path loss values."""
    assert path_loss(1.0, make_system(pathloss_ref=1.0, pathloss_exp=2.0)) == 1.0
    cfg = make_system(pathloss_ref=1e-4, pathloss_exp=2.2)
    assert path_loss(10.0, cfg) == pytest.approx(1e-4 * 10 ** (-2.2), rel=1e-14)
    assert path_loss(1.0, cfg) == pytest.approx(1e-4)
    with pytest.raises(DomainError):
        path_loss(0.0, cfg)


def test_sample_users_within_region(tiny_system):
    """Test sample users within region."""
    for index in range(50):
        users = sample_users(tiny_system, stream(1, "users", index))
        pos = users.positions
        assert len(users) == tiny_system.k_users
        assert np.all((pos[:, 0] >= 20) & (pos[:, 0] <= 30))
        assert np.all((pos[:, 1] >= 20) & (pos[:, 1] <= 30))
        assert np.all(pos[:, 2] == 1.5)


def test_sample_users_degenerate_region():
    """Test sample users degenerate region."""
    region = UserRegion(x_min=5.0, x_max=5.0, y_min=-2.0, y_max=-2.0, z=1.0)
    users = sample_users(make_system(user_region=region), stream(0, "users", 0))
    np.testing.assert_array_equal(users.positions, [[5.0, -2.0, 1.0]] * 2)


def test_sample_users_deterministic(tiny_system):
    """Test sample users deterministic."""
    a = sample_users(tiny_system, stream(9, "users", 3))
    b = sample_users(tiny_system, stream(9, "users", 3))
    np.testing.assert_array_equal(a.positions, b.positions)


def test_los_unit_modulus(tiny_system):
    """Test los unit modulus."""
    users = sample_users(tiny_system, stream(0, "users", 0))
    h_los, distances = los_components(tiny_system, users)
    assert h_los.shape == (tiny_system.n_t, tiny_system.k_users)
    assert np.max(np.abs(np.abs(h_los) - 1.0)) < 1e-12
    assert np.all(distances > 0)


def test_rician_reconstruction(tiny_system):
    """Each column is sqrt(L_k)(sqrt(K/(K+1)) h_los + sqrt(1/(K+1)) h_nlos)."""
    users = sample_users(tiny_system, stream(0, "users", 0))
    ch = rician_channel(tiny_system, users, stream(0, "nlos", 0))
    kf = tiny_system.rician_k
    gains = np.sqrt([path_loss(d, tiny_system) for d in ch.distances])
    rebuilt = gains * (np.sqrt(kf / (kf + 1)) * ch.h_los + np.sqrt(1 / (kf + 1)) * ch.h_nlos)
    np.testing.assert_allclose(ch.h, rebuilt, rtol=1e-13)


def test_rician_los_limit(tiny_system):
    """Test rician los limit."""
    cfg = tiny_system.model_copy(update={"rician_k": 1e12})
    users = sample_users(cfg, stream(0, "users", 0))
    ch = rician_channel(cfg, users, stream(0, "nlos", 0))
    gains = np.sqrt([path_loss(d, cfg) for d in ch.distances])
    np.testing.assert_allclose(ch.h, gains * ch.h_los, rtol=1e-5)


def test_rician_nlos_statistics(tiny_system):
    """K=0: h / sqrt(L_k) is CN(0, 1)."""
    cfg = tiny_system.model_copy(update={"rician_k": 0.0})
    users = UserSet(positions=np.array([[25.0, 25.0, 1.5], [22.0, 28.0, 1.5]]))
    los = los_components(cfg, users)
    gains = np.sqrt([path_loss(d, cfg) for d in los[1]])
    rng = stream(5, "nlos", 0)
    draws = np.stack(
        [rician_channel(cfg, users, rng, los=los).h / gains for _ in range(3000)]
    ).reshape(-1)
    n = draws.size
    assert abs(np.mean(draws)) < 3 / math.sqrt(n)
    assert np.mean(np.abs(draws) ** 2) == pytest.approx(1.0, rel=0.02)


def test_rician_deterministic(tiny_system):
    """Test rician deterministic."""
    users = sample_users(tiny_system, stream(0, "users", 0))
    a = rician_channel(tiny_system, users, stream(2, "nlos", 1))
    b = rician_channel(tiny_system, users, stream(2, "nlos", 1))
    np.testing.assert_array_equal(a.h, b.h)


def test_episode_single_block(tiny_system):
    """Test episode single block."""
    episode = generate_episode(tiny_system, 1, stream(0, "users", 0))
    assert len(episode.blocks) == 1


def test_episode_shares_los(tiny_system):
    """Test episode shares los."""
    episode = generate_episode(tiny_system, 20, stream(0, "users", 0))
    first = episode.blocks[0]
    for block in episode.blocks[1:]:
        np.testing.assert_array_equal(block.h_los, first.h_los)
        assert not np.array_equal(block.h_nlos, first.h_nlos)


def test_episode_needs_blocks(tiny_system):
    """Test episode needs blocks."""
    with pytest.raises(ValueError):
        generate_episode(tiny_system, 0, stream(0, "users", 0))


def test_episode_blocks_use_their_own_streams(tiny_system):
    """Test placement and early blocks do not move when more blocks are drawn."""

    def episode(n_blocks):
        nlos = [stream(0, "nlos", 0, b) for b in range(n_blocks)]
        return generate_episode(tiny_system, n_blocks, stream(0, "users", 0), nlos)

    short, long = episode(1), episode(4)
    np.testing.assert_array_equal(short.user_set.positions, long.user_set.positions)
    np.testing.assert_array_equal(short.blocks[0].h, long.blocks[0].h)


def test_episode_needs_one_stream_per_block(tiny_system):
    """Test a mismatched NLoS stream count is rejected."""
    with pytest.raises(ValueError, match="NLoS"):
        generate_episode(tiny_system, 2, stream(0, "users", 0), [stream(0, "nlos", 0, 0)])
