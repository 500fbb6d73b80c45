"""
Pilot/channel datasets and their binary file format.

File layout (little-endian):
    b"RMDS" | u32 version | u32 N_R, N_t, K, L | u32 n_train, n_val, n_test | u64 seed
    pilot phases f8[N_t] | pilot matrix f8[2, K, L]
    per sample: Y f8[2, N_R, L] | H f8[2, N_t, K] | positions f8[K, 3]

Sample i is generated from independent named streams, so the stored Y can be
replayed from the stored H, the pilot configuration, and stream (seed, noise, i).
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union
import struct

import numpy as np
import structlog

from rimsa.channel.rician import generate_episode
from rimsa.config import SystemConfig
from rimsa.errors import EmptyDatasetError, FormatError, ShapeError
from rimsa.system.beamforming import PhaseConfig, build_v, random_phases
from rimsa.system.pilots import dft_pilots, receive_pilots
from rimsa.utils.rng import stream

logger = structlog.get_logger(__name__)

MAGIC = b"RMDS"
VERSION = 1
_HEADER = struct.Struct("<4sIIIIIIIIQ")
SPLITS = ("train", "val", "test")


@dataclass
class DatasetSplit:
    """Complex pilots y (N, N_R, L), channels h (N, N_t, K), positions (N, K, 3)."""

    y: np.ndarray
    h: np.ndarray
    positions: np.ndarray

    def __len__(self) -> int:
        return int(self.y.shape[0])

    def batch(self, indices: Sequence[int]) -> "DatasetSplit":
        idx = np.asarray(indices, dtype=np.int64)
        return DatasetSplit(self.y[idx], self.h[idx], self.positions[idx])


@dataclass
class DatasetFile:
    n_r: int
    n_t: int
    k_users: int
    pilot_len: int
    seed: int
    counts: Tuple[int, int, int]
    pilot_phases: np.ndarray
    pilots: np.ndarray
    y: np.ndarray
    h: np.ndarray
    positions: np.ndarray

    def __len__(self) -> int:
        return int(self.y.shape[0])

    def split(self, name: str) -> DatasetSplit:
        if name not in SPLITS:
            raise KeyError(f"unknown split '{name}', expected one of {SPLITS}")
        start = sum(self.counts[: SPLITS.index(name)])
        stop = start + self.counts[SPLITS.index(name)]
        return DatasetSplit(self.y[start:stop], self.h[start:stop], self.positions[start:stop])

    def summary(self) -> Dict[str, int]:
        return {
            "n_r": self.n_r,
            "n_t": self.n_t,
            "k_users": self.k_users,
            "pilot_len": self.pilot_len,
            "n_train": self.counts[0],
            "n_val": self.counts[1],
            "n_test": self.counts[2],
            "seed": self.seed,
        }

    def check_compatible(self, cfg: SystemConfig) -> None:
        expected = (cfg.n_r, cfg.n_t, cfg.k_users, cfg.pilot_len)
        found = (self.n_r, self.n_t, self.k_users, self.pilot_len)
        if expected != found:
            raise ShapeError(
                f"dataset dims (N_R, N_t, K, L)={found} do not match the configuration {expected}"
            )


def pilot_configuration(cfg: SystemConfig, seed: int) -> Tuple[PhaseConfig, np.ndarray]:
    """Phases used while receiving pilots, and the DFT pilot matrix."""
    return random_phases(cfg, stream(seed, "phases")), dft_pilots(cfg)


def _generate_episodes(
    cfg: SystemConfig,
    seed: int,
    episodes: Sequence[int],
    n_samples: int,
    pilot_phases: np.ndarray,
    pilots: np.ndarray,
) -> List[Tuple[int, np.ndarray, np.ndarray, np.ndarray]]:
    """Samples (index, y, h, positions) for the given episode indices."""
    v = build_v(PhaseConfig(pilot_phases), cfg)
    per_episode = cfg.n_blocks_per_episode
    rows = []
    for e in episodes:
        n_blocks = min(per_episode, n_samples - e * per_episode)
        nlos = [stream(seed, "nlos", e, b) for b in range(n_blocks)]
        episode = generate_episode(cfg, n_blocks, stream(seed, "users", e), nlos)
        for b, block in enumerate(episode.blocks):
            i = e * per_episode + b
            received = receive_pilots(v, block.h, pilots, cfg.noise_ul_mw, stream(seed, "noise", i))
            rows.append((i, received.y, block.h, episode.user_set.positions))
    return rows


def generate_dataset(
    cfg: SystemConfig,
    n_samples: Union[int, Tuple[int, int, int]],
    seed: int = 0,
    workers: int = 1,
) -> DatasetFile:
    """
    Generate (Y, H, positions) samples under a fixed pilot configuration.

    n_samples is either a total (all assigned to the training split) or
    (n_train, n_val, n_test).
    """
    counts = (n_samples, 0, 0) if isinstance(n_samples, int) else tuple(n_samples)
    total = int(sum(counts))
    if total < 1:
        raise EmptyDatasetError("generate_dataset needs at least one sample")

    phases, pilots = pilot_configuration(cfg, seed)
    n_episodes = -(-total // cfg.n_blocks_per_episode)
    logger.info(
        f"Generating {total} samples in {n_episodes} episodes",
        seed=seed,
        n_t=cfg.n_t,
        k_users=cfg.k_users,
        pilot_len=cfg.pilot_len,
    )

    if workers > 1 and n_episodes > 1:
        chunks = [list(range(n_episodes))[w::workers] for w in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_generate_episodes, cfg, seed, c, total, phases.alpha, pilots)
                for c in chunks
                if c
            ]
            rows = [r for f in futures for r in f.result()]
    else:
        rows = _generate_episodes(cfg, seed, range(n_episodes), total, phases.alpha, pilots)
    rows.sort(key=lambda r: r[0])

    return DatasetFile(
        n_r=cfg.n_r,
        n_t=cfg.n_t,
        k_users=cfg.k_users,
        pilot_len=cfg.pilot_len,
        seed=seed,
        counts=counts,
        pilot_phases=phases.alpha,
        pilots=pilots,
        y=np.stack([r[1] for r in rows]),
        h=np.stack([r[2] for r in rows]),
        positions=np.stack([r[3] for r in rows]),
    )


def replay_pilots(ds: DatasetFile, index: int, cfg: SystemConfig) -> np.ndarray:
    """Regenerate sample `index`'s Y from its stored H, the pilot setup and its noise stream."""
    ds.check_compatible(cfg)
    v = build_v(PhaseConfig(ds.pilot_phases), cfg)
    received = receive_pilots(
        v, ds.h[index], ds.pilots, cfg.noise_ul_mw, stream(ds.seed, "noise", index)
    )
    return received.y


def _complex(re: np.ndarray, im: np.ndarray) -> np.ndarray:
    z = np.empty(re.shape, dtype=np.complex128)
    z.real = re
    z.imag = im
    return z


def _reim(z: np.ndarray) -> bytes:
    return np.ascontiguousarray(np.stack([z.real, z.imag]), dtype="<f8").tobytes()


def save_dataset(path: Union[str, Path], ds: DatasetFile) -> None:
    with open(path, "wb") as fh:
        fh.write(
            _HEADER.pack(
                MAGIC, VERSION, ds.n_r, ds.n_t, ds.k_users, ds.pilot_len, *ds.counts, ds.seed
            )
        )
        fh.write(np.ascontiguousarray(ds.pilot_phases, dtype="<f8").tobytes())
        fh.write(_reim(ds.pilots))
        for i in range(len(ds)):
            fh.write(_reim(ds.y[i]))
            fh.write(_reim(ds.h[i]))
            fh.write(np.ascontiguousarray(ds.positions[i], dtype="<f8").tobytes())
    logger.info("dataset saved", path=str(path), samples=len(ds))


def load_dataset(path: Union[str, Path]) -> DatasetFile:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size or raw[:4] != MAGIC:
        raise FormatError(f"bad dataset: {path} does not start with {MAGIC!r}")
    _, version, n_r, n_t, k, ell, n_train, n_val, n_test, seed = _HEADER.unpack_from(raw)
    if version != VERSION:
        raise FormatError(f"bad dataset: unsupported version {version} (expected {VERSION})")

    total = n_train + n_val + n_test
    sample_len = 2 * n_r * ell + 2 * n_t * k + 3 * k
    preamble = n_t + 2 * k * ell
    expected = _HEADER.size + 8 * (preamble + total * sample_len)
    if len(raw) != expected:
        raise FormatError(
            f"bad dataset: {path} has {len(raw)} bytes, header implies {expected}"
        )

    values = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size).astype(np.float64)
    pilot_phases = values[:n_t].copy()
    pr = values[n_t:preamble].reshape(2, k, ell)
    body = values[preamble:].reshape(total, sample_len)

    y_end = 2 * n_r * ell
    h_end = y_end + 2 * n_t * k
    y = body[:, :y_end].reshape(total, 2, n_r, ell)
    h = body[:, y_end:h_end].reshape(total, 2, n_t, k)
    ds = DatasetFile(
        n_r=n_r,
        n_t=n_t,
        k_users=k,
        pilot_len=ell,
        seed=seed,
        counts=(n_train, n_val, n_test),
        pilot_phases=pilot_phases,
        pilots=_complex(pr[0], pr[1]),
        y=_complex(y[:, 0], y[:, 1]),
        h=_complex(h[:, 0], h[:, 1]),
        positions=body[:, h_end:].reshape(total, k, 3).copy(),
    )
    logger.info("dataset loaded", path=str(path), samples=total)
    return ds
