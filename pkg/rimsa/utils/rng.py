"""
Named, independent random streams.

A stream is identified by (seed, name, *index); the same triple always yields
the same draws, independent of how many other streams were consumed before.
"""

from typing import Dict

import numpy as np

STREAMS: Dict[str, int] = {
    "users": 0,
    "nlos": 1,
    "noise": 2,
    "init": 3,
    "phases": 4,
    "baseline": 5,
    "sweep": 6,
    "shuffle": 7,
    "oracle": 8,
}


def stream(seed: int, name: str, *index: int) -> np.random.Generator:
    """Return a Philox generator for the named stream at the given index."""
    try:
        key = STREAMS[name]
    except KeyError:
        raise KeyError(f"unknown random stream '{name}'; known: {sorted(STREAMS)}") from None
    seq = np.random.SeedSequence(entropy=int(seed), spawn_key=(key, *(int(i) for i in index)))
    return np.random.Generator(np.random.Philox(seq))


def derive_seed(base_seed: int, *values: float) -> int:
    """Derive a child seed from the sweep stream at (possibly fractional) axis values."""
    index = [int(round(v * 1000)) & 0xFFFFFFFF for v in values]
    return int(stream(base_seed, "sweep", *index).integers(0, 2**63 - 1))
