"""Deterministic, order-independent random streams.

Every random draw in the package comes from a generator keyed by
``(seed, purpose tag, *indices)``, so streams for different sources, trials
or purposes never overlap and can be produced in any order.
"""

from __future__ import annotations

import zlib

import numpy as np


def tag_id(tag: str) -> int:
    return zlib.crc32(tag.encode("utf-8"))


def stream(seed: int, tag: str, *keys: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(tag_id(tag), *map(int, keys)))
    return np.random.Generator(np.random.PCG64(ss))


def derive_seed(seed: int, tag: str, *keys: int) -> int:
    """A 63-bit integer seed derived from ``(seed, tag, *keys)``."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(tag_id(tag), *map(int, keys)))
    lo, hi = ss.generate_state(2, dtype=np.uint32)
    return int((int(hi) << 32 | int(lo)) & ((1 << 63) - 1))
