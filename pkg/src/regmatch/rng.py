"""Counter-based, splittable randomness.

Every random quantity in the package is a pure function of a 64-bit key
tuple, e.g. ``(seed, round, node, neighbor)``.  Results therefore do not
depend on iteration order, on how work is split across processes, or on
how many other draws happened before.  The mixing function is the
SplitMix64 finalizer applied along the key chain.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
UINT64_MAX = np.uint64(MASK64)

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)

# stream tags keep unrelated consumers of one master seed independent
STREAM_NODE = 0x6E6F6465
STREAM_COLOR = 0x636F6C72
STREAM_SAMPLE = 0x73616D70
STREAM_GADGET = 0x67616467
STREAM_TRIAL = 0x7472696C
STREAM_ROUND = 0x726F756E


def _as_u64(x) -> np.ndarray:
    if isinstance(x, (int, np.integer)):
        return np.asarray(int(x) & MASK64, dtype=np.uint64)
    arr = np.asarray(x)
    if arr.dtype == np.uint64:
        return arr
    if arr.dtype.kind == "i":
        return arr.astype(np.int64).view(np.uint64)
    return arr.astype(np.uint64)


def _finalize(z: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        z = z + _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
        return z ^ (z >> np.uint64(31))


def mix(*keys) -> np.ndarray:
    """Hash a chain of integer keys (scalars or broadcastable arrays) to uint64."""
    h = _finalize(_as_u64(keys[0]))
    for k in keys[1:]:
        h = _finalize(h ^ _as_u64(k))
    return h


def mix_int(*keys) -> int:
    """Scalar version of :func:`mix` returning a Python int."""
    return int(mix(*keys))


def split_seed(master: int, index: int, stream: int = STREAM_TRIAL) -> int:
    """Derive the seed of trial ``index`` from a master seed."""
    return mix_int(master, stream, index)


def node_seed(seed: int, node) -> np.ndarray | int:
    """Local seed of a node (or array of nodes) under a global seed."""
    out = mix(seed, STREAM_NODE, node)
    return int(out) if np.ndim(out) == 0 else out


def bounded(h: np.ndarray, high: int) -> np.ndarray:
    """Map uint64 hashes to integers in ``{1, ..., high}``.

    Ranges wider than 64 bits are truncated to ``2**64 - 1`` values; the
    modulo bias for narrower ranges is at most ``high / 2**64``.
    """
    if high >= MASK64:
        return np.where(h == UINT64_MAX, h, h + np.uint64(1))
    return h % np.uint64(high) + np.uint64(1)


def unit_uniform(h: np.ndarray) -> np.ndarray:
    """Map uint64 hashes to floats in [0, 1) using the top 53 bits."""
    return (h >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))


def generator(*keys) -> np.random.Generator:
    """A numpy Generator whose state is a pure function of ``keys``."""
    return np.random.Generator(np.random.Philox(key=mix_int(*keys)))
