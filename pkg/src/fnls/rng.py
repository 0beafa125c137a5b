"""Counter-based Gaussian streams for reproducible parallel sampling.

The generator is Philox4x32-10.  A draw is addressed by
``(seed, sample index, attempt, block)``::

    counter = (block, attempt, index & 0xffffffff, index >> 32)
    key     = (seed & 0xffffffff, seed >> 32)

Each 128-bit output block becomes two 53-bit uniforms, then one complex
normal through Box-Muller, with variance 1/2 in each of the real and
imaginary parts.  Frequency ``n`` reads block ``2n`` (``n >= 0``) or
``2|n| - 1`` (``n < 0``), so a sample at truncation ``N`` projects exactly
onto the same-index sample at any smaller truncation.
"""
from __future__ import annotations

import numpy as np

from . import _kernels

PHILOX_M0 = np.uint64(0xD2511F53)
PHILOX_M1 = np.uint64(0xCD9E8D57)
PHILOX_W0 = np.uint32(0x9E3779B9)
PHILOX_W1 = np.uint32(0xBB67AE85)
ROUNDS = 10
_MASK32 = np.uint64(0xFFFFFFFF)
_SHIFT32 = np.uint64(32)


def philox4x32(counter, key) -> np.ndarray:
    """Philox4x32 with 10 rounds.

    ``counter`` has shape ``(..., 4)`` and ``key`` shape ``(..., 2)``
    (broadcastable); both are read as uint32.  Returns uint32 ``(..., 4)``.
    """
    ctr = np.asarray(counter, dtype=np.uint32)
    k = np.asarray(key, dtype=np.uint32)
    c0, c1, c2, c3 = (ctr[..., i].astype(np.uint64) for i in range(4))
    k0 = k[..., 0].copy()
    k1 = k[..., 1].copy()
    with np.errstate(over="ignore"):
        for r in range(ROUNDS):
            if r:
                k0 = k0 + PHILOX_W0
                k1 = k1 + PHILOX_W1
            p0 = PHILOX_M0 * c0
            p1 = PHILOX_M1 * c2
            hi0, lo0 = p0 >> _SHIFT32, p0 & _MASK32
            hi1, lo1 = p1 >> _SHIFT32, p1 & _MASK32
            c0 = hi1 ^ c1 ^ k0.astype(np.uint64)
            c1 = lo1
            c2 = hi0 ^ c3 ^ k1.astype(np.uint64)
            c3 = lo0
    return np.stack([c0, c1, c2, c3], axis=-1).astype(np.uint32)


def seed_key(seed: int) -> np.ndarray:
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    return np.array([seed & 0xFFFFFFFF, seed >> 32], dtype=np.uint32)


def child_seed(seed: int, tag: int) -> int:
    """Independent 64-bit seed for a named sub-experiment."""
    ss = np.random.SeedSequence([int(seed), int(tag)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def mode_blocks(n_max: int) -> np.ndarray:
    """Block index of each frequency ``-N..N``."""
    n = np.arange(-n_max, n_max + 1)
    return np.where(n >= 0, 2 * n, 2 * np.abs(n) - 1)


def _to_unit(words_hi, words_lo) -> np.ndarray:
    """Two uint32 words -> uniform double in [0, 1) with 53 random bits."""
    x = (words_hi.astype(np.uint64) << _SHIFT32) | words_lo.astype(np.uint64)
    return (x >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


def complex_normals_reference(seed: int, indices, attempts, blocks) -> np.ndarray:
    """Pure-numpy version of :func:`complex_normals` (slow; kept as oracle)."""
    idx = np.asarray(indices, dtype=np.uint64).reshape(-1)
    att = np.broadcast_to(np.asarray(attempts, dtype=np.uint64), idx.shape)
    blk = np.asarray(blocks, dtype=np.uint64).reshape(-1)
    ctr = np.empty((idx.size, blk.size, 4), dtype=np.uint32)
    ctr[..., 0] = blk[None, :].astype(np.uint32)
    ctr[..., 1] = att[:, None].astype(np.uint32)
    ctr[..., 2] = (idx & _MASK32).astype(np.uint32)[:, None]
    ctr[..., 3] = (idx >> _SHIFT32).astype(np.uint32)[:, None]
    words = philox4x32(ctr, seed_key(seed))
    u1 = _to_unit(words[..., 0], words[..., 1])
    u2 = _to_unit(words[..., 2], words[..., 3])
    radius = np.sqrt(-np.log1p(-u1))  # sqrt(-2 log(1-u)) / sqrt(2)
    theta = 2.0 * np.pi * u2
    return radius * (np.cos(theta) + 1j * np.sin(theta))


def complex_normals(seed: int, indices, attempts, blocks) -> np.ndarray:
    """Standard complex normals, shape ``(len(indices), len(blocks))``.

    ``attempts`` is a scalar or one entry per index.
    """
    key = seed_key(seed)
    idx = np.ascontiguousarray(np.asarray(indices, dtype=np.uint64).reshape(-1))
    att = np.ascontiguousarray(np.broadcast_to(np.asarray(attempts, dtype=np.uint64), idx.shape))
    blk = np.ascontiguousarray(np.asarray(blocks, dtype=np.uint64).reshape(-1))
    out = np.empty((idx.size, blk.size), dtype=np.complex128)
    _kernels.philox_normals(np.uint64(key[0]), np.uint64(key[1]), idx, att, blk, out)
    return out


class RandomStream:
    """Sample-level view of the counter-based generator.

    ``draw`` returns a fresh vector on every call by advancing ``attempt``;
    samplers that reject draws count them on ``n_rejected``.
    """

    def __init__(self, seed: int, index: int):
        seed_key(seed)
        if index < 0:
            raise ValueError("sample index must be >= 0")
        self.seed = int(seed)
        self.index = int(index)
        self.attempt = 0
        self.n_rejected = 0

    def draw(self, n_max: int) -> np.ndarray:
        z = complex_normals(self.seed, [self.index], self.attempt, mode_blocks(n_max))[0]
        self.attempt += 1
        return z
