"""Philox4x32-10 counter-based generator, vectorised over counters.

A code column is a pure function of ``(master_seed, column index)``; this
module maps such keys to reproducible uint32 streams without any sequential
state, so columns can be produced in any order or in parallel.  Only 32-bit
integer arithmetic is used, so streams are identical on every platform.
"""

from __future__ import annotations

import numpy as np

M0 = np.uint64(0xD2511F53)
M1 = np.uint64(0xCD9E8D57)
W0 = 0x9E3779B9
W1 = 0xBB67AE85
MASK32 = np.uint64(0xFFFFFFFF)
ROUNDS = 10


def philox4x32(counters, key) -> np.ndarray:
    """Apply Philox4x32-10 to an (N, 4) array of counters under a 2-word key.

    ``key`` is either a pair of ints or an (N, 2) array.
    """
    ctr = np.asarray(counters, dtype=np.uint64).reshape(-1, 4) & MASK32
    c0, c1, c2, c3 = (ctr[:, i].copy() for i in range(4))
    key = np.asarray(key, dtype=np.uint64)
    k0 = np.broadcast_to(key[..., 0], c0.shape).copy() & MASK32
    k1 = np.broadcast_to(key[..., 1], c0.shape).copy() & MASK32
    for r in range(ROUNDS):
        if r:
            k0 = (k0 + np.uint64(W0)) & MASK32
            k1 = (k1 + np.uint64(W1)) & MASK32
        p0 = c0 * M0
        p1 = c2 * M1
        c0, c1, c2, c3 = (
            (p1 >> np.uint64(32)) ^ c1 ^ k0,
            p1 & MASK32,
            (p0 >> np.uint64(32)) ^ c3 ^ k1,
            p0 & MASK32,
        )
    return np.stack([c0, c1, c2, c3], axis=1).astype(np.uint32)


def seed_key(seed: int) -> tuple[int, int]:
    seed = int(seed) & 0xFFFFFFFFFFFFFFFF
    return seed & 0xFFFFFFFF, seed >> 32


def words(seed: int, streams, lane: int, n_words: int, first_block: int = 0) -> np.ndarray:
    """``n_words`` uint32 words (rounded up to a multiple of 4) for each stream id.

    Counter layout: (stream lo, stream hi, lane, block).
    """
    streams = np.asarray(streams, dtype=np.uint64).reshape(-1)
    n_blocks = -(-n_words // 4)
    blocks = np.arange(first_block, first_block + n_blocks, dtype=np.uint64)
    ctr = np.empty((len(streams), n_blocks, 4), dtype=np.uint64)
    ctr[:, :, 0] = (streams & MASK32)[:, None]
    ctr[:, :, 1] = (streams >> np.uint64(32))[:, None]
    ctr[:, :, 2] = lane
    ctr[:, :, 3] = blocks[None, :]
    out = philox4x32(ctr.reshape(-1, 4), seed_key(seed))
    return out.reshape(len(streams), n_blocks * 4)


def uniform_below(seed: int, streams, lane: int, bound: int, count: int) -> np.ndarray:
    """``count`` unbiased draws from ``[0, bound)`` per stream, by rejection sampling.

    A word ``w`` is accepted when ``w < 2^32 - (2^32 mod bound)`` and mapped
    to ``w % bound``; accepted words are used in stream order.
    """
    if not 1 <= bound <= 1 << 32:
        raise ValueError("bound must be in [1, 2^32]")
    streams = np.asarray(streams, dtype=np.uint64).reshape(-1)
    limit = (1 << 32) - ((1 << 32) % bound)
    w = words(seed, streams, lane, count + 4).astype(np.uint64)
    ok = w < limit
    out = np.empty((len(streams), count), dtype=np.int64)
    full = ok[:, :count].all(axis=1)
    out[full] = (w[full, :count] % np.uint64(bound)).astype(np.int64)
    for s in np.flatnonzero(~full):
        # rare: keep pulling blocks until enough words were accepted
        vals = [int(x) % bound for x in w[s][ok[s]]]
        block = w.shape[1] // 4
        while len(vals) < count:
            more = words(seed, streams[s : s + 1], lane, 4, first_block=block)[0]
            vals.extend(int(x) % bound for x in more if x < limit)
            block += 1
        out[s] = vals[:count]
    return out


def uniform_bits(seed: int, streams, lane: int, bits: int, count: int) -> np.ndarray:
    """``count`` uniform integers in ``[0, 2^bits)`` per stream (``bits <= 32``)."""
    w = words(seed, streams, lane, count)[:, :count]
    return (w & np.uint32((1 << bits) - 1)).astype(np.int64)
