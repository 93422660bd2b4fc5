"""Hot GF(2) kernels on bit-packed uint64 words.

Two interchangeable backends: numba-jitted loops (default when numba is
importable) and vectorized numpy. Selection happens once at import time via
the ``SMOOTHLDC_BACKEND`` environment variable: ``numba``, ``numpy``, or
``auto`` (the default). ``benchmarks/bench_gf2.py`` compares both.

Packing convention: column j of a row lives in word j // 64 at bit
position 63 - (j % 64), i.e. MSB-first, matching the byte-level
serialization used everywhere else in the package.
"""

from __future__ import annotations

import os

import numpy as np

# MSB-first single-bit masks; MASKS[j] selects column j within a word.
MASKS = np.array([1 << (63 - j) for j in range(64)], dtype=np.uint64)


def _rank_words_impl(m):
    rows, words = m.shape
    if rows == 0 or words == 0:
        return 0
    rank = 0
    for w in range(words):
        for j in range(64):
            mask = MASKS[j]
            pivot = -1
            for r in range(rank, rows):
                if m[r, w] & mask:
                    pivot = r
                    break
            if pivot < 0:
                continue
            if pivot != rank:
                for c in range(w, words):
                    tmp = m[rank, c]
                    m[rank, c] = m[pivot, c]
                    m[pivot, c] = tmp
            for r in range(rank + 1, rows):
                if m[r, w] & mask:
                    for c in range(w, words):
                        m[r, c] ^= m[rank, c]
            rank += 1
            if rank == rows:
                return rank
    return rank


def _matvec_parity_impl(m, v):
    rows, words = m.shape
    out = np.zeros(rows, dtype=np.uint8)
    for r in range(rows):
        acc = np.uint64(0)
        for c in range(words):
            acc ^= m[r, c] & v[c]
        acc ^= acc >> np.uint64(32)
        acc ^= acc >> np.uint64(16)
        acc ^= acc >> np.uint64(8)
        acc ^= acc >> np.uint64(4)
        acc ^= acc >> np.uint64(2)
        acc ^= acc >> np.uint64(1)
        out[r] = np.uint8(acc & np.uint64(1))
    return out


def rank_words_numpy(m: np.ndarray) -> int:
    """GF(2) rank of packed rows; destroys its argument."""
    rows, words = m.shape
    if rows == 0 or words == 0:
        return 0
    rank = 0
    for w in range(words):
        for j in range(64):
            mask = MASKS[j]
            hits = np.nonzero(m[rank:, w] & mask)[0]
            if hits.size == 0:
                continue
            pivot = rank + int(hits[0])
            if pivot != rank:
                m[[rank, pivot]] = m[[pivot, rank]]
            below = rank + 1 + np.nonzero(m[rank + 1 :, w] & mask)[0]
            if below.size:
                m[below] ^= m[rank]
            rank += 1
            if rank == rows:
                return rank
    return rank


def matvec_parity_numpy(m: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Per-row parity of m & v: the GF(2) matrix-vector product."""
    if m.shape[0] == 0:
        return np.zeros(0, dtype=np.uint8)
    acc = np.bitwise_xor.reduce(m & v[np.newaxis, :], axis=1)
    for shift in (32, 16, 8, 4, 2, 1):
        acc ^= acc >> np.uint64(shift)
    return (acc & np.uint64(1)).astype(np.uint8)


def _load_numba():
    try:
        from numba import njit
    except ImportError:
        return None, None
    return (
        njit(cache=True)(_rank_words_impl),
        njit(cache=True)(_matvec_parity_impl),
    )


rank_words_numba, matvec_parity_numba = _load_numba()
HAVE_NUMBA = rank_words_numba is not None

_requested = os.environ.get("SMOOTHLDC_BACKEND", "auto").lower()
if _requested not in ("auto", "numba", "numpy"):
    raise RuntimeError(f"SMOOTHLDC_BACKEND must be auto, numba, or numpy, not {_requested!r}")
if _requested == "numba" and not HAVE_NUMBA:
    raise RuntimeError("SMOOTHLDC_BACKEND=numba but numba is not importable")

if _requested == "numpy" or not HAVE_NUMBA:
    BACKEND = "numpy"
    rank_words = rank_words_numpy
    matvec_parity = matvec_parity_numpy
else:
    BACKEND = "numba"
    rank_words = rank_words_numba
    matvec_parity = matvec_parity_numba
