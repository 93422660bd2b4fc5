"""Exact entropy oracle for linear codes over GF(2).

With i.i.d. uniform message bits, the entropy of any collection of linear
functions of the message equals its GF(2) rank, so every conditional
entropy used by the verification battery reduces to integer rank queries:

    H(X_A | W_J) = rank of the stacked generator rows of A with the columns
    of the symbols in J zeroed out.

All results are exact bit counts; no floating point is involved.
"""

from __future__ import annotations

import weakref
from typing import Iterable

import numpy as np

from ._kernels import rank_words
from .codespec import LinearCodeSpec
from .gf2 import column_mask


class RankOracle:
    """Caching rank-based entropy oracle bound to one code."""

    def __init__(self, code: LinearCodeSpec):
        self.code = code
        p = code.params
        self.width = p.K * p.Lw
        self._symbol_words = [gen.words() for gen in code.symbol_gens]
        self._masks: dict[frozenset[int], np.ndarray] = {}
        self._cache: dict[tuple, int] = {}

    def _mask_without(self, conditioned: frozenset[int]) -> np.ndarray:
        mask = self._masks.get(conditioned)
        if mask is None:
            keep = []
            for k in range(1, self.code.params.K + 1):
                if k not in conditioned:
                    keep.extend(self.code.message_columns(k))
            mask = column_mask(self.width, keep)
            self._masks[conditioned] = mask
        return mask

    def entropy(self, symbols: Iterable[int], given_messages: Iterable[int] = ()) -> int:
        """H(X_A | W_J) in bits."""
        a = tuple(sorted(set(symbols)))
        j = frozenset(given_messages)
        p = self.code.params
        if a and (a[0] < 0 or a[-1] >= p.M):
            raise IndexError(f"symbol index out of range [0, {p.M})")
        if any(not 1 <= k <= p.K for k in j):
            raise IndexError(f"source symbol index out of range [1, {p.K}]")
        key = (a, tuple(sorted(j)))
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        if not a:
            value = 0
        else:
            stacked = np.vstack([self._symbol_words[i] for i in a])
            stacked &= self._mask_without(j)[np.newaxis, :]
            value = int(rank_words(stacked))
        self._cache[key] = value
        return value

    def message_entropy_given(self, k: int, symbols: Iterable[int], given_messages: Iterable[int] = ()) -> int:
        """H(W_k | X_A, W_J) in bits."""
        j = frozenset(given_messages)
        if k in j:
            return 0
        lw = self.code.params.Lw
        return lw + self.entropy(symbols, j | {k}) - self.entropy(symbols, j)


_oracles: "weakref.WeakKeyDictionary[LinearCodeSpec, RankOracle]" = weakref.WeakKeyDictionary()


def oracle_for(code: LinearCodeSpec) -> RankOracle:
    oracle = _oracles.get(code)
    if oracle is None:
        oracle = RankOracle(code)
        _oracles[code] = oracle
    return oracle


def conditional_entropy(code: LinearCodeSpec, symbols: Iterable[int], given_messages: Iterable[int] = ()) -> int:
    """H(X_A | W_J) for symbol index set A and source symbol set J (1-based)."""
    return oracle_for(code).entropy(symbols, given_messages)


def _complement(code: LinearCodeSpec, kset: Iterable[int]) -> frozenset[int]:
    return frozenset(range(1, code.params.K + 1)) - frozenset(kset)


def same_information(code: LinearCodeSpec, i1: int, i2: int, kset: Iterable[int]) -> bool:
    """Whether symbols i1 and i2 carry the same information about W_kset:
    each determines the other once all sources outside kset are known."""
    ora = oracle_for(code)
    j = _complement(code, kset)
    h_pair = ora.entropy((i1, i2), j)
    return h_pair == ora.entropy((i1,), j) == ora.entropy((i2,), j)


def distinct_information(code: LinearCodeSpec, i1: int, i2: int, k: int) -> bool:
    """Whether conditioning i1 on i2 leaves its residual entropy about source
    symbol k unchanged."""
    ora = oracle_for(code)
    j = _complement(code, (k,))
    return ora.entropy((i1, i2), j) - ora.entropy((i2,), j) == ora.entropy((i1,), j)
