"""Ground-truth engines: brute-force exact bit channels at tiny m, and the
closed-form BEC recursion.  These anchor correctness of the recursive
pipelines and are deliberately independent of them: the bit channel is
enumerated straight from its definition, one codeword at a time.
"""

from __future__ import annotations

import numpy as np

from .channel import (
    BmsChannel,
    ChannelError,
    _equal_lr_group_starts,
    _lr_array,
)
from .construct import generator_matrix

FAST_TENSOR_LIMIT = 3.2e7    # elements of the full (inputs x outputs) table
COST_LIMIT = 2.0e10          # multiply budget for the streaming fallback
REDUCE_CHUNK = 4_000_000     # accumulated pairs before an interim reduction


def bec_recursion(e: float, m: int, i: int) -> float:
    """Exact erasure probability of BEC bit channel i at stage m."""
    if not 0.0 <= e <= 1.0:
        raise ChannelError(f"erasure probability {e!r} must be in [0, 1]")
    z = float(e)
    for j in range(m):
        bit = (i >> (m - 1 - j)) & 1
        z = z * z if bit else 2.0 * z - z * z
    return z


def _reduce_pairs(a: np.ndarray, b: np.ndarray):
    """Flip to a >= b, sort by LR and merge equal-LR runs (no mass checks)."""
    hi = np.maximum(a, b)
    lo = np.minimum(a, b)
    keep = (hi + lo) > 0.0
    hi, lo = hi[keep], lo[keep]
    order = np.argsort(_lr_array(hi, lo), kind="stable")
    hi, lo = hi[order], lo[order]
    if hi.size > 1:
        starts = _equal_lr_group_starts(_lr_array(hi, lo))
        hi = np.add.reduceat(hi, starts)
        lo = np.add.reduceat(lo, starts)
    return hi, lo


class BitChannelOracle:
    """Enumerates W_i exactly for one base channel and stage count.

    Output symbols are tuples (y, u-prefix); for each completion v the
    codeword (prefix, u_i, v) B_m G^{x m} selects per-position transition
    rows whose outer product is accumulated.  The conditional distributions
    use prefactor 1 / 2^(n-1), the unique normalization under which each
    conditional sums to one.
    """

    def __init__(self, W: BmsChannel, m: int):
        if m < 0:
            raise ChannelError("stage count m must be non-negative")
        self.W = W
        self.m = m
        self.n = 1 << m
        k = W.pair_count
        self.nsym = 2 * k
        n_out = self.nsym ** self.n
        if 2.0 * (2.0 ** self.n) * n_out > COST_LIMIT:
            raise ChannelError(
                f"exact enumeration of {self.nsym}^{self.n} outputs is out of "
                "reach; reduce m or the alphabet")
        self.n_out = int(n_out)
        self.p0 = np.empty(self.nsym)
        self.p0[0::2] = W.a
        self.p0[1::2] = W.b
        self.p1 = np.empty(self.nsym)
        self.p1[0::2] = W.b
        self.p1[1::2] = W.a
        self.bg = generator_matrix(m)
        self._tensor_cache = None

    def _codewords(self, u: np.ndarray) -> np.ndarray:
        bits = (u[:, None] >> (self.n - 1 - np.arange(self.n))[None, :]) & 1
        return (bits.astype(np.uint64) @ self.bg.astype(np.uint64)) & 1

    def _chain(self, x: np.ndarray) -> np.ndarray:
        """W^n(y|codeword) for each codeword row in x, over all outputs y."""
        t = np.ones((x.shape[0], 1))
        for col in range(self.n):
            sel = x[:, col:col + 1]
            rows = np.where(sel == 0, self.p0[None, :], self.p1[None, :])
            t = (t[:, :, None] * rows[:, None, :]).reshape(x.shape[0], -1)
        return t

    def _tensor(self) -> np.ndarray:
        if self._tensor_cache is None:
            u = np.arange(1 << self.n, dtype=np.int64)
            self._tensor_cache = self._chain(self._codewords(u))
        return self._tensor_cache

    def _fast(self) -> bool:
        return (2.0 ** self.n) * self.n_out <= FAST_TENSOR_LIMIT

    def _conj_map(self, i: int) -> np.ndarray:
        """Conjugation permutation of outputs: flipping u_i offsets the
        codeword by row i of the generator, which flips the conjugate side
        at every position where that row is one."""
        row = self.bg[i]
        idx = np.arange(self.n_out, dtype=np.int64)
        conj = idx.copy()
        place = 1
        for t in range(self.n - 1, -1, -1):
            if row[t]:
                digit = (conj // place) % self.nsym
                conj += (1 - 2 * (digit & 1)) * place
            place *= self.nsym
        return conj

    def _prefix_tables(self, i: int):
        """Yield (table given u_i=0, table given u_i=1) per u-prefix."""
        scale = 1.0 / (2.0 ** (self.n - 1))
        if self._fast():
            t = self._tensor()
            view = t.reshape(1 << i, 2, -1, self.n_out)
            for pre in range(1 << i):
                yield view[pre, 0].sum(axis=0) * scale, view[pre, 1].sum(axis=0) * scale
            return
        nfree = self.n - 1 - i
        block = max(1, int(FAST_TENSOR_LIMIT // self.n_out))
        for pre in range(1 << i):
            acc = np.zeros((2, self.n_out))
            for ui in (0, 1):
                base = (pre << (self.n - i)) | (ui << nfree)
                for start in range(0, 1 << nfree, block):
                    v = np.arange(start, min(start + block, 1 << nfree),
                                  dtype=np.int64)
                    acc[ui] += self._chain(self._codewords(base + v)).sum(axis=0)
            yield acc[0] * scale, acc[1] * scale

    def conditional_sums(self, i: int):
        """Total mass of each conditional distribution; both should be 1."""
        s0 = s1 = 0.0
        for t0, t1 in self._prefix_tables(i):
            s0 += float(t0.sum())
            s1 += float(t1.sum())
        return s0, s1

    def bit_channel(self, i: int) -> BmsChannel:
        if not 0 <= i < self.n:
            raise ChannelError(f"index {i} out of range for m={self.m}")
        conj = self._conj_map(i)
        if np.any(conj == np.arange(self.n_out)):
            raise ChannelError("self-conjugate output; split the base channel")
        rep = np.flatnonzero(np.arange(self.n_out) < conj)
        partner = conj[rep]
        acc_a = np.empty(0)
        acc_b = np.empty(0)
        for t0, _ in self._prefix_tables(i):
            a, b = _reduce_pairs(t0[rep], t0[partner])
            acc_a = np.concatenate([acc_a, a])
            acc_b = np.concatenate([acc_b, b])
            if acc_a.size > REDUCE_CHUNK:
                acc_a, acc_b = _reduce_pairs(acc_a, acc_b)
        acc_a, acc_b = _reduce_pairs(acc_a, acc_b)
        total = float(acc_a.sum() + acc_b.sum())
        return BmsChannel(acc_a / total, acc_b / total)


def exact_bit_channel(W: BmsChannel, m: int, i: int) -> BmsChannel:
    """Brute-force bit channel i of W at stage count m."""
    return BitChannelOracle(W, m).bit_channel(i)
