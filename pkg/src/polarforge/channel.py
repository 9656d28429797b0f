"""Canonical BMS channel representation and the three channel functionals.

A binary memoryless symmetric channel is stored as a list of conjugate
output-symbol pairs.  Each pair keeps the two probabilities seen under
input 0: ``a = W(y|0)`` and ``b = W(y'|0)``, flipped so that ``a >= b``
(likelihood ratio at least one).  Pairs are sorted by ascending likelihood
ratio, which is the order every merge procedure relies on.
"""

from __future__ import annotations

import math
from typing import Iterable, NamedTuple

import numpy as np

MASS_TOL = 1e-12        # invariant tolerance on total probability mass
INPUT_MASS_TOL = 1e-9   # acceptance tolerance for raw (user supplied) pairs
LR_MERGE_RTOL = 1e-9    # relative tolerance under which two LRs count as equal
LR_INF_CAP = 1e100      # LRs beyond this count as infinite (b folded into a)


class ChannelError(ValueError):
    """Raised for inputs that cannot form a valid BMS channel."""


class InvariantViolation(RuntimeError):
    """Raised when a pipeline step breaks a guaranteed inequality."""


class SymbolPair(NamedTuple):
    a: float
    b: float


class ChannelFunctionals(NamedTuple):
    error_prob: float
    bhattacharyya: float
    capacity: float


def lr(pair) -> float:
    """Likelihood ratio a/b of a symbol pair; inf when b == 0."""
    a, b = float(pair[0]), float(pair[1])
    if a == 0.0 and b == 0.0:
        raise ChannelError("symbol pair with zero mass on both members")
    if b == 0.0:
        return math.inf
    return a / b


class BmsChannel:
    """Immutable canonical channel: LR-sorted conjugate pairs (a >= b)."""

    __slots__ = ("a", "b")

    def __init__(self, a, b):
        a = np.ascontiguousarray(a, dtype=np.float64)
        b = np.ascontiguousarray(b, dtype=np.float64)
        if a.ndim != 1 or a.shape != b.shape or a.size == 0:
            raise ChannelError("channel needs matching, non-empty pair arrays")
        if np.any(a < 0.0) or np.any(b < 0.0):
            raise ChannelError("negative probability mass")
        if np.any(b > a):
            raise ChannelError("pairs must be flipped so that a >= b")
        s = a + b
        if np.any(s == 0.0):
            raise ChannelError("symbol pair with zero mass on both members")
        total = float(np.sum(s))
        if abs(total - 1.0) > 1e-9:
            raise ChannelError(f"total mass {total!r} is not 1")
        lrs = _lr_array(a, b)
        fin = np.isfinite(lrs)
        vals = lrs[fin]
        if vals.size > 1 and np.any(np.diff(vals) < -1e-9 * vals[1:]):
            raise ChannelError("pairs are not sorted by ascending LR")
        if np.any(~fin[:-1] & fin[1:]):
            raise ChannelError("pairs are not sorted by ascending LR")
        a.setflags(write=False)
        b.setflags(write=False)
        self.a = a
        self.b = b

    @property
    def pair_count(self) -> int:
        return int(self.a.size)

    @property
    def symbol_count(self) -> int:
        return 2 * self.pair_count

    @property
    def pairs(self) -> list[SymbolPair]:
        return [SymbolPair(float(x), float(y)) for x, y in zip(self.a, self.b)]

    def lrs(self) -> np.ndarray:
        return _lr_array(self.a, self.b)

    def __repr__(self):
        return f"BmsChannel({self.pair_count} pairs, I={capacity(self):.6f})"


def _lr_array(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.full(a.shape, np.inf)
    np.divide(a, b, out=out, where=b > 0.0)
    return out


def canonicalize(raw_pairs, merge_equal_lr: bool = True) -> BmsChannel:
    """Normal form: flip to a >= b, sort by LR, optionally merge equal LRs.

    Merging adjacent pairs whose LRs agree to within ``LR_MERGE_RTOL`` is a
    lossless operation (the merged channel is both degraded and upgraded
    with respect to the input), so every pipeline stage enables it.
    """
    arr = np.asarray(raw_pairs, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] == 0:
        raise ChannelError("expected a non-empty list of (a, b) pairs")
    if np.any(arr < 0.0):
        raise ChannelError("negative probability mass")
    mass = arr.sum(axis=1)
    if np.any(mass == 0.0):
        raise ChannelError("symbol pair with zero mass on both members")
    total = float(mass.sum())
    if abs(total - 1.0) > INPUT_MASS_TOL:
        raise ChannelError(f"total mass {total!r} outside tolerance of 1")
    a = np.maximum(arr[:, 0], arr[:, 1])
    b = np.minimum(arr[:, 0], arr[:, 1])
    # beyond LR_INF_CAP the conjugate mass is numerically meaningless
    # (products of such b values underflow); fold it into the a side,
    # which preserves mass exactly and moves every functional by less
    # than ~1e-100
    ext = b < a * (1.0 / LR_INF_CAP)
    if np.any(ext):
        a = np.where(ext, a + b, a)
        b = np.where(ext, 0.0, b)
    lrs = _lr_array(a, b)
    order = np.argsort(lrs, kind="stable")
    a, b, lrs = a[order], b[order], lrs[order]
    if merge_equal_lr and a.size > 1:
        starts = _equal_lr_group_starts(lrs)
        a = np.add.reduceat(a, starts)
        b = np.add.reduceat(b, starts)
    total = float(np.sum(a) + np.sum(b))
    if total != 1.0:
        a = a / total
        b = b / total
    return BmsChannel(a, b)


def _equal_lr_group_starts(lrs: np.ndarray) -> np.ndarray:
    """Start indices of runs of (relatively) equal LRs in a sorted array."""
    fin = np.isfinite(lrs)
    new = np.empty(lrs.size, dtype=bool)
    new[0] = True
    with np.errstate(invalid="ignore"):
        d = np.diff(lrs)
        new[1:] = d > LR_MERGE_RTOL * lrs[1:]
    # transition from finite to infinite starts a group; inf/inf diffs are
    # NaN and compare false, which keeps the infinite run together
    new[1:] |= fin[:-1] & ~fin[1:]
    return np.flatnonzero(new)


def capacity(ch: BmsChannel) -> float:
    """I(W) in bits per use, with 0*log(0) terms treated as zero."""
    return float(np.sum(_pair_capacities(ch.a, ch.b)))


def _pair_capacities(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    s = a + b
    out = np.zeros_like(a)
    nz = a > 0.0
    out[nz] = a[nz] * np.log2(2.0 * a[nz] / s[nz])
    nz = b > 0.0
    out[nz] += b[nz] * np.log2(2.0 * b[nz] / s[nz])
    return out


def bhattacharyya(ch: BmsChannel) -> float:
    """Z(W) = sum over symbols of sqrt(W(y|0) W(y|1))."""
    return float(np.sum(2.0 * np.sqrt(ch.a * ch.b)))


def error_prob(ch: BmsChannel) -> float:
    """ML error probability.

    Per pair this is b when a > b and (a+b)/2 at a tie, which coincide in
    canonical form (a tie has a == b), so the sum of the b column is exact
    and needs no tie band.
    """
    return float(np.sum(ch.b))


def functionals(ch: BmsChannel) -> ChannelFunctionals:
    return ChannelFunctionals(error_prob(ch), bhattacharyya(ch), capacity(ch))


def bsc(p: float) -> BmsChannel:
    """Binary symmetric channel with crossover probability p."""
    if not 0.0 <= p <= 1.0 or not math.isfinite(p):
        raise ChannelError(f"bsc parameter p={p!r} must be in [0, 1]")
    return canonicalize([(1.0 - p, p)])


def bec(e: float) -> BmsChannel:
    """Binary erasure channel with erasure probability e.

    The erasure output is self-conjugate, which the merge machinery does
    not allow, so it is split into a conjugate pair carrying e/2 each.
    All three functionals are preserved exactly by the split.
    """
    if not 0.0 <= e <= 1.0 or not math.isfinite(e):
        raise ChannelError(f"bec parameter e={e!r} must be in [0, 1]")
    pairs = []
    if e > 0.0:
        pairs.append((e / 2.0, e / 2.0))
    if e < 1.0:
        pairs.append((1.0 - e, 0.0))
    return canonicalize(pairs)


def channel_from_file(path: str) -> BmsChannel:
    """Read whitespace-separated 'a b' pairs, one per line."""
    pairs = []
    with open(path) as fh:
        for ln, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 2:
                raise ChannelError(f"{path}:{ln}: expected two values per line")
            try:
                pairs.append((float(parts[0]), float(parts[1])))
            except ValueError:
                raise ChannelError(f"{path}:{ln}: not a decimal pair") from None
    if not pairs:
        raise ChannelError(f"{path}: no pairs found")
    return canonicalize(pairs)


def channel_from_spec(spec: str) -> BmsChannel:
    """Parse 'bsc:<p>', 'bec:<e>' or 'file:<path>' channel descriptions."""
    kind, sep, arg = spec.partition(":")
    if not sep:
        raise ChannelError(f"channel spec {spec!r} needs a '<kind>:<arg>' form")
    if kind == "file":
        return channel_from_file(arg)
    if kind in ("bsc", "bec"):
        try:
            value = float(arg)
        except ValueError:
            raise ChannelError(f"channel spec {spec!r}: {arg!r} is not a number") from None
        return bsc(value) if kind == "bsc" else bec(value)
    raise ChannelError(f"unknown channel kind {kind!r} (use bsc, bec or file)")
