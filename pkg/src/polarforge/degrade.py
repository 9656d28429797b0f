"""Pairwise degrading merge and the greedy alphabet reducer.

The two-symbol degrading merge replaces adjacent pairs by their
component-wise sum.  The reducer applies it repeatedly, always taking the
merge that keeps the mutual information of the result highest, until the
output alphabet fits the symbol budget mu (mu/2 pairs).  The whole
reduction is a deterministic map from input symbols to output symbols,
recorded as a group assignment so it can be replayed as a witness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .channel import (
    BmsChannel,
    ChannelError,
    InvariantViolation,
    bhattacharyya,
    capacity,
    error_prob,
)

MONOTONE_SLACK = 1e-12


@dataclass(frozen=True)
class DegradeMergeRecord:
    """One greedy step: adjacent pairs (index, index+1) were summed."""
    index: int
    pre_capacity: float
    post_capacity: float


@dataclass(frozen=True)
class WitnessReport:
    passed: bool
    max_residual: float

    def __bool__(self):
        return self.passed


def merge_degrade_pair(ch: BmsChannel, i: int) -> BmsChannel:
    """Replace pairs i and i+1 by their component-wise sum."""
    k = ch.pair_count
    if not 0 <= i < k - 1:
        raise ChannelError(f"merge index {i} out of range for {k} pairs")
    a = np.concatenate([ch.a[:i], [ch.a[i] + ch.a[i + 1]], ch.a[i + 2:]])
    b = np.concatenate([ch.b[:i], [ch.b[i] + ch.b[i + 1]], ch.b[i + 2:]])
    return BmsChannel(a, b)


def _check_monotone_degrade(before: BmsChannel, after: BmsChannel) -> None:
    if capacity(after) > capacity(before) + MONOTONE_SLACK:
        raise InvariantViolation("degrading merge increased capacity")
    if bhattacharyya(after) < bhattacharyya(before) - MONOTONE_SLACK:
        raise InvariantViolation("degrading merge decreased Z")
    if error_prob(after) < error_prob(before) - MONOTONE_SLACK:
        raise InvariantViolation("degrading merge decreased P_e")


def degrading_merge(ch: BmsChannel, mu, *, trace: bool = False):
    """Reduce to at most mu output symbols; the result is degraded w.r.t. ch.

    mu counts symbols (pair members), so mu/2 pairs survive; odd mu rounds
    down.  Returns the channel, or (channel, records, groups) when trace
    is set, where groups[k] is the output pair absorbing input pair k.
    """
    if mu != math.inf:
        mu = int(mu)
        if mu < 2:
            raise ChannelError(f"mu={mu} must be at least 2 symbols")
        target = mu // 2
    else:
        target = ch.pair_count
    if ch.pair_count <= target:
        if trace:
            return ch, [], np.arange(ch.pair_count, dtype=np.int64)
        return ch
    groups, steps = _kernels.degrade_greedy(ch.a, ch.b, target, trace)
    starts = np.flatnonzero(np.r_[True, groups[1:] != groups[:-1]])
    out = BmsChannel(np.add.reduceat(ch.a, starts), np.add.reduceat(ch.b, starts))
    _check_monotone_degrade(ch, out)
    if trace:
        records = [DegradeMergeRecord(*s) for s in steps]
        return out, records, groups
    return out


def verify_degrade_witness(W: BmsChannel, Q: BmsChannel,
                           groups: np.ndarray) -> WitnessReport:
    """Replay the deterministic merge map and compare against Q.

    The intermediate channel P(z|y) is the 0/1 matrix sending each symbol
    to its group, so Q(z|x) = sum_y W(y|x) P(z|y) is the per-group segment
    sum.  The reducer assembles its output the same way, so equality is
    exact, not approximate.
    """
    groups = np.asarray(groups)
    if groups.shape != (W.pair_count,):
        raise ChannelError("witness group map does not match the channel")
    if np.any(np.diff(groups) < 0) or np.any(np.diff(groups) > 1):
        raise ChannelError("witness group map must be consecutive")
    starts = np.flatnonzero(np.r_[True, groups[1:] != groups[:-1]])
    if starts.size != Q.pair_count:
        raise ChannelError("witness group count does not match Q")
    qa = np.add.reduceat(W.a, starts)
    qb = np.add.reduceat(W.b, starts)
    res = max(float(np.max(np.abs(qa - Q.a))), float(np.max(np.abs(qb - Q.b))))
    return WitnessReport(passed=res == 0.0, max_residual=res)
