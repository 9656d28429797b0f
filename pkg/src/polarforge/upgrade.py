"""Upgrading merges: two- and three-symbol rules, M-symbol windows, and
the greedy alphabet reducer whose output is upgraded w.r.t. its input.

An M-symbol window keeps its two boundary pairs and eliminates the
interior, folding interior mass into the boundaries as (alpha, beta)
adjustments computed by an alternating degrade/upgrade schedule that ends
with the three-symbol upgrading rule.  Every merge carries an explicit
intermediate-channel witness certifying the upgraded relation; witnesses
are rebuilt and checked numerically from the merge records.
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
DEFAULT_EPSILON = 1e-3   # Tool-2 preprocessing threshold on adjacent LR ratios

OBJECTIVES = ("min-gain", "paper-literal")


@dataclass(frozen=True)
class UpgradeAdjustment:
    """Probability mass (alpha to the a side, beta to the b side) added to
    a surviving pair; alpha/beta equals the survivor's LR."""
    alpha: float
    beta: float


@dataclass(frozen=True)
class UpgradeMergeRecord:
    """A replayable window merge.

    window_pairs holds the (a, b) values at merge time.  For window_len 2
    the low pair is folded into the high one and adjustments has a single
    entry; otherwise adjustments is (low survivor, high survivor).
    """
    window_start: int
    window_len: int
    window_pairs: tuple
    adjustments: tuple
    interior_schedule: tuple

    @property
    def window_mass(self) -> float:
        return float(sum(a + b for a, b in self.window_pairs))


@dataclass(frozen=True)
class UpgradeWitnessReport:
    passed: bool
    max_residual: float
    max_row_error: float
    min_entry: float

    def __bool__(self):
        return self.passed


def schedule_for(window_len: int) -> tuple:
    """Interior degrade/upgrade alternation, ending in the 3-symbol upgrade."""
    if window_len == 2:
        return ("upgrade",)
    steps = []
    first = "degrade" if window_len % 2 == 0 else "upgrade"
    other = "upgrade" if first == "degrade" else "degrade"
    for k in range(window_len - 3):
        steps.append(first if k % 2 == 0 else other)
    steps.append("upgrade")
    return tuple(steps)


def _lr_le(a1, b1, a2, b2, strict=False):
    """Compare LRs by cross products; handles b == 0 as infinite LR."""
    lhs = a2 * b1
    rhs = a1 * b2
    return lhs > rhs if strict else lhs >= rhs


def _window_valid(wa, wb):
    M = len(wa)
    if not _lr_le(wa[0], wb[0], wa[1], wb[1], strict=M > 2):
        return False
    for t in range(1, M - 2):
        if not _lr_le(wa[t], wb[t], wa[t + 1], wb[t + 1]):
            return False
    if M > 2 and not _lr_le(wa[M - 2], wb[M - 2], wa[M - 1], wb[M - 1], strict=True):
        return False
    return True


def merge_upgrade_window(ch: BmsChannel, i: int, M: int):
    """Merge the M-pair window starting at i; returns (channel, record)."""
    k = ch.pair_count
    if M < 2:
        raise ChannelError(f"window length {M} must be at least 2")
    if not 0 <= i or i + M > k:
        raise ChannelError(f"window [{i}, {i + M}) exceeds {k} pairs")
    wa = [float(x) for x in ch.a[i:i + M]]
    wb = [float(x) for x in ch.b[i:i + M]]
    if not _window_valid(wa, wb):
        raise ChannelError("window LRs violate the merge preconditions")
    if M == 2:
        try:
            ah, bh = _kernels.tool2_adjust(wa[0], wb[0], wa[1], wb[1])
        except ValueError as exc:
            raise ChannelError(str(exc)) from None
        adjustments = (UpgradeAdjustment(ah, bh),)
        sa = [wa[1] + ah]
        sb = [wb[1] + bh]
    else:
        try:
            al, bl, ah, bh = _kernels.window_adjust(wa, wb)
        except ValueError as exc:
            raise ChannelError(str(exc)) from None
        adjustments = (UpgradeAdjustment(al, bl), UpgradeAdjustment(ah, bh))
        sa = [wa[0] + al, wa[M - 1] + ah]
        sb = [wb[0] + bl, wb[M - 1] + bh]
    a = np.concatenate([ch.a[:i], sa, ch.a[i + M:]])
    b = np.concatenate([ch.b[:i], sb, ch.b[i + M:]])
    rec = UpgradeMergeRecord(
        window_start=i,
        window_len=M,
        window_pairs=tuple(zip(wa, wb)),
        adjustments=adjustments,
        interior_schedule=schedule_for(M),
    )
    return BmsChannel(a, b), rec


def merge_upgrade_2(ch: BmsChannel, i: int) -> BmsChannel:
    """Tool-2 merge: pair i is folded into pair i+1 at the higher LR."""
    return merge_upgrade_window(ch, i, 2)[0]


def merge_upgrade_3(ch: BmsChannel, i: int) -> BmsChannel:
    """Tool-3 merge: the middle of three pairs is split onto its neighbours."""
    return merge_upgrade_window(ch, i, 3)[0]


def apply_upgrade_record(ch: BmsChannel, rec: UpgradeMergeRecord) -> BmsChannel:
    """Replay a recorded merge on the channel it was recorded against."""
    i, M = rec.window_start, rec.window_len
    if i < 0 or i + M > ch.pair_count:
        raise ChannelError("record window does not fit the channel")
    wa = ch.a[i:i + M]
    wb = ch.b[i:i + M]
    ra = np.array([p[0] for p in rec.window_pairs])
    rb = np.array([p[1] for p in rec.window_pairs])
    if not (np.array_equal(wa, ra) and np.array_equal(wb, rb)):
        raise ChannelError("record does not match the channel window")
    if M == 2:
        (hi,) = rec.adjustments
        sa = [wa[1] + hi.alpha]
        sb = [wb[1] + hi.beta]
    else:
        lo, hi = rec.adjustments
        sa = [wa[0] + lo.alpha, wa[M - 1] + hi.alpha]
        sb = [wb[0] + lo.beta, wb[M - 1] + hi.beta]
    a = np.concatenate([ch.a[:i], sa, ch.a[i + M:]])
    b = np.concatenate([ch.b[:i], sb, ch.b[i + M:]])
    return BmsChannel(a, b)


def _check_monotone_upgrade(before: BmsChannel, after: BmsChannel) -> None:
    if capacity(after) < capacity(before) - MONOTONE_SLACK:
        raise InvariantViolation("upgrading merge decreased capacity")
    if bhattacharyya(after) > bhattacharyya(before) + MONOTONE_SLACK:
        raise InvariantViolation("upgrading merge increased Z")
    if error_prob(after) > error_prob(before) + MONOTONE_SLACK:
        raise InvariantViolation("upgrading merge increased P_e")


def upgrading_merge(ch: BmsChannel, mu, M: int = 4, *,
                    epsilon: float = DEFAULT_EPSILON,
                    objective: str = "min-gain",
                    trace: bool = False):
    """Reduce to at most mu output symbols; the result is upgraded w.r.t. ch.

    Adjacent pairs whose LR ratio is below 1 + epsilon are folded first
    with the two-symbol rule; then M-pair windows are merged greedily,
    picking the window with the smallest capacity gain (or the largest,
    under objective='paper-literal').  Near the target the window shrinks
    so the budget is met exactly.  Returns the channel, or
    (channel, records) when trace is set.
    """
    if objective not in OBJECTIVES:
        raise ChannelError(f"objective {objective!r} not one of {OBJECTIVES}")
    if M != math.inf and (int(M) != M or M < 3):
        raise ChannelError(f"merge order M={M} must be an integer >= 3")
    if mu != math.inf:
        mu = int(mu)
        if mu < 2:
            raise ChannelError(f"mu={mu} must be at least 2 symbols")
        target = mu // 2
    else:
        target = ch.pair_count
    if ch.pair_count <= target:
        return (ch, []) if trace else ch
    try:
        out_a, out_b, events = _kernels.upgrade_greedy(
            ch.a, ch.b, target, int(M), float(epsilon),
            objective == "paper-literal", trace)
    except ValueError as exc:
        raise InvariantViolation(str(exc)) from None
    out = BmsChannel(out_a, out_b)
    _check_monotone_upgrade(ch, out)
    if trace:
        records = [
            UpgradeMergeRecord(
                window_start=pos,
                window_len=Mw,
                window_pairs=tuple(zip(wa, wb)),
                adjustments=(
                    (UpgradeAdjustment(ah, bh),) if Mw == 2 else
                    (UpgradeAdjustment(al, bl), UpgradeAdjustment(ah, bh))
                ),
                interior_schedule=schedule_for(Mw),
            )
            for (Mw, pos, wa, wb, al, bl, ah, bh) in events
        ]
        return out, records
    return out


def fixed_window_excess(ch: BmsChannel, orders) -> dict:
    """Mean capacity excess of the M-symbol merge over I(ch), per order M.

    Every strictly LR-increasing run of max(orders) pairs serves as a base
    window; each order M acts on its M-pair suffix, the family along which
    larger windows are provably at least as faithful.  Means are therefore
    non-increasing in M.
    """
    orders = sorted(set(int(M) for M in orders))
    if orders and orders[0] < 3:
        raise ChannelError("merge orders must be at least 3")
    if not orders:
        raise ChannelError("no merge orders given")
    wmax = max(orders)
    k = ch.pair_count
    lrs = ch.lrs()
    starts = []
    for s in range(k - wmax + 1):
        seg = lrs[s:s + wmax]
        if np.all(np.diff(seg) > 0.0) or (
                np.all(np.isfinite(seg[:-1])) and np.isinf(seg[-1])
                and np.all(np.diff(seg[:-1]) > 0.0)):
            starts.append(s)
    if not starts:
        raise ChannelError(
            f"channel has no strictly increasing {wmax}-pair window")
    base = capacity(ch)
    out = {}
    for M in orders:
        tot = 0.0
        for s in starts:
            merged, _ = merge_upgrade_window(ch, s + wmax - M, M)
            tot += capacity(merged) - base
        out[M] = tot / len(starts)
    return out


def _symbol_matrix(ch: BmsChannel) -> np.ndarray:
    """2 x 2K transition matrix; symbol 2k is pair k's a side, 2k+1 its b."""
    m = np.empty((2, 2 * ch.pair_count))
    m[0, 0::2] = ch.a
    m[0, 1::2] = ch.b
    m[1, 0::2] = ch.b
    m[1, 1::2] = ch.a
    return m


def verify_upgrade_witness(W: BmsChannel, Qp: BmsChannel,
                           rec: UpgradeMergeRecord) -> UpgradeWitnessReport:
    """Build the intermediate channel P from the merge's closed forms and
    check that W(y|x) = sum_z Qp(z|x) P(y|z).

    Window symbols decompose onto the two surviving pairs: the split
    weights reduce to a_1/(a_1+alpha_1) and a_M/(a_M+alpha_M) at the
    boundaries.  When the interior schedule contains upgrading steps the
    low row is rescaled and its excess re-expressed on the high survivor
    and its conjugate, which keeps P row-stochastic and non-negative.
    """
    i, M = rec.window_start, rec.window_len
    survivors = 1 if M == 2 else 2
    if Qp.pair_count != W.pair_count - (M - survivors):
        raise ChannelError("record does not connect these two channels")
    if i < 0 or i + M > W.pair_count:
        raise ChannelError("record window does not fit the source channel")
    wa = np.asarray(W.a[i:i + M])
    wb = np.asarray(W.b[i:i + M])
    ra = np.array([p[0] for p in rec.window_pairs])
    rb = np.array([p[1] for p in rec.window_pairs])
    if not (np.array_equal(wa, ra) and np.array_equal(wb, rb)):
        raise ChannelError("record does not match the source channel window")

    nb = W.pair_count
    na = Qp.pair_count
    P = np.zeros((2 * na, 2 * nb))
    # untouched pairs map by identity
    for k in range(i):
        P[2 * k, 2 * k] = 1.0
        P[2 * k + 1, 2 * k + 1] = 1.0
    for k in range(i + M, nb):
        k2 = k - (M - survivors)
        P[2 * k2, 2 * k] = 1.0
        P[2 * k2 + 1, 2 * k + 1] = 1.0

    if M == 2:
        A = float(Qp.a[i])
        B = float(Qp.b[i])
        d2 = A * A - B * B
        for j in range(M):
            aj, bj = float(wa[j]), float(wb[j])
            if d2 > 0.0:
                u = (aj * A - bj * B) / d2
                v = (bj * A - aj * B) / d2
            else:
                u = aj / (A + B)
                v = bj / (A + B)
            col = 2 * (i + j)
            P[2 * i, col] += u
            P[2 * i, col + 1] += v
            P[2 * i + 1, col + 1] += u
            P[2 * i + 1, col] += v
    else:
        A = float(Qp.a[i])
        B = float(Qp.b[i])
        C = float(Qp.a[i + 1])
        D = float(Qp.b[i + 1])
        det = A * D - B * C
        dh = C * C - D * D
        if det >= 0.0 or dh <= 0.0:
            raise ChannelError("survivor pairs do not bracket the window")
        g = (A * C - B * D) / dh
        h = (B * C - A * D) / dh
        p = (wa * D - wb * C) / det
        q = (wb * A - wa * B) / det
        r1 = float(np.sum(p))
        kappa = 1.0 if r1 <= 1.0 else 1.0 / r1
        rest = (1.0 - kappa) * p
        s = kappa * p
        u = q + g * rest
        v = h * rest
        for j in range(M):
            col = 2 * (i + j)
            P[2 * i, col] += s[j]
            P[2 * i + 1, col + 1] += s[j]
            P[2 * (i + 1), col] += u[j]
            P[2 * (i + 1), col + 1] += v[j]
            P[2 * (i + 1) + 1, col + 1] += u[j]
            P[2 * (i + 1) + 1, col] += v[j]

    min_entry = float(P.min())
    row_err = float(np.max(np.abs(P.sum(axis=1) - 1.0)))
    residual = float(np.max(np.abs(_symbol_matrix(Qp) @ P - _symbol_matrix(W))))
    passed = min_entry >= -1e-12 and row_err <= 1e-10 and residual <= 1e-10
    return UpgradeWitnessReport(passed, residual, row_err, min_entry)
