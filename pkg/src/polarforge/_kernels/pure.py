"""Pure-Python reference implementation of the greedy merge kernels.

The compiled extension (``_core``) mirrors this module step for step; both
backends make identical merge decisions, so results agree to the last few
ulps and all recorded events line up.  Keep the two in sync.
"""

from __future__ import annotations

import heapq
import math

import numpy as np

NAME = "pure"

NEG_CLAMP = 1e-12   # adjustments above -NEG_CLAMP snap to zero, below abort


def pair_cap(a: float, b: float) -> float:
    """Capacity contribution of one conjugate pair, in bits."""
    s = a + b
    if s <= 0.0:
        return 0.0
    r = 0.0
    if a > 0.0:
        r += a * math.log2(2.0 * a / s)
    if b > 0.0:
        r += b * math.log2(2.0 * b / s)
    return r


def _clamp(x: float) -> float:
    if x < 0.0:
        if x < -NEG_CLAMP:
            raise ValueError(f"ordering violation: negative adjustment {x!r}")
        return 0.0
    return x


def tool2_adjust(a1, b1, a2, b2):
    """Two-symbol upgrading merge: the lower pair's mass lands on LR(y2).

    Written in cross-product form a2(a1+b1)/(a2+b2), which equals the
    lambda form and covers LR(y2) = inf (b2 == 0) without a special case.
    """
    s2 = a2 + b2
    alpha = a2 * (a1 + b1) / s2
    beta = b2 * (a1 + b1) / s2
    return alpha, beta


def window_adjust(wa, wb):
    """Boundary adjustments for an M-symbol upgrading window, M >= 3.

    Interior pairs fold left to right, alternating degrading and upgrading
    two-symbol steps (even M starts degrading, odd M upgrading), and the
    three remaining symbols are merged with the upgrading three-symbol
    rule.  Cross-product form throughout, so LR(y_M) = inf needs no
    special case.  Returns (alpha_lo, beta_lo, alpha_hi, beta_hi).
    """
    Mw = len(wa)
    ac = wa[1]
    bc = wb[1]
    odd = Mw % 2 == 1
    for t in range(2, Mw - 1):
        t_even = t % 2 == 0
        if (odd and t_even) or (not odd and not t_even):
            alpha, beta = tool2_adjust(ac, bc, wa[t], wb[t])
            ac = wa[t] + alpha
            bc = wb[t] + beta
        else:
            ac += wa[t]
            bc += wb[t]
    a1, b1 = wa[0], wb[0]
    aM, bM = wa[Mw - 1], wb[Mw - 1]
    denom = aM * b1 - a1 * bM
    if denom <= 0.0:
        raise ValueError("degenerate window: boundary LRs are not increasing")
    num_lo = aM * bc - ac * bM
    num_hi = ac * b1 - a1 * bc
    alpha_lo = _clamp(a1 * num_lo / denom)
    beta_lo = _clamp(b1 * num_lo / denom)
    alpha_hi = _clamp(aM * num_hi / denom)
    beta_hi = _clamp(bM * num_hi / denom)
    return alpha_lo, beta_lo, alpha_hi, beta_hi


def degrade_greedy(a_in, b_in, target: int, trace: bool):
    """Greedy adjacent-pair merging down to `target` pairs.

    Returns (groups, steps): groups[k] is the output pair index that
    absorbs input pair k; steps is a list of (live_index, pre_I, post_I)
    per merge when trace is set, else None.
    """
    K = len(a_in)
    va = [float(x) for x in a_in]
    vb = [float(x) for x in b_in]
    nxt = list(range(1, K)) + [-1]
    prv = [-1] + list(range(K - 1))
    alive = [True] * K
    changed = [0] * K
    steps = [] if trace else None
    heap: list = []
    seq = 0
    now = 0
    live = K
    cap_now = sum(pair_cap(va[k], vb[k]) for k in range(K)) if trace else 0.0

    def push(i):
        nonlocal seq
        j = nxt[i]
        if j < 0:
            return
        d = (pair_cap(va[i], vb[i]) + pair_cap(va[j], vb[j])
             - pair_cap(va[i] + va[j], vb[i] + vb[j]))
        heapq.heappush(heap, (d, i, seq, now))
        seq += 1

    for i in range(K - 1):
        push(i)
    while live > target:
        d, i, _, t = heapq.heappop(heap)
        if not alive[i] or changed[i] > t:
            continue
        j = nxt[i]
        if j < 0 or changed[j] > t:
            continue
        if trace:
            pos = sum(1 for k in range(i) if alive[k])
            steps.append((pos, cap_now, cap_now - d))
            cap_now -= d
        va[i] += va[j]
        vb[i] += vb[j]
        alive[j] = False
        nxt[i] = nxt[j]
        if nxt[j] >= 0:
            prv[nxt[j]] = i
        now += 1
        changed[i] = now
        live -= 1
        p = prv[i]
        if p >= 0:
            push(p)
        push(i)
    groups = np.empty(K, dtype=np.int64)
    g = -1
    for k in range(K):
        if alive[k]:
            g += 1
        groups[k] = g
    return groups, steps


def upgrade_greedy(a_in, b_in, target: int, M: int, eps: float,
                   literal: bool, trace: bool):
    """Tool-2 preprocessing plus greedy M-symbol window upgrading.

    Returns (out_a, out_b, events).  Each event is
    (Mw, live_index, window_a, window_b, alpha_lo, beta_lo, alpha_hi,
    beta_hi); Mw == 2 means a two-symbol merge whose low pair was folded
    into the high one (alpha_lo/beta_lo are zero).  live_index is -1
    unless trace is set.
    """
    K = len(a_in)
    va = [float(x) for x in a_in]
    vb = [float(x) for x in b_in]
    nxt = list(range(1, K)) + [-1]
    prv = [-1] + list(range(K - 1))
    alive = [True] * K
    changed = [0] * K
    events = [] if trace else None
    live = K
    head = 0
    now = 0

    def live_pos(node):
        return sum(1 for k in range(node) if alive[k])

    def apply_tool2(i, j):
        nonlocal live, head, now
        alpha, beta = tool2_adjust(va[i], vb[i], va[j], vb[j])
        if trace:
            events.append((2, live_pos(i), (va[i], va[j]), (vb[i], vb[j]),
                           0.0, 0.0, alpha, beta))
        va[j] += alpha
        vb[j] += beta
        alive[i] = False
        p = prv[i]
        if p >= 0:
            nxt[p] = j
        prv[j] = p
        if head == i:
            head = j
        now += 1
        changed[j] = now
        live -= 1

    # preprocessing: fold away adjacent pairs whose LR ratio is < 1 + eps.
    # Merges never change surviving LRs, so one left-to-right sweep is
    # enough: a ratio that passed cannot shrink later.
    i = head
    while live > target and i >= 0:
        j = nxt[i]
        if j < 0:
            break
        if vb[i] == 0.0:
            close = vb[j] == 0.0
        elif vb[j] == 0.0:
            close = False
        else:
            close = va[j] * vb[i] < (1.0 + eps) * va[i] * vb[j]
        if close:
            apply_tool2(i, j)
        i = j

    heap: list = []
    seq = 0
    cur_M = -1

    def window_nodes(s, Mw):
        nodes = [s]
        k = s
        for _ in range(Mw - 1):
            k = nxt[k]
            if k < 0:
                return None
            nodes.append(k)
        return nodes

    def push(s, Mw):
        nonlocal seq
        nodes = window_nodes(s, Mw)
        if nodes is None:
            return
        wa = [va[k] for k in nodes]
        wb = [vb[k] for k in nodes]
        al, bl, ah, bh = window_adjust(wa, wb)
        gain = (pair_cap(wa[0] + al, wb[0] + bl)
                + pair_cap(wa[-1] + ah, wb[-1] + bh)
                - sum(pair_cap(x, y) for x, y in zip(wa, wb)))
        key = -gain if literal else gain
        heapq.heappush(heap, (key, s, seq, now, al, bl, ah, bh))
        seq += 1

    while live > target:
        Mw = min(M, live, live - target + 2)
        if Mw < 3:
            # falls through only with two pairs left and target one
            apply_tool2(head, nxt[head])
            continue
        if Mw != cur_M:
            heap = []
            cur_M = Mw
            s = head
            while s >= 0:
                push(s, Mw)
                s = nxt[s]
        while True:
            key, s, _, t, al, bl, ah, bh = heapq.heappop(heap)
            if not alive[s] or changed[s] > t:
                continue
            nodes = window_nodes(s, Mw)
            if nodes is None:
                continue
            if any(changed[k] > t for k in nodes):
                continue
            break
        lo = nodes[0]
        hi = nodes[-1]
        if trace:
            events.append((Mw, live_pos(lo),
                           tuple(va[k] for k in nodes),
                           tuple(vb[k] for k in nodes),
                           al, bl, ah, bh))
        for k in nodes[1:-1]:
            alive[k] = False
        nxt[lo] = hi
        prv[hi] = lo
        va[lo] += al
        vb[lo] += bl
        va[hi] += ah
        vb[hi] += bh
        now += 1
        changed[lo] = now
        changed[hi] = now
        live -= Mw - 2
        if live <= target:
            break
        if min(M, live, live - target + 2) != Mw:
            continue
        # refresh candidates whose window can include a survivor
        s2 = lo
        cnt = 0
        while prv[s2] >= 0 and cnt < Mw - 1:
            s2 = prv[s2]
            cnt += 1
        while s2 != hi:
            push(s2, Mw)
            s2 = nxt[s2]
        push(hi, Mw)

    out_a = []
    out_b = []
    k = head
    while k >= 0:
        out_a.append(va[k])
        out_b.append(vb[k])
        k = nxt[k]
    return np.asarray(out_a), np.asarray(out_b), events
