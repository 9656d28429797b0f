# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled greedy merge kernels.

Mirrors ``pure.py`` decision for decision: the same heap keys, the same
tie-breaking (capacity delta, then leftmost node, then push order), the
same update formulas.  Any change here must land in pure.py too.
"""

from libc.math cimport log2
from libc.stdlib cimport free, malloc, realloc

import numpy as np

NAME = "compiled"

cdef double NEG_CLAMP = 1e-12


cdef inline double pair_cap(double a, double b) noexcept:
    cdef double s = a + b
    cdef double r = 0.0
    if s <= 0.0:
        return 0.0
    if a > 0.0:
        r += a * log2(2.0 * a / s)
    if b > 0.0:
        r += b * log2(2.0 * b / s)
    return r


# ---------------------------------------------------------------------------
# degrading reducer

cdef struct DEntry:
    double d
    long node
    long seq
    long t


cdef struct DHeap:
    DEntry* e
    Py_ssize_t size
    Py_ssize_t cap


cdef inline bint d_less(DEntry* a, DEntry* b) noexcept:
    if a.d != b.d:
        return a.d < b.d
    if a.node != b.node:
        return a.node < b.node
    return a.seq < b.seq


cdef int d_push(DHeap* h, DEntry ent) except -1:
    cdef Py_ssize_t i, p
    cdef DEntry tmp
    if h.size == h.cap:
        h.cap = h.cap * 2 if h.cap else 64
        h.e = <DEntry*> realloc(h.e, h.cap * sizeof(DEntry))
        if h.e == NULL:
            raise MemoryError()
    h.e[h.size] = ent
    i = h.size
    h.size += 1
    while i > 0:
        p = (i - 1) >> 1
        if d_less(&h.e[i], &h.e[p]):
            tmp = h.e[i]
            h.e[i] = h.e[p]
            h.e[p] = tmp
            i = p
        else:
            break
    return 0


cdef DEntry d_pop(DHeap* h) noexcept:
    cdef DEntry top = h.e[0]
    cdef Py_ssize_t i = 0, c
    cdef DEntry tmp
    h.size -= 1
    h.e[0] = h.e[h.size]
    while True:
        c = 2 * i + 1
        if c >= h.size:
            break
        if c + 1 < h.size and d_less(&h.e[c + 1], &h.e[c]):
            c += 1
        if d_less(&h.e[c], &h.e[i]):
            tmp = h.e[i]
            h.e[i] = h.e[c]
            h.e[c] = tmp
            i = c
        else:
            break
    return top


def degrade_greedy(a_arr, b_arr, Py_ssize_t target, bint trace):
    """Greedy adjacent-pair merging; see pure.degrade_greedy."""
    cdef const double[::1] a_in = np.ascontiguousarray(a_arr, dtype=np.float64)
    cdef const double[::1] b_in = np.ascontiguousarray(b_arr, dtype=np.float64)
    cdef Py_ssize_t K = a_in.shape[0]
    cdef Py_ssize_t k
    cdef long i, j, p
    cdef long now = 0, seq = 0, live = K
    cdef double d, cap_now = 0.0
    cdef DHeap heap
    cdef DEntry ent
    heap.e = NULL
    heap.size = 0
    heap.cap = 0

    cdef double* va = <double*> malloc(K * sizeof(double))
    cdef double* vb = <double*> malloc(K * sizeof(double))
    cdef long* nxt = <long*> malloc(K * sizeof(long))
    cdef long* prv = <long*> malloc(K * sizeof(long))
    cdef long* changed = <long*> malloc(K * sizeof(long))
    cdef char* alive = <char*> malloc(K * sizeof(char))
    groups_np = np.empty(K, dtype=np.int64)
    cdef long[::1] groups = groups_np
    steps = [] if trace else None
    if va == NULL or vb == NULL or nxt == NULL or prv == NULL \
            or changed == NULL or alive == NULL:
        raise MemoryError()
    try:
        for k in range(K):
            va[k] = a_in[k]
            vb[k] = b_in[k]
            nxt[k] = k + 1 if k + 1 < K else -1
            prv[k] = k - 1
            changed[k] = 0
            alive[k] = 1
        if trace:
            for k in range(K):
                cap_now += pair_cap(va[k], vb[k])
        for k in range(K - 1):
            ent.d = (pair_cap(va[k], vb[k]) + pair_cap(va[k + 1], vb[k + 1])
                     - pair_cap(va[k] + va[k + 1], vb[k] + vb[k + 1]))
            ent.node = k
            ent.seq = seq
            ent.t = now
            seq += 1
            d_push(&heap, ent)
        while live > target:
            ent = d_pop(&heap)
            i = ent.node
            if not alive[i] or changed[i] > ent.t:
                continue
            j = nxt[i]
            if j < 0 or changed[j] > ent.t:
                continue
            if trace:
                pos = 0
                for k in range(i):
                    if alive[k]:
                        pos += 1
                steps.append((pos, cap_now, cap_now - ent.d))
                cap_now -= ent.d
            va[i] += va[j]
            vb[i] += vb[j]
            alive[j] = 0
            nxt[i] = nxt[j]
            if nxt[j] >= 0:
                prv[nxt[j]] = i
            now += 1
            changed[i] = now
            live -= 1
            p = prv[i]
            if p >= 0:
                j = nxt[p]
                d = (pair_cap(va[p], vb[p]) + pair_cap(va[j], vb[j])
                     - pair_cap(va[p] + va[j], vb[p] + vb[j]))
                ent.d = d
                ent.node = p
                ent.seq = seq
                ent.t = now
                seq += 1
                d_push(&heap, ent)
            j = nxt[i]
            if j >= 0:
                d = (pair_cap(va[i], vb[i]) + pair_cap(va[j], vb[j])
                     - pair_cap(va[i] + va[j], vb[i] + vb[j]))
                ent.d = d
                ent.node = i
                ent.seq = seq
                ent.t = now
                seq += 1
                d_push(&heap, ent)
        g = -1
        for k in range(K):
            if alive[k]:
                g += 1
            groups[k] = g
    finally:
        free(va)
        free(vb)
        free(nxt)
        free(prv)
        free(changed)
        free(alive)
        free(heap.e)
    return groups_np, steps


# ---------------------------------------------------------------------------
# upgrading reducer

cdef struct UEntry:
    double d
    double al
    double bl
    double ah
    double bh
    long node
    long seq
    long t


cdef struct UHeap:
    UEntry* e
    Py_ssize_t size
    Py_ssize_t cap


cdef inline bint u_less(UEntry* a, UEntry* b) noexcept:
    if a.d != b.d:
        return a.d < b.d
    if a.node != b.node:
        return a.node < b.node
    return a.seq < b.seq


cdef int u_push(UHeap* h, UEntry ent) except -1:
    cdef Py_ssize_t i, p
    cdef UEntry tmp
    if h.size == h.cap:
        h.cap = h.cap * 2 if h.cap else 64
        h.e = <UEntry*> realloc(h.e, h.cap * sizeof(UEntry))
        if h.e == NULL:
            raise MemoryError()
    h.e[h.size] = ent
    i = h.size
    h.size += 1
    while i > 0:
        p = (i - 1) >> 1
        if u_less(&h.e[i], &h.e[p]):
            tmp = h.e[i]
            h.e[i] = h.e[p]
            h.e[p] = tmp
            i = p
        else:
            break
    return 0


cdef UEntry u_pop(UHeap* h) noexcept:
    cdef UEntry top = h.e[0]
    cdef Py_ssize_t i = 0, c
    cdef UEntry tmp
    h.size -= 1
    h.e[0] = h.e[h.size]
    while True:
        c = 2 * i + 1
        if c >= h.size:
            break
        if c + 1 < h.size and u_less(&h.e[c + 1], &h.e[c]):
            c += 1
        if u_less(&h.e[c], &h.e[i]):
            tmp = h.e[i]
            h.e[i] = h.e[c]
            h.e[c] = tmp
            i = c
        else:
            break
    return top


cdef int window_adjust_c(double* wa, double* wb, Py_ssize_t Mw,
                         double* out4) noexcept:
    """Same folding as pure.window_adjust; returns nonzero on violation."""
    cdef double ac = wa[1]
    cdef double bc = wb[1]
    cdef double s2, alpha, beta, denom, num_lo, num_hi
    cdef Py_ssize_t t
    cdef bint odd = Mw % 2 == 1
    cdef bint t_even
    for t in range(2, Mw - 1):
        t_even = t % 2 == 0
        if (odd and t_even) or ((not odd) and (not t_even)):
            s2 = wa[t] + wb[t]
            alpha = wa[t] * (ac + bc) / s2
            beta = wb[t] * (ac + bc) / s2
            ac = wa[t] + alpha
            bc = wb[t] + beta
        else:
            ac += wa[t]
            bc += wb[t]
    denom = wa[Mw - 1] * wb[0] - wa[0] * wb[Mw - 1]
    if denom <= 0.0:
        return 1
    num_lo = wa[Mw - 1] * bc - ac * wb[Mw - 1]
    num_hi = ac * wb[0] - wa[0] * bc
    out4[0] = wa[0] * num_lo / denom
    out4[1] = wb[0] * num_lo / denom
    out4[2] = wa[Mw - 1] * num_hi / denom
    out4[3] = wb[Mw - 1] * num_hi / denom
    for t in range(4):
        if out4[t] < 0.0:
            if out4[t] < -NEG_CLAMP:
                return 2
            out4[t] = 0.0
    return 0


def upgrade_greedy(a_arr, b_arr, Py_ssize_t target, Py_ssize_t M,
                   double eps, bint literal, bint trace):
    """Tool-2 preprocessing plus greedy window merging; see pure module."""
    cdef const double[::1] a_in = np.ascontiguousarray(a_arr, dtype=np.float64)
    cdef const double[::1] b_in = np.ascontiguousarray(b_arr, dtype=np.float64)
    cdef Py_ssize_t K = a_in.shape[0]
    cdef Py_ssize_t k, w, cnt
    cdef long i, j, p, s, lo, hi, head = 0
    cdef long now = 0, seq = 0, live = K
    cdef long Mw = -1, cur_M = -1, nxt_M
    cdef double alpha, beta, gain, base
    cdef bint close
    cdef int rc = 0
    cdef UHeap heap
    cdef UEntry ent
    heap.e = NULL
    heap.size = 0
    heap.cap = 0

    cdef double* va = <double*> malloc(K * sizeof(double))
    cdef double* vb = <double*> malloc(K * sizeof(double))
    cdef long* nxt = <long*> malloc(K * sizeof(long))
    cdef long* prv = <long*> malloc(K * sizeof(long))
    cdef long* changed = <long*> malloc(K * sizeof(long))
    cdef char* alive = <char*> malloc(K * sizeof(char))
    cdef long* wnodes = <long*> malloc((M + 2) * sizeof(long))
    cdef double* wa = <double*> malloc((M + 2) * sizeof(double))
    cdef double* wb = <double*> malloc((M + 2) * sizeof(double))
    cdef double out4[4]
    events = [] if trace else None
    if va == NULL or vb == NULL or nxt == NULL or prv == NULL \
            or changed == NULL or alive == NULL or wnodes == NULL \
            or wa == NULL or wb == NULL:
        raise MemoryError()
    try:
        for k in range(K):
            va[k] = a_in[k]
            vb[k] = b_in[k]
            nxt[k] = k + 1 if k + 1 < K else -1
            prv[k] = k - 1
            changed[k] = 0
            alive[k] = 1

        # epsilon preprocessing, one left-to-right sweep
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
                alpha = va[j] * (va[i] + vb[i]) / (va[j] + vb[j])
                beta = vb[j] * (va[i] + vb[i]) / (va[j] + vb[j])
                if trace:
                    pos = 0
                    for k in range(i):
                        if alive[k]:
                            pos += 1
                    events.append((2, pos, (va[i], va[j]), (vb[i], vb[j]),
                                   0.0, 0.0, alpha, beta))
                va[j] += alpha
                vb[j] += beta
                alive[i] = 0
                p = prv[i]
                if p >= 0:
                    nxt[p] = j
                prv[j] = p
                if head == i:
                    head = j
                now += 1
                changed[j] = now
                live -= 1
            i = j

        while live > target:
            Mw = M
            if live < Mw:
                Mw = live
            if live - target + 2 < Mw:
                Mw = live - target + 2
            if Mw < 3:
                # two pairs left, target one
                i = head
                j = nxt[i]
                alpha = va[j] * (va[i] + vb[i]) / (va[j] + vb[j])
                beta = vb[j] * (va[i] + vb[i]) / (va[j] + vb[j])
                if trace:
                    events.append((2, 0, (va[i], va[j]), (vb[i], vb[j]),
                                   0.0, 0.0, alpha, beta))
                va[j] += alpha
                vb[j] += beta
                alive[i] = 0
                prv[j] = -1
                head = j
                now += 1
                changed[j] = now
                live -= 1
                continue
            if Mw != cur_M:
                heap.size = 0
                cur_M = Mw
                s = head
                while s >= 0:
                    rc = _u_push_window(&heap, s, Mw, va, vb, nxt, wa, wb,
                                        out4, literal, now, &seq)
                    if rc:
                        raise ValueError(
                            "ordering violation inside the upgrade window")
                    s = nxt[s]
            while True:
                ent = u_pop(&heap)
                s = ent.node
                if not alive[s] or changed[s] > ent.t:
                    continue
                w = 0
                i = s
                wnodes[0] = s
                while w < Mw - 1 and i >= 0:
                    i = nxt[i]
                    w += 1
                    wnodes[w] = i
                if i < 0:
                    continue
                close = False
                for w in range(Mw):
                    if changed[wnodes[w]] > ent.t:
                        close = True
                        break
                if close:
                    continue
                break
            lo = wnodes[0]
            hi = wnodes[Mw - 1]
            if trace:
                pos = 0
                for k in range(lo):
                    if alive[k]:
                        pos += 1
                events.append((int(Mw), pos,
                               tuple(va[wnodes[w]] for w in range(Mw)),
                               tuple(vb[wnodes[w]] for w in range(Mw)),
                               ent.al, ent.bl, ent.ah, ent.bh))
            for w in range(1, Mw - 1):
                alive[wnodes[w]] = 0
            nxt[lo] = hi
            prv[hi] = lo
            va[lo] += ent.al
            vb[lo] += ent.bl
            va[hi] += ent.ah
            vb[hi] += ent.bh
            now += 1
            changed[lo] = now
            changed[hi] = now
            live -= Mw - 2
            if live <= target:
                break
            nxt_M = M
            if live < nxt_M:
                nxt_M = live
            if live - target + 2 < nxt_M:
                nxt_M = live - target + 2
            if nxt_M != Mw:
                continue
            s = lo
            cnt = 0
            while prv[s] >= 0 and cnt < Mw - 1:
                s = prv[s]
                cnt += 1
            while s != hi:
                rc = _u_push_window(&heap, s, Mw, va, vb, nxt, wa, wb,
                                    out4, literal, now, &seq)
                if rc:
                    raise ValueError(
                        "ordering violation inside the upgrade window")
                s = nxt[s]
            rc = _u_push_window(&heap, hi, Mw, va, vb, nxt, wa, wb,
                                out4, literal, now, &seq)
            if rc:
                raise ValueError(
                    "ordering violation inside the upgrade window")

        out_a = np.empty(live, dtype=np.float64)
        out_b = np.empty(live, dtype=np.float64)
        k = 0
        i = head
        while i >= 0:
            out_a[k] = va[i]
            out_b[k] = vb[i]
            k += 1
            i = nxt[i]
    finally:
        free(va)
        free(vb)
        free(nxt)
        free(prv)
        free(changed)
        free(alive)
        free(wnodes)
        free(wa)
        free(wb)
        free(heap.e)
    return out_a, out_b, events


cdef int _u_push_window(UHeap* heap, long s, long Mw, double* va, double* vb,
                        long* nxt, double* wa, double* wb, double* out4,
                        bint literal, long now, long* seq) except -1:
    cdef long i = s
    cdef Py_ssize_t w
    cdef double base, gain
    cdef UEntry ent
    cdef int rc
    wa[0] = va[s]
    wb[0] = vb[s]
    for w in range(1, Mw):
        i = nxt[i]
        if i < 0:
            return 0
        wa[w] = va[i]
        wb[w] = vb[i]
    rc = window_adjust_c(wa, wb, Mw, out4)
    if rc:
        return rc
    base = 0.0
    for w in range(Mw):
        base += pair_cap(wa[w], wb[w])
    gain = (pair_cap(wa[0] + out4[0], wb[0] + out4[1])
            + pair_cap(wa[Mw - 1] + out4[2], wb[Mw - 1] + out4[3]) - base)
    ent.d = -gain if literal else gain
    ent.al = out4[0]
    ent.bl = out4[1]
    ent.ah = out4[2]
    ent.bh = out4[3]
    ent.node = s
    ent.seq = seq[0]
    ent.t = now
    seq[0] += 1
    u_push(heap, ent)
    return 0
