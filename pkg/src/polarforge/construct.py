"""Bit-channel approximation along a binary index path, frozen-set code
design with rate sandwiches, and the bit-reversed Kronecker encoder rows.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channel import (
    BmsChannel,
    ChannelError,
    InvariantViolation,
    capacity,
    error_prob,
)
from .degrade import degrading_merge
from .transform import TransformKind, transform
from .upgrade import DEFAULT_EPSILON, upgrading_merge

MODES = ("degrade", "upgrade")


@dataclass(frozen=True)
class BitIndexPath:
    """Index i at stage count m, expanded to bits b1..bm, MSB first."""
    m: int
    i: int

    def __post_init__(self):
        if self.m < 0 or not 0 <= self.i < (1 << self.m):
            raise ChannelError(f"index {self.i} out of range for m={self.m}")

    @property
    def bits(self) -> tuple:
        return tuple((self.i >> (self.m - 1 - j)) & 1 for j in range(self.m))


@dataclass(frozen=True)
class MergeTrace:
    """One quantizer invocation: channel before/after plus its records."""
    before: BmsChannel
    after: BmsChannel
    kind: str                  # "degrade" or "upgrade"
    records: tuple
    groups: np.ndarray | None  # degrade witness map, None for upgrades


def _merge_step(ch, mode, mu, M, epsilon, objective, trace):
    if mode == "degrade":
        if trace:
            out, records, groups = degrading_merge(ch, mu, trace=True)
            return out, MergeTrace(ch, out, "degrade", tuple(records), groups)
        return degrading_merge(ch, mu), None
    if trace:
        out, records = upgrading_merge(ch, mu, M, epsilon=epsilon,
                                       objective=objective, trace=True)
        return out, MergeTrace(ch, out, "upgrade", tuple(records), None)
    out = upgrading_merge(ch, mu, M, epsilon=epsilon, objective=objective)
    return out, None


def approx_bit_channel(W: BmsChannel, path, mu, mode: str, M: int = 4, *,
                       epsilon: float = DEFAULT_EPSILON,
                       objective: str = "min-gain",
                       trace: bool = False):
    """Degraded or upgraded stand-in for one bit channel.

    Follows the index bits most-significant first: bit 0 applies the minus
    transform, bit 1 the plus transform, re-merging to mu symbols after
    each step.  mu may be math.inf to disable merging entirely.
    """
    if mode not in MODES:
        raise ChannelError(f"mode {mode!r} not one of {MODES}")
    if not isinstance(path, BitIndexPath):
        path = BitIndexPath(*path)
    traces = []
    ch, tr = _merge_step(W, mode, mu, M, epsilon, objective, trace)
    if trace:
        traces.append(tr)
    for bit in path.bits:
        kind = TransformKind.MINUS if bit == 0 else TransformKind.PLUS
        ch, tr = _merge_step(transform(ch, kind), mode, mu, M, epsilon,
                             objective, trace)
        if trace:
            traces.append(tr)
    return (ch, traces) if trace else ch


def _tree_channels(W, m, mode, mu, M, epsilon, objective):
    """All 2^m approximations, computing each intermediate stage once."""
    level = [_merge_step(W, mode, mu, M, epsilon, objective, False)[0]]
    for _ in range(m):
        nxt = []
        for ch in level:
            for kind in (TransformKind.MINUS, TransformKind.PLUS):
                nxt.append(_merge_step(transform(ch, kind), mode, mu, M,
                                       epsilon, objective, False)[0])
        level = nxt
    return level


def _index_stats(args):
    a, b, m, i, mu, M, epsilon, objective = args
    W = BmsChannel(a, b)
    out = []
    for mode in MODES:
        ch = approx_bit_channel(W, (m, i), mu, mode, M,
                                epsilon=epsilon, objective=objective)
        out.append((error_prob(ch), capacity(ch)))
    return out


def _worker_count(n_tasks: int) -> int:
    env = os.environ.get("POLARFORGE_THREADS")
    if env:
        try:
            return max(1, min(int(env), n_tasks))
        except ValueError:
            raise ChannelError(f"POLARFORGE_THREADS={env!r} is not an integer")
    return 1


@dataclass(frozen=True)
class CodeDesign:
    """Frozen-set design with per-index misdecoding bounds from both sides."""
    channel_spec: str
    m: int
    mu: int
    merge_order: int
    target_bler: float
    pe_degraded: tuple
    pe_upgraded: tuple
    info_set: tuple
    rate_degraded: float
    rate_upgraded: float
    rate_exact: float | None = None
    cap_degraded: tuple | None = field(default=None, compare=False)
    cap_upgraded: tuple | None = field(default=None, compare=False)

    @property
    def n(self) -> int:
        return 1 << self.m

    @property
    def rate_gap(self) -> float:
        return self.rate_upgraded - self.rate_degraded


def select_info_set(pe, budget: float) -> list:
    """Largest index set whose pe sum fits the budget: ascending pe order,
    ties broken by smaller index (optimal for a sum constraint)."""
    order = sorted(range(len(pe)), key=lambda k: (pe[k], k))
    total = 0.0
    chosen = []
    for k in order:
        if total + pe[k] <= budget:
            total += pe[k]
            chosen.append(k)
        else:
            break
    return sorted(chosen)


def design_code(W: BmsChannel, m: int, target_bler: float, mu, M: int = 4, *,
                epsilon: float = DEFAULT_EPSILON,
                objective: str = "min-gain",
                shared: bool = False,
                channel_spec: str = "custom",
                with_exact: bool = False) -> CodeDesign:
    """Build the frozen-set design for all 2^m bit channels.

    pe_degraded are true upper bounds on the misdecoding probabilities and
    drive the selection; pe_upgraded are the matching lower bounds used to
    report how far the design can be from the ideal one.  shared=True
    computes each polarization stage once instead of per index (identical
    results, fewer merges).  with_exact adds the brute-force rate at small
    m.
    """
    if not 0.0 < target_bler < 1.0:
        raise ChannelError(f"target_bler={target_bler!r} must be in (0, 1)")
    if m < 0:
        raise ChannelError(f"m={m} must be non-negative")
    n = 1 << m
    if shared:
        stats = {}
        for mode in MODES:
            chans = _tree_channels(W, m, mode, mu, M, epsilon, objective)
            stats[mode] = [(error_prob(c), capacity(c)) for c in chans]
        per_index = [(stats["degrade"][i], stats["upgrade"][i]) for i in range(n)]
    else:
        tasks = [(W.a, W.b, m, i, mu, M, epsilon, objective) for i in range(n)]
        workers = _worker_count(n)
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                per_index = list(pool.map(_index_stats, tasks))
        else:
            per_index = [_index_stats(t) for t in tasks]
    pe_deg = tuple(float(d[0]) for d, _ in per_index)
    pe_up = tuple(float(u[0]) for _, u in per_index)
    cap_deg = tuple(float(d[1]) for d, _ in per_index)
    cap_up = tuple(float(u[1]) for _, u in per_index)
    for i in range(n):
        if pe_up[i] > pe_deg[i] + 1e-12:
            raise InvariantViolation(
                f"index {i}: upgraded P_e bound exceeds degraded bound")
    info = select_info_set(pe_deg, target_bler)
    info_up = select_info_set(pe_up, target_bler)
    rate_deg = len(info) / n
    rate_up = len(info_up) / n
    if rate_deg > rate_up + 1e-12:
        raise InvariantViolation("rate sandwich violated")
    rate_exact = None
    if with_exact:
        from .oracle import BitChannelOracle

        fam = BitChannelOracle(W, m)
        pe_exact = [error_prob(fam.bit_channel(i)) for i in range(n)]
        rate_exact = len(select_info_set(pe_exact, target_bler)) / n
    return CodeDesign(
        channel_spec=channel_spec,
        m=m,
        mu=int(mu) if mu != math.inf else -1,
        merge_order=int(M),
        target_bler=float(target_bler),
        pe_degraded=pe_deg,
        pe_upgraded=pe_up,
        info_set=tuple(info),
        rate_degraded=rate_deg,
        rate_upgraded=rate_up,
        rate_exact=rate_exact,
        cap_degraded=cap_deg,
        cap_upgraded=cap_up,
    )


_JSON_KEYS = ("schema", "channel_spec", "m", "mu", "merge_order",
              "target_bler", "pe_degraded", "pe_upgraded", "info_set",
              "rate_degraded", "rate_upgraded")


def design_to_json(design: CodeDesign) -> str:
    doc = {
        "schema": 1,
        "channel_spec": design.channel_spec,
        "m": design.m,
        "mu": design.mu,
        "merge_order": design.merge_order,
        "target_bler": design.target_bler,
        "pe_degraded": list(design.pe_degraded),
        "pe_upgraded": list(design.pe_upgraded),
        "info_set": list(design.info_set),
        "rate_degraded": design.rate_degraded,
        "rate_upgraded": design.rate_upgraded,
    }
    return json.dumps(doc, indent=2) + "\n"


def design_from_json(text: str) -> CodeDesign:
    doc = json.loads(text)
    if doc.get("schema") != 1:
        raise ChannelError(f"unsupported design schema {doc.get('schema')!r}")
    missing = [k for k in _JSON_KEYS if k not in doc]
    if missing:
        raise ChannelError(f"design document missing keys: {missing}")
    return CodeDesign(
        channel_spec=doc["channel_spec"],
        m=int(doc["m"]),
        mu=int(doc["mu"]),
        merge_order=int(doc["merge_order"]),
        target_bler=float(doc["target_bler"]),
        pe_degraded=tuple(doc["pe_degraded"]),
        pe_upgraded=tuple(doc["pe_upgraded"]),
        info_set=tuple(doc["info_set"]),
        rate_degraded=float(doc["rate_degraded"]),
        rate_upgraded=float(doc["rate_upgraded"]),
    )


def save_design(design: CodeDesign, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(design_to_json(design))


def load_design(path: str) -> CodeDesign:
    with open(path) as fh:
        return design_from_json(fh.read())


def bit_reverse(x: int, m: int) -> int:
    r = 0
    for _ in range(m):
        r = (r << 1) | (x & 1)
        x >>= 1
    return r


def generator_matrix(m: int) -> np.ndarray:
    """B_m G^{x m} over GF(2): the Kronecker power of the 2x2 kernel with
    bit-reversed row order."""
    n = 1 << m
    rows = np.array([bit_reverse(r, m) for r in range(n)])
    r = rows[:, None]
    c = np.arange(n)[None, :]
    return ((c & ~r) == 0).astype(np.uint8)


@dataclass(frozen=True)
class GeneratorRows:
    m: int
    rows: np.ndarray


def generator_rows(m: int, info_set) -> GeneratorRows:
    n = 1 << m
    idx = list(info_set)
    if any(not 0 <= i < n for i in idx):
        raise ChannelError(f"info set indices must lie in [0, {n})")
    return GeneratorRows(m=m, rows=generator_matrix(m)[idx])


def encode(info_bits, design: CodeDesign) -> np.ndarray:
    """Place info bits on the information set and multiply by B_m G^{x m}."""
    bits = np.asarray(info_bits, dtype=np.uint8) % 2
    if bits.shape != (len(design.info_set),):
        raise ChannelError(
            f"expected {len(design.info_set)} info bits, got {bits.shape}")
    u = np.zeros(design.n, dtype=np.uint8)
    u[list(design.info_set)] = bits
    return (u @ generator_matrix(design.m)) % 2
