"""One-step polarization transforms on canonical BMS channels.

The minus (check) transform produces the even-index child channel, the
plus (bit) transform the odd-index child.  Output symbols with identical
LR are merged immediately, which is lossless and keeps structured inputs
(BEC in particular) from blowing up quadratically.
"""

from __future__ import annotations

from enum import Enum

import numpy as np

from .channel import BmsChannel, canonicalize


class TransformKind(Enum):
    MINUS = "minus"
    PLUS = "plus"


def transform(ch: BmsChannel, kind: TransformKind) -> BmsChannel:
    """Apply one polarization step and return the canonicalized child.

    Raw pair counts are 2k^2 (minus) and 4k^2 (plus) for k input pairs;
    zero-mass outputs are dropped before canonicalization.
    """
    A, B = ch.a, ch.b
    # output symbols of the parent, indexed (pair j, side s):
    # c[j, s] = W(y|0), cbar[j, s] = W(y|1)
    c = np.concatenate([A, B])
    cbar = np.concatenate([B, A])
    if kind is TransformKind.MINUS:
        # representative (y1 at side 0, y2 any); conjugate flips y1's side
        a_raw = 0.5 * (np.outer(A, c) + np.outer(B, cbar))
        b_raw = 0.5 * (np.outer(B, c) + np.outer(A, cbar))
    elif kind is TransformKind.PLUS:
        # representative (y1 at side 0, y2 any, u1); conjugate flips both sides
        a_raw = 0.5 * np.concatenate([np.outer(A, c), np.outer(B, c)])
        b_raw = 0.5 * np.concatenate([np.outer(B, cbar), np.outer(A, cbar)])
    else:
        raise TypeError(f"unknown transform kind {kind!r}")
    a_raw = a_raw.ravel()
    b_raw = b_raw.ravel()
    keep = (a_raw + b_raw) > 0.0
    pairs = np.column_stack([a_raw[keep], b_raw[keep]])
    return canonicalize(pairs, merge_equal_lr=True)


def minus(ch: BmsChannel) -> BmsChannel:
    return transform(ch, TransformKind.MINUS)


def plus(ch: BmsChannel) -> BmsChannel:
    return transform(ch, TransformKind.PLUS)
