"""Shortened extended Hamming component code.

Syndromes are plain integers of ``r`` bits: bits ``0..r-2`` carry the Hamming
label and bit ``r-1`` the overall-parity check.  Every column has the overall
bit set, so single errors give an odd syndrome and double errors an even one.
"""

from __future__ import annotations

import enum
import math
from functools import cached_property
from typing import NamedTuple

import numpy as np


class ActionKind(enum.Enum):
    NO_ERROR = 0
    FLIP = 1
    UNCORRECTABLE = 2


class DecodeAction(NamedTuple):
    kind: ActionKind
    position: int = -1


NO_ERROR = DecodeAction(ActionKind.NO_ERROR)
UNCORRECTABLE = DecodeAction(ActionKind.UNCORRECTABLE)


def parity_bits_for(n: int) -> int:
    """Number of parity bits of the shortened extended Hamming code of length n."""
    if n < 2:
        raise ValueError(f"code length must be >= 2, got {n}")
    return math.ceil(math.log2(n)) + 1


class ComponentCode:
    """Systematic single-error-correcting, double-error-detecting code of length ``n``.

    Parity occupies the last ``r`` positions.  Those carry the pivot labels
    ``1, 2, 4, ..., 2**(r-2)`` and then ``0``; information positions get the
    smallest remaining labels in increasing order.  Larger labels are the
    shortened-away part of the parent code.
    """

    def __init__(self, n: int):
        n = int(n)
        r = parity_bits_for(n)
        if n < r + 1:
            raise ValueError(f"length {n} leaves no information bits with r={r}")
        self.n = n
        self.r = r
        self.parent_len = 1 << (r - 1)
        self.shorten = self.parent_len - n
        self.top = 1 << (r - 1)
        self.label_mask = self.top - 1

        pivots = [1 << t for t in range(r - 1)] + [0]
        pivot_set = set(pivots)
        others = [lab for lab in range(1, self.parent_len) if lab not in pivot_set]
        labels = np.array(others[: n - r] + pivots, dtype=np.int64)

        self.columns = labels | self.top
        self.columns.setflags(write=False)
        label_pos = np.full(self.parent_len, -1, dtype=np.int32)
        label_pos[labels] = np.arange(n, dtype=np.int32)
        label_pos.setflags(write=False)
        self.label_pos = label_pos

    @classmethod
    def for_geometry(cls, S: int, M: int) -> "ComponentCode":
        return cls((M + 1) * S)

    @property
    def k(self) -> int:
        return self.n - self.r

    @property
    def parity_positions(self) -> range:
        return range(self.n - self.r, self.n)

    def __repr__(self):
        return f"ComponentCode(n={self.n}, r={self.r}, parent_len={self.parent_len})"

    def column_of(self, p: int) -> int:
        if not 0 <= p < self.n:
            raise IndexError(f"position {p} outside [0, {self.n})")
        return int(self.columns[p])

    def syndrome(self, word) -> int:
        word = np.asarray(word)
        if word.shape != (self.n,):
            raise ValueError(f"word must have length {self.n}, got shape {word.shape}")
        s = np.bitwise_xor.reduce(self.columns[np.flatnonzero(word)]) if word.any() else 0
        return int(s)

    def decide(self, s: int) -> DecodeAction:
        if s == 0:
            return NO_ERROR
        if not s & self.top:
            return UNCORRECTABLE
        p = int(self.label_pos[s & self.label_mask])
        if p < 0:
            return UNCORRECTABLE
        return DecodeAction(ActionKind.FLIP, p)

    def encode_parity(self, info) -> np.ndarray:
        info = np.asarray(info)
        if info.shape != (self.k,):
            raise ValueError(f"info must have length {self.k}, got shape {info.shape}")
        s = np.bitwise_xor.reduce(self.columns[np.flatnonzero(info)]) if info.any() else 0
        return self.parity_from_syndrome(int(s))

    def parity_from_syndrome(self, s: int) -> np.ndarray:
        """Parity bits cancelling the partial syndrome ``s`` of the information part."""
        label = s & self.label_mask
        out = np.zeros(self.r, dtype=np.uint8)
        for t in range(self.r - 1):
            out[t] = (label >> t) & 1
        out[-1] = ((s >> (self.r - 1)) ^ bin(label).count("1")) & 1
        return out

    def encode(self, info) -> np.ndarray:
        info = np.asarray(info, dtype=np.uint8)
        return np.concatenate([info, self.encode_parity(info)])

    @cached_property
    def parity_check_matrix(self) -> np.ndarray:
        """Explicit ``r x n`` matrix; row ``t`` holds bit ``t`` of every column."""
        return ((self.columns[None, :] >> np.arange(self.r)[:, None]) & 1).astype(np.uint8)
