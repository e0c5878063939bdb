"""Golomb rulers and permutation families forming (M+1, S)-nets.

A permutation family is a list of ``M + 1`` bijections of the cell grid
``[S] x [S]``.  Cells are addressed by their flat index ``a * S + b`` and each
map is stored as a forward and an inverse lookup table.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numba
import numpy as np

# Lexicographically first shortest ruler of each order, produced by
# search_optimal_ruler and re-checked by the test suite.
_OPTIMAL_RULERS: dict[int, tuple[int, ...]] = {
    2: (0, 1),
    3: (0, 1, 3),
    4: (0, 1, 4, 6),
    5: (0, 1, 4, 9, 11),
    6: (0, 1, 4, 10, 12, 17),
    7: (0, 1, 4, 10, 18, 23, 25),
    8: (0, 1, 4, 9, 15, 22, 32, 34),
    9: (0, 1, 5, 12, 25, 27, 35, 41, 44),
    10: (0, 1, 6, 10, 23, 26, 34, 41, 53, 55),
    11: (0, 1, 4, 13, 28, 33, 47, 54, 64, 70, 72),
    12: (0, 2, 6, 24, 29, 40, 43, 55, 68, 75, 76, 85),
}

SUPPORTED_ORDERS = range(min(_OPTIMAL_RULERS), max(_OPTIMAL_RULERS) + 1)


class UnsupportedOrderError(ValueError):
    pass


def verify_ruler(marks: Sequence[int]) -> bool:
    """True iff ``marks`` starts at 0, strictly increases and has distinct differences."""
    try:
        marks = [int(x) for x in marks]
    except (TypeError, ValueError):
        return False
    if len(marks) < 1 or marks[0] != 0:
        return False
    if any(b <= a for a, b in zip(marks, marks[1:])):
        return False
    seen = set()
    for j in range(len(marks)):
        for i in range(j):
            d = marks[j] - marks[i]
            if d in seen:
                return False
            seen.add(d)
    return True


def repeated_differences(marks: Sequence[int]) -> list[int]:
    """Positive differences occurring more than once (diagnostics for bad rulers)."""
    counts: dict[int, int] = {}
    for j in range(len(marks)):
        for i in range(j):
            d = marks[j] - marks[i]
            counts[d] = counts.get(d, 0) + 1
    return sorted(d for d, c in counts.items() if c > 1)


@dataclass(frozen=True)
class GolombRuler:
    marks: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "marks", tuple(int(x) for x in self.marks))

    @property
    def order(self) -> int:
        return len(self.marks)

    @property
    def length(self) -> int:
        return self.marks[-1]

    @property
    def is_golomb(self) -> bool:
        return verify_ruler(self.marks)

    def __iter__(self):
        return iter(self.marks)

    def __len__(self):
        return len(self.marks)

    def __getitem__(self, k):
        return self.marks[k]


def optimal_ruler(order: int) -> GolombRuler:
    if order not in _OPTIMAL_RULERS:
        raise UnsupportedOrderError(
            f"no optimal Golomb ruler of order {order} in table; "
            f"supported orders are {SUPPORTED_ORDERS.start}..{SUPPORTED_ORDERS.stop - 1}"
        )
    return GolombRuler(_OPTIMAL_RULERS[order])


@numba.njit(cache=True)
def _golomb_dfs(order, length, marks, used):
    # Iterative DFS placing marks[1..order-1]; the last mark is pinned to `length`.
    cand = np.zeros(order, np.int64)
    marks[0] = 0
    n = 1
    cand[1] = 1
    while n > 0:
        if n == order:
            return True
        x = cand[n]
        remaining = order - 1 - n
        placed = False
        while x <= length:
            # the remaining consecutive gaps are distinct positive integers
            if x + remaining * (remaining + 1) // 2 > length:
                break
            if n == order - 1 and x != length:
                x = length
                continue
            ok = True
            for t in range(n):
                if used[x - marks[t]]:
                    ok = False
                    break
            # mirror symmetry: first gap < last gap
            if ok and n == order - 1 and marks[1] > x - marks[n - 1]:
                ok = False
            if ok:
                for t in range(n):
                    used[x - marks[t]] = True
                marks[n] = x
                cand[n] = x + 1
                placed = True
                break
            x += 1
        if placed:
            n += 1
            if n < order:
                cand[n] = marks[n - 1] + 1
        else:
            n -= 1
            if n > 0:
                for t in range(n):
                    used[marks[n] - marks[t]] = False
    return False


def search_optimal_ruler(order: int) -> GolombRuler:
    """Exhaustive branch-and-bound search for a shortest Golomb ruler.

    Lengths are tried in increasing order starting from ``order*(order-1)/2``,
    so the first ruler found is optimal. Orders above 11 take minutes.
    """
    if order < 2:
        raise ValueError("order must be >= 2")
    length = order * (order - 1) // 2
    while True:
        marks = np.zeros(order, np.int64)
        used = np.zeros(length + 1, np.bool_)
        if _golomb_dfs(order, length, marks, used):
            return GolombRuler(tuple(marks.tolist()))
        length += 1


def lpf(S: int) -> int:
    """Least prime factor of ``S``."""
    S = int(S)
    if S < 2:
        raise ValueError(f"lpf undefined for S={S} (< 2)")
    if S % 2 == 0:
        return 2
    f = 3
    while f * f <= S:
        if S % f == 0:
            return f
        f += 2
    return S


class PermKind(str, enum.Enum):
    SHIFT = "shift"
    INVOLUTION = "involution"


def perm_map(kind: PermKind, S: int, k: int, i, j):
    """Evaluate pi_k(i, j) directly from its formula; works on ints or arrays."""
    if k == 0:
        return i % S, j % S
    c = k - 1
    if PermKind(kind) is PermKind.SHIFT:
        return j % S, (i + c * j) % S
    return (-c * i + j) % S, ((1 - c * c) * i + c * j) % S


@dataclass(frozen=True)
class PermFamily:
    S: int
    M: int
    kind: PermKind
    forward: np.ndarray = field(repr=False)
    inverse: np.ndarray = field(repr=False)

    @property
    def is_net(self) -> bool:
        """Whether the construction is guaranteed to form a net (``M <= lpf(S)``)."""
        return self.M <= lpf(self.S)

    def pi(self, k: int, i: int, j: int) -> tuple[int, int]:
        c = int(self.forward[k, i * self.S + j])
        return divmod(c, self.S)

    def pi_inv(self, k: int, a: int, b: int) -> tuple[int, int]:
        c = int(self.inverse[k, a * self.S + b])
        return divmod(c, self.S)

    @cached_property
    def row_of_cell(self) -> np.ndarray:
        """``row_of_cell[k, c]`` = row of Pi_k(B) that reads cell ``c`` of B."""
        return self.inverse // self.S

    def apply(self, k: int, block: np.ndarray) -> np.ndarray:
        """Pi_k(B): entry (i, j) is B at pi_k(i, j)."""
        flat = np.asarray(block).reshape(-1)
        return flat[self.forward[k]].reshape(self.S, self.S)


def build_perm_family(S: int, M: int, kind: PermKind | str = PermKind.INVOLUTION) -> PermFamily:
    S, M, kind = int(S), int(M), PermKind(kind)
    if S < 2:
        raise ValueError(f"S must be >= 2, got {S}")
    if M < 0:
        raise ValueError(f"M must be >= 0, got {M}")
    i, j = np.divmod(np.arange(S * S, dtype=np.int64), S)
    fwd = np.empty((M + 1, S * S), dtype=np.int32)
    inv = np.empty_like(fwd)
    for k in range(M + 1):
        a, b = perm_map(kind, S, k, i, j)
        fwd[k] = a * S + b
        if np.bincount(fwd[k], minlength=S * S).max() != 1:
            raise ValueError(f"pi_{k} is not a bijection for S={S}")
        inv[k, fwd[k]] = np.arange(S * S, dtype=np.int32)
    fwd.setflags(write=False)
    inv.setflags(write=False)
    return PermFamily(S, M, kind, fwd, inv)


@dataclass(frozen=True)
class NetCheck:
    ok: bool
    sampled: bool
    detail: str = ""

    def __bool__(self):
        return self.ok


def _pair_is_net(rows_k: np.ndarray, rows_l: np.ndarray, S: int) -> tuple[bool, str]:
    # Rows a of Pi_k and b of Pi_l share cell c iff c maps to the key (a, b);
    # S^2 cells over S^2 keys intersect once each iff no key repeats.
    counts = np.bincount(rows_k.astype(np.int64) * S + rows_l, minlength=S * S)
    if counts.max() == 1:
        return True, ""
    bad = int(np.flatnonzero(counts != 1)[0])
    a, b = divmod(bad, S)
    return False, f"rows {a} and {b} intersect in {int(counts[bad])} cells"


def verify_net(family: PermFamily, exhaustive_bound: int = 1024, samples: int = 2000,
               seed: int = 0) -> NetCheck:
    """Check the single-common-cell property for every pair of distinct maps.

    Exhaustive for ``S <= exhaustive_bound``; above that, random row pairs are
    intersected directly and the lpf condition is required as well.
    """
    S, M = family.S, family.M
    rows = family.row_of_cell
    if S <= exhaustive_bound:
        for k in range(M + 1):
            for l in range(k + 1, M + 1):
                ok, why = _pair_is_net(rows[k], rows[l], S)
                if not ok:
                    return NetCheck(False, False, f"maps {k},{l}: {why}")
        return NetCheck(True, False)

    rng = np.random.default_rng(seed)
    if not family.is_net:
        return NetCheck(False, True, f"M={M} exceeds lpf(S)={lpf(S)}")
    for _ in range(samples):
        k, l = rng.choice(M + 1, size=2, replace=False)
        a, b = rng.integers(0, S, size=2)
        cells_a = family.forward[k, a * S:(a + 1) * S]
        cells_b = family.forward[l, b * S:(b + 1) * S]
        n = np.intersect1d(cells_a, cells_b).size
        if n != 1:
            return NetCheck(False, True, f"maps {k},{l} rows {a},{b}: {n} common cells")
    return NetCheck(True, True)
