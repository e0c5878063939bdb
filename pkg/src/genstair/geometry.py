"""Code instances and the bit <-> constraint incidence.

Block indices are stream indices: blocks ``0 .. d_M - 1`` are the all-zero
initialization blocks and constraint ``m`` (for ``m >= d_M``) is identified
with its newest block ``B_m``.  Row ``i`` of constraint ``m`` is the codeword

    Pi_M(B_{m-d_M}) | ... | Pi_1(B_{m-d_1}) | B_m

so codeword position ``(M - k) * S + j`` holds ``B_{m-d_k}`` at ``pi_k(i, j)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .component import ComponentCode, parity_bits_for
from .nets import (
    GolombRuler,
    PermFamily,
    PermKind,
    build_perm_family,
    lpf,
    optimal_ruler,
    repeated_differences,
    verify_net,
    verify_ruler,
)


class InvalidParamsError(ValueError):
    pass


def derived_r(S: int, M: int) -> int:
    return parity_bits_for((M + 1) * S)


@dataclass(frozen=True)
class CodeParams:
    S: int
    M: int
    F: int
    W: int
    iterations: int = 1
    ruler: GolombRuler | None = None
    perm_kind: PermKind = PermKind.INVOLUTION
    r: int | None = None
    force: bool = False
    warmup: bool = True

    def __post_init__(self):
        set_ = object.__setattr__
        for name in ("S", "M", "F", "W", "iterations"):
            set_(self, name, int(getattr(self, name)))
        if self.ruler is None:
            set_(self, "ruler", optimal_ruler(self.M + 1))
        elif not isinstance(self.ruler, GolombRuler):
            set_(self, "ruler", GolombRuler(tuple(self.ruler)))
        set_(self, "perm_kind", PermKind(self.perm_kind))
        if self.r is None:
            set_(self, "r", derived_r(self.S, self.M))
        else:
            set_(self, "r", int(self.r))

    @property
    def d_M(self) -> int:
        return self.ruler.length

    @property
    def n(self) -> int:
        return (self.M + 1) * self.S

    @property
    def info_cols(self) -> int:
        return self.S - self.r

    @cached_property
    def perms(self) -> PermFamily:
        return build_perm_family(self.S, self.M, self.perm_kind)

    @cached_property
    def code(self) -> ComponentCode:
        return ComponentCode(self.n)

    @cached_property
    def ruler_array(self) -> np.ndarray:
        return np.asarray(self.ruler.marks, dtype=np.int64)

    def describe(self) -> dict:
        return {
            "S": self.S, "M": self.M, "r": self.r, "F": self.F, "W": self.W,
            "iterations": self.iterations, "ruler": list(self.ruler.marks),
            "perm_family": self.perm_kind.value, "warmup": self.warmup,
        }


@dataclass
class Check:
    name: str
    ok: bool
    detail: str = ""


@dataclass
class ValidationReport:
    checks: list[Check] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.ok]

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def __str__(self):
        return "\n".join(
            f"[{'PASS' if c.ok else 'FAIL'}] {c.name}" + (f": {c.detail}" if c.detail else "")
            for c in self.checks
        )


def validate(params: CodeParams, net_bound: int = 1024) -> ValidationReport:
    rep = ValidationReport()
    S, M, marks = params.S, params.M, params.ruler.marks
    add = rep.checks.append

    add(Check("ruler order", len(marks) == M + 1, f"{len(marks)} marks for M+1={M + 1}"))
    if verify_ruler(marks):
        add(Check("golomb ruler", True, f"{list(marks)}"))
    else:
        rep_d = repeated_differences(marks)
        why = f"repeated differences {rep_d}" if rep_d else "marks must start at 0 and strictly increase"
        add(Check("golomb ruler", False, why))

    if S < 2:
        add(Check("lpf condition", False, f"S={S} < 2"))
        return rep
    p = lpf(S)
    add(Check("lpf condition", M <= p, f"M={M}, lpf(S={S})={p}"))
    if len(marks) == M + 1:
        net = verify_net(params.perms, exhaustive_bound=net_bound)
        how = "sampled" if net.sampled else "exhaustive"
        add(Check("net property", net.ok, f"{how}{'; ' + net.detail if net.detail else ''}"))

    r_ok = params.r == derived_r(S, M)
    add(Check("r consistency", r_ok, f"r={params.r}, expected ceil(log2({params.n}))+1={derived_r(S, M)}"))
    add(Check("information columns", S - params.r >= 1, f"S-r={S - params.r}"))
    d_M = marks[-1] if marks else 0
    add(Check("window > d_M", params.W > d_M, f"W={params.W}, d_M={d_M}"))
    add(Check("frame > window", params.F > params.W, f"F={params.F}, W={params.W}"))
    add(Check("iterations", params.iterations >= 1, f"iterations={params.iterations}"))
    return rep


_FORCEABLE = {"lpf condition", "net property"}


def require_valid(params: CodeParams) -> CodeParams:
    """Raise ``InvalidParamsError`` unless ``params`` pass validation.

    With ``params.force`` set, lpf and net failures are tolerated.
    """
    rep = validate(params)
    bad = [c for c in rep.failures() if not (params.force and c.name in _FORCEABLE)]
    if bad:
        raise InvalidParamsError("; ".join(f"{c.name}: {c.detail}" for c in bad))
    return params


class BitCoord(NamedTuple):
    block: int
    row: int
    col: int


class CodewordSlot(NamedTuple):
    constraint: int
    row: int
    position: int


def locate(bit: BitCoord, params: CodeParams) -> list[CodewordSlot]:
    c, a, b = bit
    S, M = params.S, params.M
    if not (0 <= a < S and 0 <= b < S) or c < 0:
        raise IndexError(f"bit {bit} out of range for S={S}")
    out = []
    for k, d in enumerate(params.ruler.marks):
        i, j = params.perms.pi_inv(k, a, b)
        out.append(CodewordSlot(c + d, i, (M - k) * S + j))
    return out


def constraint_members(m: int, i: int, params: CodeParams) -> list[BitCoord]:
    S, M = params.S, params.M
    if m < params.d_M:
        raise ValueError(f"constraint {m} precedes the first constraint d_M={params.d_M}")
    if not 0 <= i < S:
        raise IndexError(f"row {i} out of range")
    out = []
    for p in range(params.n):
        seg, j = divmod(p, S)
        k = M - seg
        a, b = params.perms.pi(k, i, j)
        out.append(BitCoord(m - params.ruler.marks[k], a, b))
    return out


def slot_ids(params: CodeParams, n_blocks: int) -> np.ndarray:
    """Codeword id ``(m * S + i)`` of every slot of every bit in blocks ``[0, n_blocks)``.

    Returned shape is ``(n_blocks * S * S, M + 1)``.
    """
    S, M = params.S, params.M
    cells = np.arange(S * S)
    blocks = np.repeat(np.arange(n_blocks), S * S)
    cells = np.tile(cells, n_blocks)
    ids = np.empty((blocks.size, M + 1), dtype=np.int64)
    for k, d in enumerate(params.ruler.marks):
        rows = params.perms.row_of_cell[k][cells]
        ids[:, k] = (blocks + d) * S + rows
    return ids


def verify_intersection(params: CodeParams, block_span: int | None = None) -> bool:
    """True iff no two distinct component codewords share two or more bits.

    Counts, over all bits of ``block_span`` consecutive blocks, how often each
    unordered pair of codewords co-occurs on one bit.
    """
    if block_span is None:
        block_span = 2 * params.d_M + 1
    ids = slot_ids(params, block_span)
    M = params.M
    n_ids = int(ids.max()) + 1
    pairs = []
    for k in range(M + 1):
        for l in range(k + 1, M + 1):
            lo = np.minimum(ids[:, k], ids[:, l])
            hi = np.maximum(ids[:, k], ids[:, l])
            if np.any(lo == hi):
                return False
            pairs.append(lo * n_ids + hi)
    pairs = np.concatenate(pairs)
    return np.unique(pairs).size == pairs.size


def block_rate(params: CodeParams) -> Fraction:
    S, r, F, W = params.S, params.r, params.F, params.W
    if F <= W:
        raise ValueError("block rate needs F > W")
    return Fraction((S - r) * (F - W), S * (F - W) + W * r)


def nominal_rate(params: CodeParams) -> Fraction:
    return 1 - Fraction(params.r, params.S)


def window_mbits(params: CodeParams) -> float:
    return params.W * params.S ** 2 / 1e6
