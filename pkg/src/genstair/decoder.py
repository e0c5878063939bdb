"""Sliding-window syndrome-domain iterative decoding.

The window holds ``W`` consecutive blocks.  A constraint is tracked while
all its non-virtual member blocks lie inside the window; at the frame head
that includes constraints reading the virtual zero blocks.  Each window
position runs up to ``iterations`` passes, stopping early on a pass with no
flips, then the oldest block is emitted and the window moves by one block.

With ``params.warmup`` the window first slides in over the virtual history,
so frame blocks enter one at a time exactly as in steady state (positions
``-(W-1) .. -1`` emit nothing).  Without it decoding starts with the whole
first window at once, which leaves the head under-decoded and lets error
propagation start there.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .encoder import FrameLayout, deserialize, extract_info, kernel_geometry
from .geometry import CodeParams, require_valid



@dataclass
class DecodeStats:
    flips: int = 0
    uncorrectable: int = 0
    suppressed: int = 0
    iterations: int = 0
    unresolved: int = 0
    miscorrections: int | None = None

    @classmethod
    def from_kernel(cls, stats: np.ndarray, zero_truth: bool = False) -> "DecodeStats":
        return cls(
            flips=int(stats[K.FLIPS]),
            uncorrectable=int(stats[K.UNCORRECTABLE]),
            suppressed=int(stats[K.SUPPRESSED]),
            iterations=int(stats[K.ITERATIONS]),
            unresolved=int(stats[K.UNRESOLVED]),
            miscorrections=int(stats[K.ONES_SET]) if zero_truth else None,
        )


class WindowState:
    """Explicit window state for step-by-step decoding of one frame.

    ``blocks`` is the full frame array (virtual history included) and is
    modified in place as flips are applied.
    """

    def __init__(self, blocks: np.ndarray, params: CodeParams):
        lay = FrameLayout(params)
        S = params.S
        if blocks.shape != (lay.total_blocks, S, S):
            raise ValueError(f"expected blocks of shape {(lay.total_blocks, S, S)}, got {blocks.shape}")
        self.params = params
        self.blocks = blocks
        self.bits = blocks.reshape(lay.total_blocks, S * S)
        self.syn = np.zeros((lay.total_blocks, S), dtype=np.int64)
        self.stats = np.zeros(K.N_STATS, dtype=np.int64)
        self.position = first_position(params)
        self.lo, self.hi = K.window_bounds(self.position, params.d_M, params.F, params.W)
        self._geom = kernel_geometry(params)
        ruler, fwd, _, cols, _ = self._geom
        K.init_syndromes(self.bits, self.syn, self.lo, self.hi, S, params.M, ruler, fwd, cols)

    @property
    def tracked(self) -> range:
        return range(self.lo, self.hi + 1)

    @property
    def done(self) -> bool:
        return self.position >= self.params.F - self.params.W

    def iterate(self) -> int:
        p = self.params
        ruler, fwd, inv, cols, label_pos = self._geom
        return int(K.iterate(self.bits, self.syn, self.lo, self.hi, p.d_M, p.d_M + p.F - p.W,
                             p.S, p.M, p.r, ruler, fwd, inv, cols, label_pos, self.stats,
                             np.zeros(0, dtype=np.int64)))

    def run_position(self) -> int:
        total = 0
        for _ in range(self.params.iterations):
            n = self.iterate()
            total += n
            if n == 0:
                break
        return total

    @property
    def emitting(self) -> bool:
        """Whether the oldest window block is a frame block (not warm-up)."""
        return self.position >= 0

    def oldest_info(self) -> np.ndarray:
        p = self.params
        if not self.emitting:
            raise RuntimeError("window is still warming up; nothing to emit")
        return self.blocks[p.d_M + self.position, :, :p.info_cols].copy()

    def slide(self) -> None:
        p = self.params
        ruler, fwd, _, cols, _ = self._geom
        self.position += 1
        new_lo, new_hi = K.window_bounds(self.position, p.d_M, p.F, p.W)
        K.slide(self.bits, self.syn, self.lo, self.hi, new_lo, new_hi, p.S, p.M, ruler, fwd,
                cols, self.stats)
        self.lo, self.hi = new_lo, new_hi

    def recomputed_syndromes(self) -> np.ndarray:
        """Syndromes of the tracked constraints recomputed from the window bits."""
        p = self.params
        ruler, fwd, _, cols, _ = self._geom
        fresh = np.zeros_like(self.syn)
        K.init_syndromes(self.bits, fresh, self.lo, self.hi, p.S, p.M, ruler, fwd, cols)
        return fresh[self.lo:self.hi + 1]

    def tracked_syndromes(self) -> np.ndarray:
        return self.syn[self.lo:self.hi + 1]


def first_position(params: CodeParams) -> int:
    return -(params.W - 1) if params.warmup else 0


def init_window(blocks: np.ndarray, params: CodeParams) -> WindowState:
    return WindowState(blocks, params)


def decode_blocks(blocks: np.ndarray, params: CodeParams, zero_truth: bool = False) -> DecodeStats:
    """Decode a frame block array in place (fast path, single compiled call)."""
    S = params.S
    ruler, fwd, inv, cols, label_pos = kernel_geometry(params)
    stats = np.zeros(K.N_STATS, dtype=np.int64)
    K.decode_frame(blocks.reshape(blocks.shape[0], S * S), S, params.M, params.r, params.F,
                   params.W, params.iterations, ruler, fwd, inv, cols, label_pos, stats,
                   params.warmup)
    return DecodeStats.from_kernel(stats, zero_truth)


def decode_frame(received, params: CodeParams) -> tuple[np.ndarray, DecodeStats]:
    require_valid(params)
    blocks = deserialize(received, params)
    stats = decode_blocks(blocks, params)
    return extract_info(blocks, params), stats


@dataclass
class PatternReport:
    corrected: np.ndarray
    miscorrections: np.ndarray
    flips: np.ndarray = field(repr=False)

    @property
    def fraction(self) -> float:
        return float(self.corrected.mean()) if self.corrected.size else 1.0

    @property
    def failures(self) -> np.ndarray:
        return np.flatnonzero(~self.corrected)

    @property
    def unexplained_failures(self) -> np.ndarray:
        """Failed patterns without any miscorrection during their decoding."""
        return np.flatnonzero(~self.corrected & (self.miscorrections == 0))


def interior_block_span(params: CodeParams) -> int:
    """Number of blocks whose bits have every constraint tracked in one window position."""
    return params.W - 2 * params.d_M


def decode_interior_patterns(params: CodeParams, patterns, weights=None) -> PatternReport:
    """Decode error patterns placed on an all-zero codeword away from frame edges.

    ``patterns`` has shape ``(P, w, 3)`` of ``(block, row, col)``; blocks are
    relative to the first interior block and must lie in
    ``[0, interior_block_span(params))``.  Rows of ``weights`` shorter than
    ``w`` ignore trailing entries.
    """
    patterns = np.ascontiguousarray(patterns, dtype=np.int64)
    if patterns.ndim != 3 or patterns.shape[2] != 3:
        raise ValueError("patterns must have shape (P, w, 3)")
    P, w, _ = patterns.shape
    weights = np.full(P, w, dtype=np.int64) if weights is None else np.asarray(weights, np.int64)
    span = interior_block_span(params)
    if span <= 0:
        raise ValueError(f"window W={params.W} too small for interior patterns (d_M={params.d_M})")
    used = np.arange(w)[None, :] < weights[:, None]
    blk = patterns[:, :, 0][used]
    if blk.size and (blk.min() < 0 or blk.max() >= span):
        raise ValueError(f"pattern blocks must lie in [0, {span})")
    ruler, fwd, inv, cols, label_pos = kernel_geometry(params)
    corrected = np.zeros(P, dtype=np.bool_)
    mis = np.zeros(P, dtype=np.int64)
    flips = np.zeros(P, dtype=np.int64)
    K.decode_patterns(patterns, weights, params.S, params.M, params.r, params.W,
                      params.iterations, ruler, fwd, inv, cols, label_pos, corrected, mis, flips)
    return PatternReport(corrected, mis, flips)
