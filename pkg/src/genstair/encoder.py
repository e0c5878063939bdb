"""Recursive frame encoder with termination.

A frame holds ``F`` blocks after ``d_M`` virtual all-zero blocks.  The first
``F - W`` blocks carry ``S x (S - r)`` information bits; the last ``W`` have a
zero information region and only their parity columns are transmitted.

Bits are serialized column-major: a full block sends columns ``0..S-1``, a
terminated block sends columns ``S-r..S-1``, each column top to bottom.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _kernels as K
from .geometry import CodeParams, require_valid


def kernel_geometry(params: CodeParams):
    """Arrays consumed by the compiled kernels: ruler, fwd, inv, cols, label_pos."""
    return (
        params.ruler_array,
        params.perms.forward,
        params.perms.inverse,
        params.code.columns,
        params.code.label_pos,
    )


@dataclass(frozen=True)
class FrameLayout:
    params: CodeParams

    @property
    def info_blocks(self) -> int:
        return self.params.F - self.params.W

    @property
    def info_bits_per_block(self) -> int:
        return self.params.S * self.params.info_cols

    @property
    def info_bits_per_frame(self) -> int:
        return self.info_bits_per_block * self.info_blocks

    @property
    def transmitted_bits_per_frame(self) -> int:
        p = self.params
        return p.S * (p.S * (p.F - p.W) + p.W * p.r)

    @property
    def total_blocks(self) -> int:
        """Virtual history plus frame blocks."""
        return self.params.d_M + self.params.F

    @cached_property
    def terminated(self) -> np.ndarray:
        """``terminated[b]`` for frame block ``b``: only parity is transmitted."""
        t = np.zeros(self.params.F, dtype=bool)
        t[self.info_blocks:] = True
        return t

    def empty_blocks(self) -> np.ndarray:
        S = self.params.S
        return np.zeros((self.total_blocks, S, S), dtype=np.uint8)


def place_info(info, params: CodeParams, blocks: np.ndarray | None = None) -> np.ndarray:
    """Scatter frame information bits into the info columns of the frame blocks."""
    lay = FrameLayout(params)
    info = np.asarray(info, dtype=np.uint8)
    if info.shape != (lay.info_bits_per_frame,):
        raise ValueError(f"expected {lay.info_bits_per_frame} info bits, got shape {info.shape}")
    if blocks is None:
        blocks = lay.empty_blocks()
    S, k, d_M = params.S, params.info_cols, params.d_M
    chunk = info.reshape(lay.info_blocks, k, S)  # (block, column, row)
    blocks[d_M:d_M + lay.info_blocks, :, :k] = chunk.transpose(0, 2, 1)
    return blocks


def extract_info(blocks: np.ndarray, params: CodeParams) -> np.ndarray:
    lay = FrameLayout(params)
    d_M, k = params.d_M, params.info_cols
    part = blocks[d_M:d_M + lay.info_blocks, :, :k]
    return np.ascontiguousarray(part.transpose(0, 2, 1)).reshape(-1)


def encode_blocks(blocks: np.ndarray, params: CodeParams) -> np.ndarray:
    """Fill parity columns of every frame block in place (info already placed)."""
    ruler, fwd, _, cols, _ = kernel_geometry(params)
    flat = blocks.reshape(blocks.shape[0], -1)
    K.encode_range(flat, params.d_M, params.d_M + params.F, params.S, params.M, params.r,
                   ruler, fwd, cols)
    return blocks


def serialize(blocks: np.ndarray, params: CodeParams) -> np.ndarray:
    lay = FrameLayout(params)
    d_M, S, r = params.d_M, params.S, params.r
    full = blocks[d_M:d_M + lay.info_blocks]
    term = blocks[d_M + lay.info_blocks:d_M + params.F, :, S - r:]
    return np.concatenate([
        full.transpose(0, 2, 1).reshape(-1),
        term.transpose(0, 2, 1).reshape(-1),
    ])


def deserialize(bits, params: CodeParams) -> np.ndarray:
    """Inverse of ``serialize``: frame blocks with zero history and zero terminated info."""
    lay = FrameLayout(params)
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.shape != (lay.transmitted_bits_per_frame,):
        raise ValueError(
            f"expected {lay.transmitted_bits_per_frame} transmitted bits, got shape {bits.shape}")
    S, r, d_M = params.S, params.r, params.d_M
    nf = lay.info_blocks * S * S
    blocks = lay.empty_blocks()
    blocks[d_M:d_M + lay.info_blocks] = bits[:nf].reshape(lay.info_blocks, S, S).transpose(0, 2, 1)
    blocks[d_M + lay.info_blocks:, :, S - r:] = bits[nf:].reshape(params.W, r, S).transpose(0, 2, 1)
    return blocks


def tx_index_to_cell(idx, params: CodeParams) -> tuple[np.ndarray, np.ndarray]:
    """Map transmitted-bit indices to ``(stream block, flat cell)`` pairs."""
    idx = np.asarray(idx, dtype=np.int64)
    S, r, d_M = params.S, params.r, params.d_M
    lay = FrameLayout(params)
    nf = lay.info_blocks * S * S
    full = idx < nf
    blk = np.empty_like(idx)
    col = np.empty_like(idx)
    row = np.empty_like(idx)
    blk[full], rem = np.divmod(idx[full], S * S)
    col[full], row[full] = np.divmod(rem, S)
    t = idx[~full] - nf
    tb, rem = np.divmod(t, S * r)
    blk[~full] = tb + lay.info_blocks
    c, row[~full] = np.divmod(rem, S)
    col[~full] = c + (S - r)
    return blk + d_M, row * S + col


def encode_frame(info, params: CodeParams) -> np.ndarray:
    require_valid(params)
    blocks = place_info(info, params)
    encode_blocks(blocks, params)
    return serialize(blocks, params)


class EncoderState:
    """Ring of the last ``d_M + 1`` blocks for block-at-a-time encoding.

    Starts from the all-zero initialization blocks; ``index`` counts blocks
    encoded so far.
    """

    def __init__(self, params: CodeParams):
        self.params = params
        S = params.S
        self.history = np.zeros((params.d_M + 1, S, S), dtype=np.uint8)
        self.index = 0

    def block(self, back: int) -> np.ndarray:
        """Block encoded ``back`` steps ago (``back=1`` is the latest)."""
        return self.history[self.params.d_M + 1 - back]

    def reset(self):
        self.history[:] = 0
        self.index = 0


def encode_block(info, state: EncoderState) -> np.ndarray:
    """Encode one block; ``info`` is ``S x (S-r)`` or ``None`` for a terminated block."""
    p = state.params
    S, k, d_M = p.S, p.info_cols, p.d_M
    buf = np.roll(state.history, -1, axis=0)
    buf[d_M] = 0
    if info is not None:
        info = np.asarray(info, dtype=np.uint8)
        if info.shape != (S, k):
            raise ValueError(f"info block must be {S}x{k}, got {info.shape}")
        buf[d_M, :, :k] = info
    ruler, fwd, _, cols, _ = kernel_geometry(p)
    K.encode_block(buf.reshape(d_M + 1, S * S), d_M, S, p.M, p.r, ruler, fwd, cols)
    state.history = buf
    state.index += 1
    return buf[d_M].copy()
