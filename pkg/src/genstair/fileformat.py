"""Packed binary container for encoded frames.

Layout: the transmitted bits of all frames back to back, packed MSB-first and
zero-padded to a byte boundary, followed by a 16-byte big-endian trailer
``magic (4s) | frame count (u64) | info pad bits (u32)``.  The last frame's
information is zero-padded to a whole frame; the pad length is recorded so
decoding returns exactly the original bytes.
"""

from __future__ import annotations

import struct

import numpy as np

from .decoder import DecodeStats, decode_frame
from .encoder import FrameLayout, encode_frame
from .geometry import CodeParams, require_valid

MAGIC = b"GSC1"
TRAILER = struct.Struct(">4sQI")
assert TRAILER.size == 16


class FormatError(ValueError):
    pass


def encoded_size(n_frames: int, params: CodeParams) -> int:
    bits = n_frames * FrameLayout(params).transmitted_bits_per_frame
    return (bits + 7) // 8 + TRAILER.size


def encode_bytes(data: bytes, params: CodeParams) -> bytes:
    require_valid(params)
    lay = FrameLayout(params)
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8))
    per = lay.info_bits_per_frame
    n_frames = -(-bits.size // per)
    pad = n_frames * per - bits.size
    bits = np.concatenate([bits, np.zeros(pad, dtype=np.uint8)])
    tx = [encode_frame(bits[f * per:(f + 1) * per], params) for f in range(n_frames)]
    body = np.packbits(np.concatenate(tx)) if tx else np.zeros(0, np.uint8)
    return body.tobytes() + TRAILER.pack(MAGIC, n_frames, pad)


def read_trailer(blob: bytes, params: CodeParams) -> tuple[int, int]:
    if len(blob) < TRAILER.size:
        raise FormatError(f"file too short ({len(blob)} bytes) for the {TRAILER.size}-byte trailer")
    magic, n_frames, pad = TRAILER.unpack(blob[-TRAILER.size:])
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
    want = encoded_size(n_frames, params)
    if len(blob) != want:
        raise FormatError(f"size {len(blob)} bytes does not match {n_frames} frames ({want} bytes expected); "
                          "truncated file or wrong code parameters")
    per = FrameLayout(params).info_bits_per_frame
    if pad >= max(per, 1) or (n_frames * per - pad) % 8:
        raise FormatError(f"invalid pad length {pad}")
    return n_frames, pad


def decode_bytes(blob: bytes, params: CodeParams) -> tuple[bytes, list[DecodeStats]]:
    require_valid(params)
    n_frames, pad = read_trailer(blob, params)
    lay = FrameLayout(params)
    tx = lay.transmitted_bits_per_frame
    bits = np.unpackbits(np.frombuffer(blob[:-TRAILER.size], dtype=np.uint8))
    info, stats = [], []
    for f in range(n_frames):
        out, st = decode_frame(bits[f * tx:(f + 1) * tx], params)
        info.append(out)
        stats.append(st)
    if not info:
        return b"", stats
    allbits = np.concatenate(info)
    if pad:
        allbits = allbits[:-pad]
    return np.packbits(allbits).tobytes(), stats
