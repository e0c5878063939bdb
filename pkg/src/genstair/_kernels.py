"""Compiled hot loops.

All kernels take the frame as ``bits[block, cell]`` (uint8, cell = row*S+col)
and a per-constraint syndrome bank ``syn[m, row]``.  Geometry arrives as the
ruler marks, forward/inverse permutation tables and the component column table.
"""

import numba
import numpy as np

# stats slots
FLIPS = 0
UNCORRECTABLE = 1
SUPPRESSED = 2
ONES_SET = 3
ITERATIONS = 4
LOGGED = 5
UNRESOLVED = 6
N_STATS = 7


@numba.njit(cache=True, inline="always")
def _popcount(x):
    c = 0
    while x:
        x &= x - 1
        c += 1
    return c


@numba.njit(cache=True)
def row_syndrome(bits, m, i, S, M, ruler, fwd, cols):
    s = 0
    for k in range(M + 1):
        blk = m - ruler[k]
        base = (M - k) * S
        rowoff = i * S
        for j in range(S):
            if bits[blk, fwd[k, rowoff + j]]:
                s ^= cols[base + j]
    return s


@numba.njit(cache=True)
def encode_block(bits, m, S, M, r, ruler, fwd, cols):
    """Fill the parity columns of block ``m`` from its history and info columns."""
    k_info = S - r
    top = 1 << (r - 1)
    mask = top - 1
    for i in range(S):
        s = 0
        for k in range(1, M + 1):
            blk = m - ruler[k]
            base = (M - k) * S
            rowoff = i * S
            for j in range(S):
                if bits[blk, fwd[k, rowoff + j]]:
                    s ^= cols[base + j]
        base = M * S
        for j in range(k_info):
            if bits[m, i * S + j]:
                s ^= cols[base + j]
        label = s & mask
        for t in range(r - 1):
            bits[m, i * S + k_info + t] = (label >> t) & 1
        bits[m, i * S + S - 1] = ((s >> (r - 1)) ^ _popcount(label)) & 1


@numba.njit(cache=True)
def encode_range(bits, first, last, S, M, r, ruler, fwd, cols):
    for m in range(first, last):
        encode_block(bits, m, S, M, r, ruler, fwd, cols)


@numba.njit(cache=True)
def init_syndromes(bits, syn, lo, hi, S, M, ruler, fwd, cols):
    for m in range(lo, hi + 1):
        for i in range(S):
            syn[m, i] = row_syndrome(bits, m, i, S, M, ruler, fwd, cols)


@numba.njit(cache=True)
def iterate(bits, syn, lo, hi, pin_before, term_start, S, M, r, ruler, fwd, inv,
            cols, label_pos, stats, log):
    """One pass over tracked constraints ``lo..hi``, rows ascending; returns flips.

    Bits in blocks ``< pin_before`` and info columns of blocks ``>= term_start``
    are known zeros and never flipped.
    """
    top = 1 << (r - 1)
    mask = top - 1
    k_info = S - r
    flips = 0
    for m in range(lo, hi + 1):
        for i in range(S):
            s = syn[m, i]
            if s == 0:
                continue
            if (s & top) == 0:
                stats[UNCORRECTABLE] += 1
                continue
            p = label_pos[s & mask]
            if p < 0:
                stats[UNCORRECTABLE] += 1
                continue
            seg = p // S
            j = p - seg * S
            k = M - seg
            blk = m - ruler[k]
            cell = fwd[k, i * S + j]
            if blk < pin_before or (blk >= term_start and (cell % S) < k_info):
                stats[SUPPRESSED] += 1
                stats[UNCORRECTABLE] += 1
                continue
            if bits[blk, cell] == 0:
                stats[ONES_SET] += 1
            bits[blk, cell] ^= 1
            flips += 1
            if log.shape[0] > 0:
                n = stats[LOGGED]
                if n < log.shape[0]:
                    log[n] = blk * S * S + cell
                stats[LOGGED] = n + 1
            for kk in range(M + 1):
                mm = blk + ruler[kk]
                if mm < lo or mm > hi:
                    continue
                c2 = inv[kk, cell]
                ii = c2 // S
                jj = c2 - ii * S
                syn[mm, ii] ^= cols[(M - kk) * S + jj]
    stats[FLIPS] += flips
    stats[ITERATIONS] += 1
    return flips


@numba.njit(cache=True)
def window_bounds(pos, d_M, F, W):
    """Tracked constraint range when the oldest window block is frame block ``pos``."""
    g = d_M + pos
    hi = min(g + W - 1, d_M + F - 1)
    lo = d_M if pos <= 0 else g + d_M
    return lo, hi


@numba.njit(cache=True)
def slide(bits, syn, lo, hi, new_lo, new_hi, S, M, ruler, fwd, cols, stats):
    for m in range(lo, min(new_lo, hi + 1)):
        for i in range(S):
            if syn[m, i] != 0:
                stats[UNRESOLVED] += 1
            syn[m, i] = 0
    for m in range(max(hi + 1, new_lo), new_hi + 1):
        for i in range(S):
            syn[m, i] = row_syndrome(bits, m, i, S, M, ruler, fwd, cols)


@numba.njit(cache=True)
def decode_frame(bits, S, M, r, F, W, iterations, ruler, fwd, inv, cols, label_pos, stats,
                 warmup):
    """Sliding-window decode of a whole frame in place.

    Stops once the last information block has been emitted; later window
    positions only touch terminated blocks.
    """
    d_M = ruler[M]
    syn = np.zeros((d_M + F, S), dtype=np.int64)
    log = np.zeros(0, dtype=np.int64)
    first = -(W - 1) if warmup else 0
    lo, hi = window_bounds(first, d_M, F, W)
    init_syndromes(bits, syn, lo, hi, S, M, ruler, fwd, cols)
    term_start = d_M + F - W
    for pos in range(first, F - W):
        if pos > first:
            new_lo, new_hi = window_bounds(pos, d_M, F, W)
            slide(bits, syn, lo, hi, new_lo, new_hi, S, M, ruler, fwd, cols, stats)
            lo, hi = new_lo, new_hi
        for _ in range(iterations):
            if iterate(bits, syn, lo, hi, d_M, term_start, S, M, r, ruler, fwd, inv,
                       cols, label_pos, stats, log) == 0:
                break
    for m in range(lo, hi + 1):
        for i in range(S):
            if syn[m, i] != 0:
                stats[UNRESOLVED] += 1


@numba.njit(cache=True)
def decode_patterns(patterns, weights, S, M, r, W, iterations, ruler, fwd, inv, cols,
                    label_pos, corrected, miscorrections, flips_out):
    """Decode isolated error patterns on an all-zero background.

    ``patterns[p, e] = (block, row, col)`` with block relative to the first
    interior block; a single window position is used in which every
    constraint of every interior bit is tracked.
    """
    d_M = ruler[M]
    nb = d_M + W
    lo = 2 * d_M
    hi = d_M + W - 1
    base = 2 * d_M
    bits = np.zeros((nb, S * S), dtype=np.uint8)
    syn = np.zeros((nb + d_M, S), dtype=np.int64)
    log = np.zeros(4096, dtype=np.int64)
    stats = np.zeros(N_STATS, dtype=np.int64)
    for p in range(patterns.shape[0]):
        w = weights[p]
        for e in range(w):
            blk = base + patterns[p, e, 0]
            cell = patterns[p, e, 1] * S + patterns[p, e, 2]
            bits[blk, cell] ^= 1
            for kk in range(M + 1):
                c2 = inv[kk, cell]
                ii = c2 // S
                syn[blk + ruler[kk], ii] ^= cols[(M - kk) * S + (c2 - ii * S)]
        stats[:] = 0
        for _ in range(iterations):
            if iterate(bits, syn, lo, hi, 0, nb + 1, S, M, r, ruler, fwd, inv,
                       cols, label_pos, stats, log) == 0:
                break
        ok = True
        for e in range(w):
            blk = base + patterns[p, e, 0]
            cell = patterns[p, e, 1] * S + patterns[p, e, 2]
            if bits[blk, cell]:
                ok = False
                bits[blk, cell] = 0
                for kk in range(M + 1):
                    syn[blk + ruler[kk], inv[kk, cell] // S] = 0
        n_log = min(stats[LOGGED], log.shape[0])
        for t in range(n_log):
            blk = log[t] // (S * S)
            cell = log[t] - blk * S * S
            if bits[blk, cell]:
                ok = False
                bits[blk, cell] = 0
            for kk in range(M + 1):
                syn[blk + ruler[kk], inv[kk, cell] // S] = 0
        if stats[LOGGED] > log.shape[0]:
            # log overflow: fall back to a full reset
            bits[:, :] = 0
            syn[:, :] = 0
            ok = False
        corrected[p] = ok
        miscorrections[p] = stats[ONES_SET]
        flips_out[p] = stats[FLIPS]
