"""Acceptance suite: one verdict line per criterion, printed in the terminal summary.

Criteria 6 and 7 run the full waterfall sweep twice (about 12 minutes each on
one core); everything else finishes in a few minutes.
"""

import math
import time
from pathlib import Path

import numpy as np
import pytest

from genstair.channel import gap_to_crossover
from genstair.config import load_config
from genstair.decoder import (
    WindowState,
    decode_frame,
    decode_interior_patterns,
    interior_block_span,
)
from genstair.encoder import FrameLayout, encode_blocks, place_info, serialize, tx_index_to_cell
from genstair.geometry import (
    CodeParams,
    block_rate,
    derived_r,
    nominal_rate,
    validate,
    verify_intersection,
    window_mbits,
)
from genstair.nets import SUPPORTED_ORDERS, PermKind, build_perm_family, optimal_ruler, verify_net, verify_ruler
from genstair.sim import measure_throughput, run_sweep
from reference import ROWS, params as row_params

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def test_criterion_1_derived_parameters(report):
    t0 = time.perf_counter()
    bad = []
    for row in ROWS:
        p = row_params(row)
        got = (derived_r(row.S, row.M), f"{float(block_rate(p)):.5f}",
               f"{window_mbits(p):.3f}", f"{float(nominal_rate(p)):.5f}")
        want = (row.r, row.rate, row.w_mbits, row.nominal)
        if got != want:
            bad.append((row.S, got, want))
    dt = time.perf_counter() - t0
    ok = not bad and dt < 1
    report(1, ok, f"r, R, W Mbits and R_nominal for 5 rows ({dt:.3f} s)" + (f" mismatches {bad}" if bad else ""))
    assert ok


def test_criterion_2_channel(report):
    t0 = time.perf_counter()
    errs = [gap_to_crossover(float(r.rate), r.gap_db) / r.input_ber - 1 for r in ROWS]
    worst = max(abs(e) for e in errs)
    dt = time.perf_counter() - t0
    ok = worst <= 0.01 and dt < 1
    report(2, ok, f"worst relative deviation {worst:.4%} over 5 (R, gap) pairs ({dt:.3f} s)")
    assert ok


def test_criterion_3_structure(report):
    t0 = time.perf_counter()
    checks = {}
    checks["table rulers golomb"] = all(verify_ruler(optimal_ruler(o).marks) for o in SUPPORTED_ORDERS)
    nets = []
    for S, M in [(7, 3), (11, 4), (13, 4), (47, 4)]:
        for kind in PermKind:
            res = verify_net(build_perm_family(S, M, kind), exhaustive_bound=10**6)
            nets.append(bool(res) and not res.sampled)
    checks["nets exhaustive"] = all(nets)
    inv_ok = True
    for S in range(2, 65):
        M = min(S, 8)
        fam = build_perm_family(S, M, PermKind.INVOLUTION)
        for k in range(M + 1):
            inv_ok &= bool(np.array_equal(fam.forward[k][fam.forward[k]], np.arange(S * S)))
    checks["involutions S<=64"] = inv_ok
    checks["intersection (7,3)"] = verify_intersection(CodeParams(7, 3, 40, 20, ruler=(0, 1, 4, 6)))
    checks["intersection (11,4)"] = verify_intersection(CodeParams(11, 4, 60, 30, ruler=(0, 1, 4, 9, 11)))
    neg_ruler = CodeParams(7, 3, 40, 20, ruler=(0, 1, 2, 3))
    checks["non-golomb rejected"] = (not validate(neg_ruler).ok) and not verify_intersection(neg_ruler)
    neg_lpf = CodeParams(10, 3, 40, 20, force=True)
    checks["M > lpf rejected"] = (not validate(neg_lpf)["lpf condition"].ok
                                  and not verify_net(neg_lpf.perms)
                                  and not verify_intersection(neg_lpf))
    dt = time.perf_counter() - t0
    ok = all(checks.values()) and dt < 30
    failed = [k for k, v in checks.items() if not v]
    report(3, ok, f"{len(checks)} structural checks ({dt:.2f} s)" + (f" failed: {failed}" if failed else ""))
    assert ok


def _syndromes_by_matrix(blocks, p):
    """Full recompute: assemble every codeword from permuted blocks and apply H."""
    H = p.code.parity_check_matrix.astype(np.float32)
    d = p.ruler.marks
    for m in range(p.d_M, p.d_M + p.F):
        parts = [p.perms.apply(k, blocks[m - d[k]]) for k in range(p.M, 0, -1)]
        C = np.concatenate(parts + [blocks[m]], axis=1).astype(np.float32)
        if np.any((C @ H.T).astype(np.int64) % 2):
            return False
    return True


def test_criterion_4_encode_decode(report):
    t0 = time.perf_counter()
    results = []
    for n, row in enumerate(ROWS):
        p = row_params(row, F=row.W + 10)
        lay = FrameLayout(p)
        rng = np.random.default_rng(100 + n)
        info = rng.integers(0, 2, lay.info_bits_per_frame, dtype=np.uint8)
        blocks = encode_blocks(place_info(info, p), p)
        zero = _syndromes_by_matrix(blocks, p)
        out, st = decode_frame(serialize(blocks, p), p)
        exact = bool(np.array_equal(out, info)) and st.flips == 0

        noisy = blocks.copy()
        hit = np.flatnonzero(rng.random(lay.transmitted_bits_per_frame) < row.input_ber)
        b, c = tx_index_to_cell(hit, p)
        noisy.reshape(noisy.shape[0], -1)[b, c] ^= 1
        ws = WindowState(noisy, p)
        incremental = True
        while not ws.done:
            ws.run_position()
            incremental &= bool(np.array_equal(ws.tracked_syndromes(), ws.recomputed_syndromes()))
            ws.slide()
            incremental &= bool(np.array_equal(ws.tracked_syndromes(), ws.recomputed_syndromes()))
        results.append((row.S, zero, exact, incremental))
    dt = time.perf_counter() - t0
    ok = all(all(r[1:]) for r in results) and dt < 120
    bad = [r for r in results if not all(r[1:])]
    report(4, ok, f"zero syndromes, noiseless round trip and incremental syndromes on 5 configs, "
                  f"F=W+10 ({dt:.1f} s)" + (f" failed: {bad}" if bad else ""))
    assert ok


# criterion 5 pattern generators; bits are (interior block, row, col)

STALL = CodeParams(47, 4, 912, 48, 6)


def _geom(p):
    return p.S, p.M, np.array(p.ruler.marks), p.perms.forward, p.perms.inverse


def _weight1(p):
    S, span = p.S, interior_block_span(p)
    b, cell = np.divmod(np.arange(span * S * S), S * S)
    return np.stack([b, cell // S, cell % S], -1)[:, None, :]


def _weight2_interacting(p, c0):
    """Every pair with its first bit in block c0 and its second bit on a shared codeword."""
    S, M, d, fwd, inv = _geom(p)
    n = (M + 1) * S
    cells = np.arange(S * S)
    for k in range(M + 1):
        i, j0 = np.divmod(inv[k, cells], S)
        own = (M - k) * S + j0
        pos = np.arange(n)
        k2, j = M - pos // S, pos % S
        blk = c0 + d[k] - d[k2]
        part = fwd[k2[None, :], i[:, None] * S + j[None, :]]
        keep = pos[None, :] != own[:, None]
        first = np.broadcast_to(cells[:, None], part.shape)[keep]
        second, sblk = part[keep], np.broadcast_to(blk[None, :], part.shape)[keep]
        a = np.stack([np.full(first.size, c0), first // S, first % S], -1)
        b = np.stack([sblk, second // S, second % S], -1)
        yield np.stack([a, b], 1)


def _uniform(p, rng, count, w):
    S, span = p.S, interior_block_span(p)
    out, need = [], count
    while need > 0:
        flat = rng.integers(0, span * S * S, (need + need // 10 + 10, w))
        flat = flat[(np.diff(np.sort(flat, 1), axis=1) > 0).all(1)][:need]
        out.append(flat)
        need -= len(flat)
    b, cell = np.divmod(np.concatenate(out), S * S)
    return np.stack([b, cell // S, cell % S], -1)


def _clustered(p, rng, count, w):
    """Each new bit shares a codeword with a randomly chosen earlier bit."""
    S, M, d, fwd, inv = _geom(p)
    span = interior_block_span(p)
    out = []
    need = count
    while need > 0:
        k = 3 * need
        bits = [np.stack([rng.integers(0, span, k), rng.integers(0, S * S, k)], 1)]
        for t in range(1, w):
            src = np.stack(bits, 1)[np.arange(k), rng.integers(0, t, k)]
            ka = rng.integers(0, M + 1, k)
            m = src[:, 0] + d[ka]
            i = inv[ka, src[:, 1]] // S
            kb, j = rng.integers(0, M + 1, k), rng.integers(0, S, k)
            bits.append(np.stack([m - d[kb], fwd[kb, i * S + j]], 1))
        arr = np.stack(bits, 1)
        key = arr[:, :, 0] * S * S + arr[:, :, 1]
        ok = (arr[:, :, 0] >= 0).all(1) & (arr[:, :, 0] < span).all(1)
        ok &= (np.diff(np.sort(key, 1), axis=1) > 0).all(1)
        arr = arr[ok][:need]
        out.append(arr)
        need -= len(arr)
    arr = np.concatenate(out)
    return np.stack([arr[:, :, 0], arr[:, :, 1] // S, arr[:, :, 1] % S], -1)


def _same_codeword(p, rng, count, w):
    """w errors on one component codeword, the case that provokes miscorrection."""
    S, M, d, fwd, _ = _geom(p)
    span = interior_block_span(p)
    m = rng.integers(d[-1], span, count)
    i = rng.integers(0, S, count)
    pos = np.argsort(rng.random((count, (M + 1) * S)), 1)[:, :w]
    k, j = M - pos // S, pos % S
    cell = fwd[k, i[:, None] * S + j]
    return np.stack([m[:, None] - d[k], cell // S, cell % S], -1)


def test_criterion_5_stall_weight(report):
    p = STALL
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    sets = {"weight-1 exhaustive": [decode_interior_patterns(p, _weight1(p))]}
    sets["weight-2 interacting exhaustive"] = [decode_interior_patterns(p, c)
                                               for c in _weight2_interacting(p, p.d_M)]
    sets["weight-2 random"] = [decode_interior_patterns(p, _uniform(p, rng, 100_000, 2))]
    sets["weight-5 uniform"] = [decode_interior_patterns(p, _uniform(p, rng, 100_000, 5))]
    sets["weight-5 clustered"] = [decode_interior_patterns(p, _clustered(p, rng, 100_000, 5))]
    sets["weight-5 one codeword"] = [decode_interior_patterns(p, _same_codeword(p, rng, 100_000, w))
                                     for w in (3, 4, 5)]
    parts, ok = [], True
    for name, reps in sets.items():
        total = sum(r.corrected.size for r in reps)
        good = sum(int(r.corrected.sum()) for r in reps)
        unexplained = sum(r.unexplained_failures.size for r in reps)
        mis = sum(int((r.miscorrections > 0).sum()) for r in reps)
        weight2 = name.startswith("weight-1") or name.startswith("weight-2")
        ok &= good == total if weight2 else unexplained == 0
        parts.append(f"{name} {good}/{total} ({mis} with miscorrections)")
    dt = time.perf_counter() - t0
    ok &= dt < 600
    report(5, ok, "; ".join(parts) + f" ({dt:.0f} s)")
    assert ok


@pytest.fixture(scope="module")
def waterfall():
    cfg = load_config(CONFIGS / "waterfall.toml")
    t0 = time.perf_counter()
    one = run_sweep(cfg.sweep, workers=1)
    t1 = time.perf_counter()
    two = run_sweep(cfg.sweep, workers=2)
    t2 = time.perf_counter()
    return cfg, one, two, (t1 - t0, t2 - t1)


def _disjoint_below(lo_pt, hi_pt):
    """CI of the lower-p point lies entirely below the CI of the higher-p point."""
    return lo_pt.ber < hi_pt.ber and lo_pt.ci[1] < hi_pt.ci[0]


@pytest.mark.slow
def test_criterion_6_waterfall(report, waterfall):
    cfg, res, _, (secs, _) = waterfall
    pts = res.points
    op = next(pt for pt in pts if pt.p == 1.05e-2)
    op_ok = op.info_bits >= 10**9 and op.ber < 1e-6
    ordered = sorted(pts, key=lambda pt: -pt.p)
    strict = all(_disjoint_below(b, a) for a, b in zip(ordered, ordered[1:]))
    # lenient reading: a non-decrease is tolerated only where the intervals overlap
    lenient = all(b.ber < a.ber or b.ci[1] >= a.ci[0] for a, b in zip(ordered, ordered[1:]))
    desc = ", ".join(f"p={pt.p:g}: {pt.bit_errors}/{pt.info_bits} BER {pt.ber:.3g} "
                     f"CI [{pt.ci[0]:.2g}, {pt.ci[1]:.2g}]" for pt in ordered)
    ok = op_ok and strict
    report(6, ok, f"BER<1e-6 at 1.05e-2 over >=1e9 bits: {'yes' if op_ok else 'no'}; strictly decreasing "
                  f"with disjoint CIs: {'yes' if strict else 'no'} (overlap-tolerant reading: "
                  f"{'yes' if lenient else 'no'}); {desc} ({secs:.0f} s)")
    assert op_ok, "operating point BER"
    assert strict, "BER not strictly decreasing with disjoint intervals across the sweep"


@pytest.mark.slow
def test_criterion_7_determinism(report, waterfall):
    _, one, two, (a, b) = waterfall
    same = one.to_csv(timing=False) == two.to_csv(timing=False)
    report(7, same, f"workers=1 vs workers=2 CSV (timing columns blank) byte-identical: "
                    f"{'yes' if same else 'no'} ({a:.0f} s + {b:.0f} s)")
    assert same


def test_criterion_8_throughput(report):
    p = row_params(ROWS[4])
    bps = measure_throughput(p, 1.05e-2, frames=8)
    report(8, True, f"{bps / 1e6:.1f} Mbit/s per core simulated (encode, channel, decode) on the S=47 "
                    f"config at p=1.05e-2; {bps / 3e9:.2%} of a nominal 3 Gb/s/core hardware-style "
                    f"decoder (non-binding)")
    assert math.isfinite(bps) and bps > 0
