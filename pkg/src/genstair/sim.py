"""Deterministic Monte-Carlo BER simulation over a BSC.

Every frame draws its randomness from a Philox counter-based generator keyed
by ``(base_seed, point index)`` with the frame index in the counter, so a
point's result depends only on the seed and not on how frames are scheduled
across workers.  Stop rules are applied to frames in index order.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .channel import AboveLimitError, ChannelPoint
from .decoder import decode_blocks
from .encoder import FrameLayout, encode_blocks, extract_info, place_info, tx_index_to_cell
from .geometry import CodeParams, block_rate, require_valid

log = logging.getLogger(__name__)

CSV_COLUMNS = [
    "S", "M", "r", "F", "W", "iterations", "rate", "gap_db", "crossover_p", "info_bits",
    "bit_errors", "frames", "frame_errors", "ber", "ci_low", "ci_high", "seconds", "bits_per_sec",
]

# frames handed to a worker at a time; fixed so scheduling never changes results
CHUNK_FRAMES = 4

NOISE_STREAM = 0
INFO_STREAM = 1


@dataclass(frozen=True)
class Point:
    """A channel operating point given either as crossover ``p`` or as ``gap_db``."""
    p: float | None = None
    gap_db: float | None = None

    def __post_init__(self):
        if (self.p is None) == (self.gap_db is None):
            raise ValueError("a point needs exactly one of p or gap_db")

    def resolve(self, rate: float) -> tuple[float, float | None]:
        """Return ``(p, gap_db)``; gap is None when p is at or above the limit."""
        if self.gap_db is not None:
            cp = ChannelPoint.from_gap(rate, self.gap_db)
            return cp.p, cp.gap_db
        if self.p == 0:
            return 0.0, None
        try:
            return self.p, ChannelPoint.from_crossover(rate, self.p).gap_db
        except AboveLimitError:
            return self.p, None


@dataclass
class SweepSpec:
    params: CodeParams
    points: list[Point]
    max_frames: int | None = None
    max_bits: int | None = 10**10
    min_bit_errors: int | None = 100
    base_seed: int = 0
    all_zero: bool = False

    def __post_init__(self):
        if self.max_frames is None and self.max_bits is None and self.min_bit_errors is None:
            raise ValueError("at least one stop rule must be finite")


@dataclass
class PointResult:
    index: int
    p: float
    gap_db: float | None
    info_bits: int = 0
    bit_errors: int = 0
    frames: int = 0
    frame_errors: int = 0
    seconds: float = 0.0
    flips: int = 0
    error: str | None = None

    @property
    def ber(self) -> float:
        return self.bit_errors / self.info_bits if self.info_bits else math.nan

    @property
    def ci(self) -> tuple[float, float]:
        return confidence_interval(self.bit_errors, self.info_bits)

    @property
    def bits_per_sec(self) -> float:
        return self.info_bits / self.seconds if self.seconds > 0 else math.nan

    @property
    def error_free_bits(self) -> int:
        return self.info_bits if self.bit_errors == 0 else 0


@dataclass
class SimResult:
    params: CodeParams
    points: list[PointResult] = field(default_factory=list)

    def csv_rows(self, timing: bool = True) -> list[list[str]]:
        p = self.params
        rate = float(block_rate(p))
        rows = []
        for pt in self.points:
            if pt.error is not None:
                continue
            lo, hi = pt.ci
            rows.append([
                str(p.S), str(p.M), str(p.r), str(p.F), str(p.W), str(p.iterations),
                repr(rate), "" if pt.gap_db is None else repr(pt.gap_db), repr(pt.p),
                str(pt.info_bits), str(pt.bit_errors), str(pt.frames), str(pt.frame_errors),
                repr(pt.ber), repr(lo), repr(hi),
                repr(pt.seconds) if timing else "",
                repr(pt.bits_per_sec) if timing else "",
            ])
        return rows

    def to_csv(self, timing: bool = True) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        w.writerows(self.csv_rows(timing))
        return buf.getvalue()


def confidence_interval(errors: int, n: int, z: float = 1.959963984540054) -> tuple[float, float]:
    """95% interval: normal approximation, or the exact one-sided bound at zero errors."""
    if n <= 0:
        return math.nan, math.nan
    if errors == 0:
        return 0.0, 1.0 - 0.025 ** (1.0 / n)
    ber = errors / n
    half = z * math.sqrt(ber * (1.0 - ber) / n)
    return max(0.0, ber - half), min(1.0, ber + half)


def point_key(base_seed: int, index: int) -> np.ndarray:
    return np.random.SeedSequence([int(base_seed), int(index)]).generate_state(2, dtype=np.uint64)


def frame_rng(key: np.ndarray, frame: int, stream: int) -> np.random.Generator:
    counter = np.array([0, 0, stream, frame], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


def bsc_flips(rng: np.random.Generator, n: int, p: float) -> np.ndarray:
    """Sorted indices in ``[0, n)`` flipped independently with probability ``p``."""
    if p <= 0.0 or n == 0:
        return np.zeros(0, dtype=np.int64)
    if p >= 0.1:
        return np.flatnonzero(rng.random(n) < p)
    parts = []
    pos = -1
    while True:
        m = int(n * p + 6.0 * math.sqrt(n * p) + 64)
        gaps = rng.geometric(p, size=m)
        idx = pos + np.cumsum(gaps)
        parts.append(idx)
        pos = int(idx[-1])
        if pos >= n:
            break
    idx = np.concatenate(parts)
    return idx[idx < n]


def random_bits(rng: np.random.Generator, n: int) -> np.ndarray:
    raw = rng.integers(0, 256, size=(n + 7) // 8, dtype=np.uint8)
    return np.unpackbits(raw)[:n]


@dataclass
class FrameOutcome:
    bit_errors: int
    flips: int


def simulate_frame(params: CodeParams, p: float, key: np.ndarray, frame: int,
                   all_zero: bool = False, flip_script: Callable[[int], np.ndarray] | None = None,
                   decode: bool = True) -> FrameOutcome:
    lay = FrameLayout(params)
    if all_zero:
        blocks = lay.empty_blocks()
        truth = None
    else:
        truth = random_bits(frame_rng(key, frame, INFO_STREAM), lay.info_bits_per_frame)
        blocks = place_info(truth, params)
        encode_blocks(blocks, params)
    if flip_script is not None:
        flips = np.unique(np.asarray(flip_script(frame), dtype=np.int64))
    else:
        flips = bsc_flips(frame_rng(key, frame, NOISE_STREAM), lay.transmitted_bits_per_frame, p)
    blk, cell = tx_index_to_cell(flips, params)
    flat = blocks.reshape(blocks.shape[0], -1)
    flat[blk, cell] ^= 1
    n_flips = 0
    if decode:
        n_flips = decode_blocks(blocks, params).flips
    out = extract_info(blocks, params)
    errors = int(np.count_nonzero(out)) if truth is None else int(np.count_nonzero(out != truth))
    return FrameOutcome(errors, n_flips)


_WORKER: dict = {}


def _init_worker(params: CodeParams):
    _WORKER["params"] = params


def _run_chunk(p: float, key: np.ndarray, start: int, stop: int, all_zero: bool) -> list[tuple[int, int]]:
    params = _WORKER["params"]
    return [
        (o.bit_errors, o.flips)
        for o in (simulate_frame(params, p, key, f, all_zero) for f in range(start, stop))
    ]


class _Stopper:
    def __init__(self, spec: SweepSpec, layout: FrameLayout):
        self.spec = spec
        self.bits_per_frame = layout.info_bits_per_frame

    def done(self, r: PointResult) -> bool:
        s = self.spec
        return (
            (s.max_frames is not None and r.frames >= s.max_frames)
            or (s.max_bits is not None and r.info_bits >= s.max_bits)
            or (s.min_bit_errors is not None and r.bit_errors >= s.min_bit_errors)
        )


def _frame_results(spec: SweepSpec, p: float, key: np.ndarray, workers: int,
                   pool: ProcessPoolExecutor | None, **frame_kw) -> Iterable[tuple[int, int]]:
    """Yield per-frame ``(bit_errors, flips)`` in frame order, lazily."""
    params = spec.params
    if pool is None:
        f = 0
        while True:
            o = simulate_frame(params, p, key, f, spec.all_zero, **frame_kw)
            yield o.bit_errors, o.flips
            f += 1
    pending = []
    next_frame = 0
    try:
        while True:
            while len(pending) < 2 * workers:
                pending.append(pool.submit(_run_chunk, p, key, next_frame,
                                           next_frame + CHUNK_FRAMES, spec.all_zero))
                next_frame += CHUNK_FRAMES
            yield from pending.pop(0).result()
    finally:
        for fut in pending:
            fut.cancel()


def run_point(spec: SweepSpec, index: int, workers: int = 1,
              pool: ProcessPoolExecutor | None = None,
              flip_script: Callable[[int], np.ndarray] | None = None,
              decode: bool = True) -> PointResult:
    """Simulate one point of ``spec`` until a stop rule trips.

    ``flip_script`` and ``decode`` are test hooks: a scripted channel
    returning transmitted-bit indices per frame, and a switch to skip decoding.
    """
    params = spec.params
    require_valid(params)
    rate = float(block_rate(params))
    p, gap = spec.points[index].resolve(rate)
    res = PointResult(index, p, gap)
    stopper = _Stopper(spec, FrameLayout(params))
    per_frame = FrameLayout(params).info_bits_per_frame
    key = point_key(spec.base_seed, index)

    local = flip_script is not None or not decode
    own_pool = None
    if pool is None and workers > 1 and not local:
        own_pool = pool = ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(params,))
    t0 = time.perf_counter()
    try:
        frames = _frame_results(spec, p, key, workers, None if local else pool,
                                **({"flip_script": flip_script, "decode": decode} if local else {}))
        for errors, flips in frames:
            res.frames += 1
            res.info_bits += per_frame
            res.bit_errors += errors
            res.frame_errors += errors > 0
            res.flips += flips
            if stopper.done(res):
                break
    finally:
        if own_pool is not None:
            own_pool.shutdown(cancel_futures=True)
    res.seconds = time.perf_counter() - t0
    log.info("point %d p=%.4g: %d frames, %d/%d errors, BER %.3g", index, p, res.frames,
             res.bit_errors, res.info_bits, res.ber)
    return res


def run_sweep(spec: SweepSpec, workers: int = 1,
              progress: Callable[[PointResult], None] | None = None) -> SimResult:
    result = SimResult(spec.params)
    pool = None
    if workers > 1:
        pool = ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(spec.params,))
    try:
        for i in range(len(spec.points)):
            try:
                pr = run_point(spec, i, workers, pool)
            except Exception as exc:  # a failing point is recorded, the sweep continues
                log.exception("point %d failed", i)
                pr = PointResult(i, math.nan, None, error=f"{type(exc).__name__}: {exc}")
            result.points.append(pr)
            if progress is not None:
                progress(pr)
    finally:
        if pool is not None:
            pool.shutdown(cancel_futures=True)
    return result


def measure_throughput(params: CodeParams, p: float, frames: int = 8, all_zero: bool = False,
                       seed: int = 0) -> float:
    """Single-core simulated information throughput in bits/s."""
    key = point_key(seed, 0)
    simulate_frame(params, p, key, 0, all_zero)  # compile / warm caches
    t0 = time.perf_counter()
    for f in range(frames):
        simulate_frame(params, p, key, f, all_zero)
    dt = time.perf_counter() - t0
    return frames * FrameLayout(params).info_bits_per_frame / dt


def sweep_points(values: Sequence[float], kind: str) -> list[Point]:
    if kind not in ("p", "gap_db"):
        raise ValueError(f"unknown point kind {kind!r}")
    return [Point(**{kind: float(v)}) for v in values]
