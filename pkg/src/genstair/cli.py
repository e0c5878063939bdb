"""Command-line entry point: ``genstair {verify,info,encode,decode,sweep}``.

Exit codes: 0 success, 1 validation or runtime failure, 2 configuration or
usage error, 3 decode finished with unresolved constraints.
"""

from __future__ import annotations

import argparse
import datetime as dt
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .config import Config, ConfigError, load_config
from .fileformat import FormatError, decode_bytes, encode_bytes
from .geometry import (
    InvalidParamsError,
    block_rate,
    nominal_rate,
    validate,
    verify_intersection,
    window_mbits,
)
from .encoder import FrameLayout
from .sim import run_sweep

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_UNRESOLVED = 0, 1, 2, 3

log = logging.getLogger("genstair")


def _load(path) -> Config:
    return load_config(path)


def cmd_verify(args) -> int:
    cfg = _load(args.config)
    p = cfg.params
    rep = validate(p)
    print(rep)
    ok = rep.ok
    if args.intersection and p.S <= args.intersection_max_s and rep["ruler order"].ok:
        inter = verify_intersection(p)
        ok &= inter
        print(f"[{'PASS' if inter else 'FAIL'}] codeword intersection <= 1 "
              f"(exhaustive over {2 * p.d_M + 1} blocks)")
    elif not args.intersection:
        print("[SKIP] codeword intersection (disabled)")
    elif p.S > args.intersection_max_s:
        print(f"[SKIP] codeword intersection (S={p.S} > {args.intersection_max_s})")
    else:
        print("[SKIP] codeword intersection (ruler order is wrong)")
    print("verify:", "PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_info(args) -> int:
    cfg = _load(args.config)
    p = cfg.params
    lay = FrameLayout(p)
    rows = [
        ("S", p.S), ("M", p.M), ("r", p.r), ("F", p.F), ("W", p.W),
        ("iterations", p.iterations), ("ruler", list(p.ruler.marks)),
        ("perm_family", p.perm_kind.value),
        ("component length", f"{p.n} (parent {p.code.parent_len}, shortened by {p.code.shorten})"),
        ("nominal rate", f"{float(nominal_rate(p)):.5f}"),
        ("block rate", f"{float(block_rate(p)):.5f}" if p.F > p.W else "n/a"),
        ("window", f"{p.W} blocks, {window_mbits(p):.3f} Mbit"),
        ("info bits/frame", lay.info_bits_per_frame if p.F > p.W else "n/a"),
        ("transmitted bits/frame", lay.transmitted_bits_per_frame),
    ]
    if cfg.sweep is not None and p.F > p.W:
        rate = float(block_rate(p))
        for pt in cfg.sweep.points:
            try:
                prob, gap = pt.resolve(rate)
                rows.append(("point", f"p={prob:.4g} gap={'n/a' if gap is None else f'{gap:.3f} dB'}"))
            except ValueError as exc:
                rows.append(("point", f"invalid: {exc}"))
    w = max(len(k) for k, _ in rows)
    for k, v in rows:
        print(f"{k:<{w}}  {v}")
    return EXIT_OK


def _io(args, cfg: Config, name: str) -> Path:
    val = getattr(args, name)
    path = Path(val) if val else cfg.io_path({"infile": "input", "outfile": "output"}[name])
    if path is None:
        raise ConfigError(f"no {name} given on the command line or in [io]")
    return path


def cmd_encode(args) -> int:
    cfg = _load(args.config)
    src, dst = _io(args, cfg, "infile"), _io(args, cfg, "outfile")
    dst.write_bytes(encode_bytes(src.read_bytes(), cfg.params))
    return EXIT_OK


def cmd_decode(args) -> int:
    cfg = _load(args.config)
    src, dst = _io(args, cfg, "infile"), _io(args, cfg, "outfile")
    data, stats = decode_bytes(src.read_bytes(), cfg.params)
    dst.write_bytes(data)
    unresolved = sum(s.unresolved for s in stats)
    flips = sum(s.flips for s in stats)
    print(f"decoded {len(stats)} frame(s): {flips} bit flips, {unresolved} unresolved constraint rows")
    return EXIT_UNRESOLVED if unresolved else EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _load(args.config)
    if cfg.sweep is None:
        raise ConfigError("configuration has no [sweep] section")
    out = Path(args.csv) if args.csv else cfg.io_path("csv")
    if out is None:
        raise ConfigError("no CSV path given on the command line or in [io] csv")
    workers = args.workers or 1

    def progress(pt):
        if pt.error:
            print(f"point {pt.index}: ERROR {pt.error}", file=sys.stderr)
            return
        lo, hi = pt.ci
        print(f"point {pt.index}: p={pt.p:.4g} frames={pt.frames} bits={pt.info_bits} "
              f"errors={pt.bit_errors} BER={pt.ber:.3g} [{lo:.3g}, {hi:.3g}] "
              f"{pt.bits_per_sec / workers / 1e6:.2f} Mbit/s/core")

    res = run_sweep(cfg.sweep, workers=workers, progress=progress)
    out.write_text(res.to_csv(timing=not args.no_timing))
    manifest = {
        "genstair_version": __version__,
        "created": dt.datetime.now(dt.timezone.utc).isoformat(timespec="seconds"),
        "config": cfg.raw,
        "base_seed": cfg.sweep.base_seed,
        "params_hash": cfg.content_hash(),
        "workers": workers,
        "csv": out.name,
        "errors": {str(p.index): p.error for p in res.points if p.error},
    }
    man_path = out.with_suffix(".manifest.json")
    man_path.write_text(json.dumps(manifest, indent=2) + "\n")
    print(f"wrote {out} and {man_path}")
    return EXIT_FAIL if manifest["errors"] else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="genstair", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="check ruler, net, lpf and structural conditions")
    v.add_argument("config")
    v.add_argument("--no-intersection", dest="intersection", action="store_false",
                   help="skip the exhaustive codeword-intersection check")
    v.add_argument("--intersection-max-s", type=int, default=256,
                   help="largest S for which the intersection check runs (default 256)")
    v.set_defaults(func=cmd_verify)

    i = sub.add_parser("info", help="print derived code quantities")
    i.add_argument("config")
    i.set_defaults(func=cmd_info)

    for name, fn, desc in (("encode", cmd_encode, "encode a file into frames"),
                           ("decode", cmd_decode, "decode a framed file")):
        c = sub.add_parser(name, help=desc)
        c.add_argument("config")
        c.add_argument("infile", nargs="?")
        c.add_argument("outfile", nargs="?")
        c.set_defaults(func=fn)

    s = sub.add_parser("sweep", help="run a Monte-Carlo BER sweep and write CSV + manifest")
    s.add_argument("config")
    s.add_argument("csv", nargs="?")
    s.add_argument("-j", "--workers", type=int, default=int(os.environ.get("GENSTAIR_WORKERS", 1)))
    s.add_argument("--no-timing", action="store_true",
                   help="leave the seconds and bits_per_sec columns empty (byte-reproducible CSV)")
    s.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InvalidParamsError, FormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
