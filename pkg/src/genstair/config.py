"""TOML experiment configuration.

::

    [code]
    S = 47
    M = 4
    ruler = "optimal"          # or explicit marks, e.g. [0, 1, 4, 9, 11]
    perm_family = "involution" # or "shift"
    # r = 9                    # optional; must equal the derived value
    # force = false            # accept M > lpf(S)

    [frame]
    F = 912
    W = 48
    iterations = 6
    # warmup = true

    [sweep]
    gap_db = [1.85]            # or p = [1.05e-2, ...]
    max_bits = 1e9
    min_bit_errors = 100
    # max_frames = 1000
    base_seed = 1
    # all_zero = false

    [io]
    input = "data.bin"
    output = "data.gsc"
    csv = "sweep.csv"

A sweep manifest (JSON) written by ``genstair sweep`` is also accepted.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .geometry import CodeParams
from .nets import PermKind
from .sim import SweepSpec, sweep_points


class ConfigError(ValueError):
    pass


_SECTIONS = {
    "code": {"S", "M", "r", "ruler", "perm_family", "force"},
    "frame": {"F", "W", "iterations", "warmup"},
    "sweep": {"p", "gap_db", "max_frames", "max_bits", "min_bit_errors", "base_seed", "all_zero"},
    "io": {"input", "output", "csv"},
}
_REQUIRED = {"code": {"S", "M"}, "frame": {"F", "W"}}


@dataclass
class Config:
    params: CodeParams
    sweep: SweepSpec | None = None
    io: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)
    source: Path | None = None

    def io_path(self, key: str) -> Path | None:
        v = self.io.get(key)
        if v is None:
            return None
        p = Path(v)
        if not p.is_absolute() and self.source is not None:
            p = self.source.parent / p
        return p

    def content_hash(self) -> str:
        """git-style blob hash of the canonical JSON form of the configuration."""
        body = json.dumps(self.raw, sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha1(b"blob %d\0" % len(body) + body).hexdigest()


def _int(section: str, key: str, v) -> int:
    if isinstance(v, bool) or not isinstance(v, (int, float)) or float(v) != int(v):
        raise ConfigError(f"[{section}] {key} must be an integer, got {v!r}")
    return int(v)


def _bool(section: str, key: str, v) -> bool:
    if not isinstance(v, bool):
        raise ConfigError(f"[{section}] {key} must be true or false, got {v!r}")
    return v


def normalize(doc: dict) -> dict:
    """Validate keys and types and return a canonical plain-dict config."""
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a table")
    unknown = set(doc) - set(_SECTIONS)
    if unknown:
        raise ConfigError(f"unknown section(s): {', '.join(sorted(unknown))}")
    out: dict = {}
    for sec, allowed in _SECTIONS.items():
        body = doc.get(sec, {})
        if not isinstance(body, dict):
            raise ConfigError(f"[{sec}] must be a table")
        bad = set(body) - allowed
        if bad:
            raise ConfigError(f"unknown key(s) in [{sec}]: {', '.join(sorted(bad))}")
        missing = _REQUIRED.get(sec, set()) - set(body)
        if missing:
            raise ConfigError(f"[{sec}] missing required key(s): {', '.join(sorted(missing))}")
        if body:
            out[sec] = dict(body)

    code = out["code"]
    for k in ("S", "M", "r"):
        if k in code:
            code[k] = _int("code", k, code[k])
    ruler = code.get("ruler", "optimal")
    if isinstance(ruler, str):
        if ruler != "optimal":
            raise ConfigError(f"[code] ruler must be \"optimal\" or a list of marks, got {ruler!r}")
    elif isinstance(ruler, list):
        ruler = [_int("code", "ruler", x) for x in ruler]
    else:
        raise ConfigError(f"[code] ruler must be \"optimal\" or a list of marks, got {ruler!r}")
    code["ruler"] = ruler
    try:
        code["perm_family"] = PermKind(code.get("perm_family", "involution")).value
    except ValueError:
        raise ConfigError(f"[code] perm_family must be one of "
                          f"{[k.value for k in PermKind]}, got {code.get('perm_family')!r}") from None
    code["force"] = _bool("code", "force", code.get("force", False))

    frame = out["frame"]
    for k in ("F", "W"):
        frame[k] = _int("frame", k, frame[k])
    frame["iterations"] = _int("frame", "iterations", frame.get("iterations", 1))
    frame["warmup"] = _bool("frame", "warmup", frame.get("warmup", True))

    if "sweep" in out:
        sw = out["sweep"]
        if ("p" in sw) == ("gap_db" in sw):
            raise ConfigError("[sweep] needs exactly one of p or gap_db")
        kind = "p" if "p" in sw else "gap_db"
        vals = sw[kind]
        if not isinstance(vals, list):
            vals = [vals]
        if not vals or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in vals):
            raise ConfigError(f"[sweep] {kind} must be a non-empty list of numbers")
        sw[kind] = [float(v) for v in vals]
        for k in ("max_frames", "max_bits", "min_bit_errors"):
            if k in sw:
                sw[k] = _int("sweep", k, sw[k])
        sw["base_seed"] = _int("sweep", "base_seed", sw.get("base_seed", 0))
        sw["all_zero"] = _bool("sweep", "all_zero", sw.get("all_zero", False))
    if "io" in out:
        for k, v in out["io"].items():
            if not isinstance(v, str):
                raise ConfigError(f"[io] {k} must be a path string")
    return out


def from_dict(doc: dict, source: Path | None = None) -> Config:
    raw = normalize(doc)
    code, frame = raw["code"], raw["frame"]
    ruler = None if code["ruler"] == "optimal" else tuple(code["ruler"])
    try:
        params = CodeParams(
            S=code["S"], M=code["M"], F=frame["F"], W=frame["W"],
            iterations=frame["iterations"], ruler=ruler, perm_kind=code["perm_family"],
            r=code.get("r"), force=code["force"], warmup=frame["warmup"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    sweep = None
    if "sweep" in raw:
        sw = raw["sweep"]
        kind = "p" if "p" in sw else "gap_db"
        defaults = SweepSpec.__dataclass_fields__
        try:
            sweep = SweepSpec(
                params=params,
                points=sweep_points(sw[kind], kind),
                max_frames=sw.get("max_frames", defaults["max_frames"].default),
                max_bits=sw.get("max_bits", defaults["max_bits"].default),
                min_bit_errors=sw.get("min_bit_errors", defaults["min_bit_errors"].default),
                base_seed=sw["base_seed"],
                all_zero=sw["all_zero"],
            )
        except ValueError as exc:
            raise ConfigError(f"[sweep] {exc}") from exc
    return Config(params, sweep, raw.get("io", {}), raw, source)


def load_config(path) -> Config:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    try:
        if path.suffix == ".json":
            doc = json.loads(text)
            if "config" not in doc:
                raise ConfigError(f"{path} is not a sweep manifest (no 'config' key)")
            doc = doc["config"]
        else:
            doc = tomllib.loads(text)
    except (tomllib.TOMLDecodeError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    return from_dict(doc, path)
