"""Flat ``key = value`` configuration files with command-line overrides."""

from __future__ import annotations

import math
from pathlib import Path

from .errors import ConfigError

INT_KEYS = {"n", "seed", "n_traj", "record_every", "workers", "batch_size", "q"}
FLOAT_KEYS = {"beta", "t_end", "dt", "delta_gap", "r0"}
LIST_KEYS = {"lambda0"}
STR_KEYS = {"output"}
KNOWN_KEYS = INT_KEYS | FLOAT_KEYS | LIST_KEYS | STR_KEYS


def parse_float(text: str, key: str) -> float:
    t = text.strip().lower()
    if t in ("inf", "+inf", "infinity", "+infinity"):
        return math.inf
    try:
        return float(t)
    except ValueError:
        raise ConfigError(f"{key}: not a number: {text!r}", key) from None


def parse_value(key: str, text: str):
    if key in INT_KEYS:
        try:
            return int(text.strip())
        except ValueError:
            raise ConfigError(f"{key}: not an integer: {text!r}", key) from None
    if key in FLOAT_KEYS:
        return parse_float(text, key)
    if key in LIST_KEYS:
        return [parse_float(v, key) for v in text.replace(",", " ").split()]
    if key in STR_KEYS:
        return text.strip()
    raise ConfigError(f"unknown configuration key {key!r}", key)


def parse_text(text: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = parse_value(key, value)
    return out


def load_config(path: str | Path | None, overrides: dict | None = None) -> dict:
    """Read ``path`` (if given) and apply already-parsed ``overrides``."""
    cfg = {}
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from None
        cfg.update(parse_text(text))
    for key, value in (overrides or {}).items():
        if value is not None:
            cfg[key] = value
    return cfg


def require(cfg: dict, *keys: str) -> None:
    for key in keys:
        if key not in cfg:
            raise ConfigError(f"missing configuration key {key!r}", key)


def render(cfg: dict) -> str:
    """Inverse of :func:`parse_text` for the keys in ``cfg``."""
    lines = []
    for key in sorted(cfg):
        v = cfg[key]
        if isinstance(v, list):
            v = ",".join(repr(float(x)) for x in v)
        elif isinstance(v, float):
            v = "inf" if math.isinf(v) else repr(v)
        lines.append(f"{key} = {v}")
    return "\n".join(lines) + "\n"
