"""JSON run configuration and the value parser shared with report loading."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .model import ProfileError, RateProfile, profile_from_dict

__all__ = ["ConfigError", "RunConfig", "load_config", "parse_value", "encode_value"]

_SPECIAL = {"inf": math.inf, "+inf": math.inf, "infinity": math.inf, "-inf": -math.inf,
            "nan": math.nan}

KEYS = {"profile", "lambda", "lambda_grid", "start", "tmax", "rmax", "runs", "p_floor",
        "ci_level", "seed", "tol", "lambda_c", "truncation"}


class ConfigError(ValueError):
    """Invalid configuration (CLI exit code 1)."""


def parse_value(value):
    """Decode JSON values, mapping the strings ``"inf"``/``"-inf"``/``"nan"`` to floats."""
    if isinstance(value, str) and value.strip().lower() in _SPECIAL:
        return _SPECIAL[value.strip().lower()]
    if isinstance(value, list):
        return [parse_value(v) for v in value]
    if isinstance(value, dict):
        return {k: parse_value(v) for k, v in value.items()}
    return value


def encode_value(value):
    """Inverse of :func:`parse_value`; keeps emitted JSON standard-compliant."""
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    if isinstance(value, (list, tuple)):
        return [encode_value(v) for v in value]
    if isinstance(value, dict):
        return {k: encode_value(v) for k, v in value.items()}
    return value


@dataclass
class RunConfig:
    profile: RateProfile | None = None
    lam: float | None = None
    lambda_grid: tuple | None = None
    start: int = 0
    tmax: float = 500.0
    rmax: int | str | None = "auto"  # "auto" means 2 * tmax
    runs: int = 1000
    p_floor: float = 0.02
    ci_level: float = 0.95
    seed: int | None = None
    tol: float = 0.2
    lambda_c: tuple | None = None
    truncation: int = 200

    def right_cutoff(self):
        return int(2 * self.tmax) if self.rmax == "auto" else self.rmax


def _number(raw, key, kind=float, positive=True):
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise ConfigError(f"{key!r} must be a number")
    if kind is int and int(raw) != raw:
        raise ConfigError(f"{key!r} must be an integer")
    value = kind(raw)
    if positive and not value > 0:
        raise ConfigError(f"{key!r} must be positive")
    return value


def config_from_dict(raw):
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(raw) - KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    raw = parse_value(raw)
    cfg = {}
    try:
        if "profile" in raw:
            cfg["profile"] = profile_from_dict(raw["profile"])
    except (ProfileError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid profile: {exc}") from exc
    if "lambda" in raw:
        cfg["lam"] = _number(raw["lambda"], "lambda")
    if "lambda_grid" in raw:
        grid = raw["lambda_grid"]
        if not isinstance(grid, list):
            raise ConfigError("'lambda_grid' must be a list")
        grid = tuple(_number(x, "lambda_grid") for x in grid)
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("'lambda_grid' must be strictly increasing")
        cfg["lambda_grid"] = grid
    if "start" in raw:
        cfg["start"] = _number(raw["start"], "start", int, positive=False)
        if cfg["start"] < 0:
            raise ConfigError("'start' must be non-negative")
    for key, kind in (("tmax", float), ("runs", int), ("p_floor", float), ("tol", float),
                      ("truncation", int)):
        if key in raw:
            cfg[key] = _number(raw[key], key, kind)
    if "rmax" in raw:
        cfg["rmax"] = None if raw["rmax"] is None else _number(raw["rmax"], "rmax", int)
    if "ci_level" in raw:
        level = _number(raw["ci_level"], "ci_level")
        if not level < 1:
            raise ConfigError("'ci_level' must lie in (0, 1)")
        cfg["ci_level"] = level
    if "seed" in raw:
        cfg["seed"] = _number(raw["seed"], "seed", int, positive=False)
    if "lambda_c" in raw:
        lc = raw["lambda_c"]
        if not (isinstance(lc, list) and len(lc) == 2):
            raise ConfigError("'lambda_c' must be [lo, hi]")
        cfg["lambda_c"] = tuple(_number(x, "lambda_c") for x in lc)
    return RunConfig(**cfg)


def load_config(source):
    """Load a :class:`RunConfig` from a path, a JSON string, or a dict."""
    if isinstance(source, dict):
        return config_from_dict(source)
    text = str(source)
    path = Path(text)
    try:
        if not text.lstrip().startswith("{") and path.exists():
            text = path.read_text()
        raw = json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {source!s}: {exc}") from exc
    return config_from_dict(raw)
