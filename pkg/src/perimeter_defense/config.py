"""Flat ``key = value`` run configuration."""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .engagement import ARC_SAMPLES, BOUNDARY_SAMPLES, GameParams
from .errors import ConfigParseError
from .game import DEFAULT_DT
from .reachability import DEFAULT_RESOLUTION, GridSpec, game_grid

PARAM_KEYS = ("r_T", "rho_T", "rho_A", "nu", "omega_D", "omega_A")
BRANCHES = ("random", "ccw", "cw")


@dataclass(frozen=True)
class RunConfig:
    r_T: float
    rho_T: float
    rho_A: float
    nu: float
    omega_D: float
    omega_A: float
    resolution: int = DEFAULT_RESOLUTION
    arc_samples: int = ARC_SAMPLES
    boundary_samples: int = BOUNDARY_SAMPLES
    dt: float = DEFAULT_DT
    seed: int = 0
    n_arrivals: int = 200
    n_trials: int = 100
    output_dir: str = "out"
    branch: str = "random"

    @property
    def params(self) -> GameParams:
        return GameParams(*(getattr(self, k) for k in PARAM_KEYS))

    @property
    def grid(self) -> GridSpec:
        return game_grid(self.r_T, self.rho_T, self.resolution)

    def validate(self) -> None:
        try:
            self.params
        except ValueError as exc:
            first = str(exc).split()[0]
            key = first if first in PARAM_KEYS else None
            raise ConfigParseError(str(exc), key=key) from None
        for key in ("resolution", "arc_samples", "boundary_samples", "n_trials"):
            if getattr(self, key) < 1:
                raise ConfigParseError("must be positive", key=key)
        if self.resolution < 16:
            raise ConfigParseError("must be at least 16", key="resolution")
        if self.arc_samples < 360:
            raise ConfigParseError("must be at least 360", key="arc_samples")
        if not self.dt > 0:
            raise ConfigParseError("must be positive", key="dt")
        if self.n_arrivals < 0:
            raise ConfigParseError("must be non-negative", key="n_arrivals")
        if self.branch not in BRANCHES:
            raise ConfigParseError(f"must be one of {', '.join(BRANCHES)}", key="branch")

    def with_overrides(self, **changes) -> "RunConfig":
        cfg = replace(self, **{k: v for k, v in changes.items() if v is not None})
        cfg.validate()
        return cfg

    def serialize(self, include_output: bool = True) -> str:
        lines = []
        for f in fields(self):
            if f.name == "output_dir" and not include_output:
                continue
            lines.append(f"{f.name} = {_format(getattr(self, f.name))}")
        return "\n".join(lines) + "\n"

    @property
    def config_hash(self) -> str:
        """Digest of everything that affects results (the output location does not)."""
        return hashlib.sha256(self.serialize(include_output=False).encode("utf-8")).hexdigest()[:16]

    def snapshot(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self) if f.name != "output_dir"}


def _format(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _convert(key: str, raw: str, line: int):
    kind = _TYPES[key]
    try:
        if kind == "float":
            value = float(raw)
            if not math.isfinite(value):
                raise ValueError
            return value
        if kind == "int":
            return int(raw)
    except ValueError:
        raise ConfigParseError(f"expected {kind}, got {raw!r}", line, key) from None
    return raw


def parse_config(text: str) -> RunConfig:
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigParseError("expected 'key = value'", lineno)
        key, raw = (part.strip() for part in body.split("=", 1))
        if key not in _TYPES:
            raise ConfigParseError("unknown key", lineno, key)
        if key in values:
            raise ConfigParseError("duplicate key", lineno, key)
        if not raw:
            raise ConfigParseError("missing value", lineno, key)
        values[key] = _convert(key, raw, lineno)
    missing = [k for k in PARAM_KEYS if k not in values]
    if missing:
        raise ConfigParseError(f"missing required key(s): {', '.join(missing)}", key=missing[0])
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigParseError(f"cannot read config: {exc}") from None
    return parse_config(text)
