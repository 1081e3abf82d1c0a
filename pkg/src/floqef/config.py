"""Flat key-value run configuration with dotted sections.

Grammar: one `section.key = value` per line, `#` comments, blank lines
ignored.  Sections: model, quad, grid, dynamics, sweep, plus the top-level
`output_dir`.  Sweep values are comma-separated lists.  `--set` overrides
use the same grammar.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, fields, replace

from .errors import ConfigError
from .grid import GridSpec
from .model import ModelParams
from .quadrature import QuadratureSpec


@dataclass(frozen=True)
class DynamicsConfig:
    n_traj: int = 1000
    dt: float = 0.01
    t_burn: float = 200.0
    t_total: float = 1000.0
    master_seed: int = 12345
    stochastic: bool = True
    dump_every: int = 0
    dump_max_traj: int = 4

    def __post_init__(self):
        if self.n_traj < 1:
            raise ConfigError("dynamics.n_traj must be >= 1")
        if self.dt <= 0:
            raise ConfigError("dynamics.dt must be > 0")
        if not (self.t_total > self.t_burn >= 0):
            raise ConfigError("need dynamics.t_total > dynamics.t_burn >= 0")


@dataclass(frozen=True)
class SweepConfig:
    bias: tuple = ()
    omega: tuple = ()
    amp: tuple = ()


@dataclass(frozen=True)
class RunConfig:
    model: ModelParams = field(default_factory=ModelParams)
    quad: QuadratureSpec = field(default_factory=QuadratureSpec)
    grid: GridSpec = field(default_factory=GridSpec)
    dynamics: DynamicsConfig = field(default_factory=DynamicsConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    output_dir: str = "out"


_SECTIONS = {"model": ModelParams, "quad": QuadratureSpec, "grid": GridSpec,
             "dynamics": DynamicsConfig, "sweep": SweepConfig}

_TYPE_NAMES = {"int": int, "float": float, "bool": bool, "str": str,
               "tuple": tuple}


def _field_types(cls) -> dict[str, type]:
    out = {}
    for f in dataclasses.fields(cls):
        t = f.type
        if isinstance(t, str):
            t = _TYPE_NAMES.get(t, str)
        out[f.name] = t
    return out


def _coerce(raw: str, target_type: type, key: str):
    raw = raw.strip()
    try:
        if target_type is bool:
            low = raw.lower()
            if low in ("true", "1", "yes", "on"):
                return True
            if low in ("false", "0", "no", "off"):
                return False
            raise ValueError(raw)
        if target_type is int:
            return int(raw)
        if target_type is float:
            return float(raw)
        if target_type is str:
            return raw
        if target_type is tuple:
            return tuple(float(tok) for tok in raw.split(",") if tok.strip())
    except ValueError as exc:
        raise ConfigError(f"bad value {raw!r} for {key}") from exc
    raise ConfigError(f"unsupported option type for {key}")


def _apply(entries: dict[str, str], cfg: RunConfig) -> RunConfig:
    section_updates: dict[str, dict] = {}
    for key, raw in entries.items():
        if key == "output_dir":
            cfg = replace(cfg, output_dir=raw.strip())
            continue
        if "." not in key:
            raise ConfigError(f"unknown option {key!r} (expected section.key)")
        section, name = key.split(".", 1)
        cls = _SECTIONS.get(section)
        if cls is None:
            raise ConfigError(f"unknown section {section!r}")
        types = _field_types(cls)
        if name not in types:
            raise ConfigError(f"unknown option {name!r} in section {section!r}")
        section_updates.setdefault(section, {})[name] = _coerce(
            raw, types[name], key)
    for section, updates in section_updates.items():
        cfg = replace(cfg, **{section: replace(getattr(cfg, section),
                                               **updates)})
    return cfg


def parse_entries(text: str) -> dict[str, str]:
    entries: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, _, raw = stripped.partition("=")
        entries[key.strip()] = raw
    return entries


def load_config(path: str | None, overrides: list[str] | None = None,
                output_dir: str | None = None) -> RunConfig:
    """Build a RunConfig from an optional file plus --set overrides."""
    cfg = RunConfig()
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            cfg = _apply(parse_entries(fh.read()), cfg)
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(f"--set needs key=value, got {item!r}")
        key, _, raw = item.partition("=")
        cfg = _apply({key.strip(): raw}, cfg)
    if output_dir is not None:
        cfg = replace(cfg, output_dir=output_dir)
    return cfg


def config_lines(cfg: RunConfig) -> list[str]:
    """Flat `section.key = value` lines describing the full config."""
    lines = []
    for section in ("model", "quad", "grid", "dynamics"):
        obj = getattr(cfg, section)
        for f in fields(obj):
            lines.append(f"{section}.{f.name} = {getattr(obj, f.name)}")
    for name in ("bias", "omega", "amp"):
        vals = getattr(cfg.sweep, name)
        if vals:
            lines.append(f"sweep.{name} = {','.join(str(v) for v in vals)}")
    lines.append(f"output_dir = {cfg.output_dir}")
    return lines
