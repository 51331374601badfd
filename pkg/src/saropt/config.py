"""Flat key-value run configuration.

One RunConfig merges every knob of the pipeline.  The file format is
``key = value`` per line with ``#`` comments; CLI flags override file
values, and the fully resolved config is persisted beside any output
the run produces, so every artifact directory records exactly what
made it.  ``SAROPT_OUTPUT_ROOT`` (environment) rebases relative
output directories.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError

CONFIG_FILENAME = "run_config.cfg"


@dataclass
class RunConfig:
    # data preparation
    sar: str = ""
    opt: str = ""
    out_dir: str = "saropt_out"
    pol: str = "single"               # single | quad
    patch_size: int = 256
    test_fraction: float = 0.2
    norm_lambda: float = 2000.0
    despeckle_cmd: str = ""           # external filter hook; empty = pass-through
    # model
    in_channels: int = 1
    out_channels: int = 3
    base_feature_maps: int = 50
    num_scales: int = 6
    input_size: int = 256
    disc_channels: str = "64,128,256,512,1"
    # training
    learning_rate: float = 2e-4
    adam_beta1: float = 0.5
    adam_beta2: float = 0.999
    batch_size: int = 1
    beta: float = 20.0
    num_replicas: int = 1
    early_stop_patience: int = 4
    max_epochs: int = 200
    # cycle refinement
    cycle_weight: float = 20.0
    n_unpaired: int = 8
    reinit_discriminators: bool = False
    # evaluation
    embedder: str = "random:16:0"
    eval_samples: int = 0             # 0 = use all available
    eval_repeats: int = 1
    # global
    seed: int = 0

    def resolved_out_dir(self) -> Path:
        root = os.environ.get("SAROPT_OUTPUT_ROOT", "")
        out = Path(self.out_dir)
        if root and not out.is_absolute():
            return Path(root) / out
        return out

    def disc_schedule(self):
        try:
            return tuple(int(v) for v in self.disc_channels.split(","))
        except ValueError as e:
            raise ConfigError(f"bad disc_channels: {self.disc_channels!r}") from e

    def save(self, path):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        lines = ["# saropt resolved run configuration"]
        for f in dataclasses.fields(self):
            lines.append(f"{f.name} = {getattr(self, f.name)}")
        path.write_text("\n".join(lines) + "\n")
        return path


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def _parse_value(name, raw):
    f = _FIELDS[name]
    raw = raw.strip()
    if f.type in ("bool", bool):
        if raw.lower() in ("true", "1", "yes"):
            return True
        if raw.lower() in ("false", "0", "no"):
            return False
        raise ConfigError(f"bad boolean for {name}: {raw!r}")
    if f.type in ("int", int):
        return int(raw)
    if f.type in ("float", float):
        return float(raw)
    return raw


def load_config(path) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    values = {}
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, raw = line.split("=", 1)
        key = key.strip()
        if key not in _FIELDS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            values[key] = _parse_value(key, raw)
        except ValueError as e:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}") from e
    return RunConfig(**values)


def apply_overrides(config: RunConfig, overrides: dict) -> RunConfig:
    """Return a copy with non-None overrides applied."""
    clean = {k: v for k, v in overrides.items() if v is not None}
    unknown = set(clean) - set(_FIELDS)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return dataclasses.replace(config, **clean)
