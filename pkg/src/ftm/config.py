"""Run configuration: defaults, JSON loading, strict key checking."""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass

from .errors import ConfigError


@dataclass(slots=True)
class RunConfig:
    """Everything a run needs; every field is also a config-file key."""

    source: str | None = None
    target: str | None = None
    format: str | None = None
    endpoint: bool = False
    page_size: int = 10_000
    embedder: str = "local"
    embedder_url: str | None = None
    threshold: float = 0.90
    compatible_threshold: float = 0.60
    divergent_threshold: float = 0.25
    k_top: int = 10
    max_iters: int = 10
    seed: int = 0
    threads: int = 1
    output_dir: str = "out"
    label_floor: float = 0.35
    cross_limit: int = 1000
    common_literal_cap: int = 1000
    categorical_max_unique_ratio: float = 0.05
    categorical_min_support: int = 50
    embedding_dimension: int = 512
    growth_threshold: float = 0.10
    shift_threshold: float = 0.10

    def validate(self) -> "RunConfig":
        if self.embedder not in ("local", "remote"):
            raise ConfigError(f"embedder must be 'local' or 'remote', not {self.embedder!r}")
        if self.embedder == "remote" and not self.embedder_url:
            raise ConfigError("embedder_url is required when embedder is 'remote'")
        for name in ("threshold", "compatible_threshold", "divergent_threshold",
                     "label_floor", "categorical_max_unique_ratio",
                     "growth_threshold", "shift_threshold"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name} must be in [0, 1], got {value}")
        for name in ("page_size", "k_top", "max_iters", "threads", "cross_limit",
                     "common_literal_cap", "categorical_min_support",
                     "embedding_dimension"):
            value = getattr(self, name)
            if value < 1:
                raise ConfigError(f"{name} must be at least 1, got {value}")
        return self


_FIELD_TYPES = {f.name: f for f in dataclasses.fields(RunConfig)}


def _coerce(name: str, value):
    if name in ("source", "target", "format", "embedder_url", "embedder", "output_dir"):
        if value is not None and not isinstance(value, str):
            raise ConfigError(f"config key {name!r} must be a string")
        return value
    if name == "endpoint":
        if not isinstance(value, bool):
            raise ConfigError(f"config key {name!r} must be a boolean")
        return value
    if name in ("page_size", "k_top", "max_iters", "seed", "threads", "cross_limit",
                "common_literal_cap", "categorical_min_support", "embedding_dimension"):
        if not isinstance(value, int) or isinstance(value, bool):
            raise ConfigError(f"config key {name!r} must be an integer")
        return value
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"config key {name!r} must be a number")
    return float(value)


def load_config(path: str) -> RunConfig:
    """Read a JSON config file; unknown keys are hard errors."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            data = json.load(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path!r} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    unknown = sorted(set(data) - set(_FIELD_TYPES))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    kwargs = {name: _coerce(name, value) for name, value in data.items()}
    return RunConfig(**kwargs).validate()
