"""Runtime configuration: YAML file, environment variables, flag overrides.

Precedence, highest first: command-line flags, then ``VTA_*`` environment
variables, then the config file, then built-in defaults.  Unknown keys in
the file are rejected so typos fail loudly instead of silently using a
default.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Mapping

import yaml

from .errors import ConfigError

ENV_PREFIX = "VTA_"

_POSITIVE_INT = ("max_chars", "top_k", "cache_capacity", "port")
_POSITIVE_FLOAT = ("tau_model", "tau_extract", "cache_ttl_s")


@dataclass(frozen=True)
class AppConfig:
    """Every tunable knob in one place.

    ``gateway_api_key_env`` names the environment variable holding the HTTP
    backend's key; the key itself never lives in config files.
    """

    backend: str = "reference"
    gateway_endpoint: str = ""
    gateway_api_key_env: str = "VTA_GATEWAY_API_KEY"
    max_chars: int = 200
    tau_model: float = 0.5
    tau_extract: float = 0.25
    top_k: int = 3
    cache_capacity: int = 256
    cache_ttl_s: float = 300.0
    database_url: str = "sqlite+pysqlite:///:memory:"
    host: str = "127.0.0.1"
    port: int = 8000
    bank_path: str = ""
    lexicon_path: str = ""
    dictionary_path: str = ""
    templates_path: str = ""

    def validate(self) -> "AppConfig":
        if self.backend not in ("reference", "http"):
            raise ConfigError(f"backend must be 'reference' or 'http', got {self.backend!r}")
        if self.backend == "http" and not self.gateway_endpoint:
            raise ConfigError("backend 'http' requires gateway_endpoint")
        for name in _POSITIVE_INT:
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value <= 0:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
        for name in _POSITIVE_FLOAT:
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or isinstance(value, bool) or value <= 0:
                raise ConfigError(f"{name} must be a positive number, got {value!r}")
        return self


_FIELD_TYPES = {f.name: f.type for f in fields(AppConfig)}
_INT_FIELDS = set(_POSITIVE_INT)
_FLOAT_FIELDS = set(_POSITIVE_FLOAT)


def _coerce(name: str, value: Any) -> Any:
    """Coerce strings from env/YAML to the target field type."""
    if name in _INT_FIELDS:
        try:
            return int(value)
        except (TypeError, ValueError):
            raise ConfigError(f"{name} must be an integer, got {value!r}") from None
    if name in _FLOAT_FIELDS:
        try:
            return float(value)
        except (TypeError, ValueError):
            raise ConfigError(f"{name} must be a number, got {value!r}") from None
    if not isinstance(value, str):
        raise ConfigError(f"{name} must be a string, got {value!r}")
    return value


def _from_mapping(raw: Mapping[str, Any], source: str) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for key, value in raw.items():
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown configuration key {key!r} in {source}")
        out[key] = _coerce(key, value)
    return out


def load_config(
    path: str | Path | None = None,
    *,
    env: Mapping[str, str] | None = None,
    overrides: Mapping[str, Any] | None = None,
) -> AppConfig:
    """Merge defaults, file, environment, and explicit overrides."""
    merged: dict[str, Any] = {}

    if path is not None:
        text = Path(path).read_text("utf-8")
        raw = yaml.safe_load(text)
        if raw is None:
            raw = {}
        if not isinstance(raw, dict):
            raise ConfigError(f"config file {path} must hold a mapping")
        merged.update(_from_mapping(raw, str(path)))

    env = os.environ if env is None else env
    for name in _FIELD_TYPES:
        env_name = ENV_PREFIX + name.upper()
        if env_name in env:
            merged[name] = _coerce(name, env[env_name])

    if overrides:
        merged.update(_from_mapping(overrides, "command-line flags"))

    return AppConfig(**merged).validate()
