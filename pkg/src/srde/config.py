"""Run configuration: TOML schema, validation, presets, content hashing.

The on-disk format is TOML with a required ``schema = 1`` marker.  Every
section is optional; missing fields take the documented defaults, so a bare
invocation of any subcommand works.  Validation errors always name the
offending field (``section.key``).
"""

from __future__ import annotations

import hashlib
import json
import math

try:
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - Python < 3.11
    import tomli as tomllib

from dataclasses import dataclass, field, fields as dc_fields
from pathlib import Path
from typing import Any

import numpy as np

from .coefficients import CoefficientSpec, coefficient_preset
from .errors import ConfigError
from .grid import Field, GridSpec, sample_function
from .solver import StoppingMonitor

SCHEMA_VERSION = 1


def load_raw_config(path: str | Path | None) -> dict[str, Any]:
    """Read and minimally validate a TOML config; empty dict when no path."""
    if path is None:
        return {}
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config file is not valid TOML: {exc}")
    if "schema" not in raw:
        raise ConfigError("config field 'schema' is required (schema = 1)")
    if raw["schema"] != SCHEMA_VERSION:
        raise ConfigError(f"config field 'schema' must be {SCHEMA_VERSION}, got {raw['schema']!r}")
    return raw


def config_hash(raw: dict[str, Any]) -> str:
    """Content hash of the effective configuration (sha256 of canonical JSON)."""
    canon = json.dumps(raw, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canon.encode()).hexdigest()


def _coerce(section: str, key: str, value: Any, target_type: type) -> Any:
    if target_type is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"config field '{section}.{key}' must be a number, got {value!r}")
        return float(value)
    if target_type is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"config field '{section}.{key}' must be an integer, got {value!r}")
        return value
    if target_type is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"config field '{section}.{key}' must be a boolean, got {value!r}")
        return value
    if target_type is str:
        if not isinstance(value, str):
            raise ConfigError(f"config field '{section}.{key}' must be a string, got {value!r}")
        return value
    return value


def read_section(raw: dict[str, Any], section: str, cls, **overrides):
    """Build a section dataclass from the raw TOML, rejecting unknown keys."""
    data = raw.get(section, {})
    if not isinstance(data, dict):
        raise ConfigError(f"config section '{section}' must be a table")
    known = {f.name: f for f in dc_fields(cls)}
    values: dict[str, Any] = {}
    for key, value in data.items():
        if key not in known:
            raise ConfigError(f"unknown config field '{section}.{key}'")
        target = known[key].type
        base = {"float": float, "int": int, "bool": bool, "str": str}.get(str(target), None)
        if base is not None:
            value = _coerce(section, key, value, base)
        values[key] = value
    values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return cls(**values)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"config section '{section}' is invalid: {exc}")


@dataclass(frozen=True)
class GridSection:
    half_width: float = 10.0
    nx: int = 201
    dt: float = 1e-3
    nt: int = 100

    def build(self) -> GridSpec:
        try:
            return GridSpec(self.half_width, self.nx, self.dt, self.nt)
        except Exception as exc:
            raise ConfigError(f"config section 'grid' is invalid: {exc}")


@dataclass(frozen=True)
class CoefficientSection:
    drift: str = "xlogx(1.0)"
    sigma: str = "tanh-diffusion(0.4)"

    def build(self) -> CoefficientSpec:
        try:
            return coefficient_preset(self.drift, self.sigma)
        except Exception as exc:
            raise ConfigError(f"config field 'coefficients.drift/sigma' is invalid: {exc}")


@dataclass(frozen=True)
class WeightSection:
    decay: float = 2.0  # lambda of the weight exp(-lambda |x| e^(beta t))
    kappa: float | None = None  # default: the drift growth constant c1


@dataclass(frozen=True)
class InitialSection:
    preset: str = "gaussian(1.0, 1.0)"

    def build(self, grid: GridSpec) -> Field:
        name, args = _parse_initial(self.preset)
        if name == "zero":
            fn = lambda x: np.zeros_like(x)
        elif name == "constant":
            (c,) = args
            fn = lambda x: np.full_like(x, c)
        elif name == "gaussian":
            a, w = args
            fn = lambda x: a * np.exp(-(x * x) / (2.0 * w * w))
        else:
            raise ConfigError(
                f"config field 'initial.preset' unknown: {name!r}; "
                f"use zero, constant(c), or gaussian(a, w)"
            )
        return sample_function(grid, fn)


def _parse_initial(text: str) -> tuple[str, list[float]]:
    text = text.strip()
    if "(" in text:
        if not text.endswith(")"):
            raise ConfigError(f"config field 'initial.preset' is malformed: {text!r}")
        name, _, argstr = text.partition("(")
        try:
            args = [float(a) for a in argstr[:-1].split(",") if a.strip()]
        except ValueError:
            raise ConfigError(f"config field 'initial.preset' has non-numeric args: {text!r}")
        return name.strip(), args
    return text, []


@dataclass(frozen=True)
class MonitorSection:
    blow_up_level: float = 1e6
    closeness_level: float = math.exp(-1.0)
    enabled: bool = True

    def build(self) -> StoppingMonitor:
        try:
            return StoppingMonitor(
                blow_up_level=self.blow_up_level,
                closeness_level=self.closeness_level,
                enabled=self.enabled,
            )
        except Exception as exc:
            raise ConfigError(f"config section 'monitors' is invalid: {exc}")


@dataclass(frozen=True)
class RunSection:
    replicas: int = 1
    seed: int = 7
    output_dir: str = "srde-out"
