"""Run configuration: flat JSON keys with the unit in the key suffix."""

from __future__ import annotations

import json
import math
import os
import typing
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

from .errors import ConfigError
from .gain import GainConfig

# Equivalent 1/e² full width of a top-hat slit whose second moment matches a Gaussian's.
SLIT_GAUSSIAN_FACTOR = 4 / math.sqrt(12)


@dataclass(frozen=True)
class RunConfig:
    theta0_mrad: float = 7.0
    wavelength_m: float = 795e-9
    cell_length_m: float = 12e-3
    pump_far_radius_mrad: float = 0.5
    overlap_width_mrad: float = 6.0
    s0: typing.Optional[float] = None
    target_gain: float = 4.5
    grid_1d_half_extent_mrad: float = 16.0
    grid_1d_n_side: int = 256
    grid_2d_half_extent_mrad: float = 12.0
    grid_2d_n_side: int = 64
    seed_waist_mrad: float = 2.0
    seed_photons: float = 1e6
    spot_waist_mrad: float = 0.5
    spot_separation_mrad: float = 3.0
    lg_waist_mrad: float = 1.5
    lg_ell: int = 1
    detection_efficiency: float = 0.9
    sweep_start_mrad: float = 0.0
    sweep_stop_mrad: float = 13.0
    sweep_step_mrad: float = 0.5
    slit_width_mrad: float = 0.4
    slit_orientation: str = "polar"
    slit_deconv_factor: float = SLIT_GAUSSIAN_FACTOR
    scan_half_range_mrad: float = 4.0
    output_dir: str = "out"
    random_seed: int = 0
    analysis_label: str = "default"

    def __post_init__(self):
        for f in fields(self):
            _check_type(f.name, getattr(self, f.name), _TYPES[f.name])
        positive = ["theta0_mrad", "wavelength_m", "cell_length_m", "pump_far_radius_mrad",
                    "overlap_width_mrad", "grid_1d_half_extent_mrad", "grid_2d_half_extent_mrad",
                    "seed_waist_mrad", "seed_photons", "spot_waist_mrad", "spot_separation_mrad",
                    "lg_waist_mrad", "sweep_step_mrad", "slit_width_mrad", "scan_half_range_mrad"]
        for key in positive:
            if not getattr(self, key) > 0:
                raise ConfigError(key, f"must be positive, got {getattr(self, key)}")
        if self.s0 is not None and not self.s0 >= 0:
            raise ConfigError("s0", f"must be non-negative, got {self.s0}")
        if not self.target_gain >= 1:
            raise ConfigError("target_gain", f"must be >= 1, got {self.target_gain}")
        for key in ("grid_1d_n_side", "grid_2d_n_side"):
            n = getattr(self, key)
            if n < 4 or n % 2:
                raise ConfigError(key, f"must be an even integer >= 4, got {n}")
        if not 0 < self.detection_efficiency <= 1:
            raise ConfigError("detection_efficiency", "must lie in (0, 1]")
        if abs(self.lg_ell) > 3:
            raise ConfigError("lg_ell", f"|ell| must be <= 3, got {self.lg_ell}")
        if self.slit_orientation not in ("polar", "azimuthal"):
            raise ConfigError("slit_orientation", "must be 'polar' or 'azimuthal'")
        if not self.slit_deconv_factor >= 0:
            raise ConfigError("slit_deconv_factor", "must be non-negative")
        if not self.sweep_stop_mrad > self.sweep_start_mrad:
            raise ConfigError("sweep_stop_mrad", "must exceed sweep_start_mrad")
        if os.path.isfile(self.output_dir):
            raise ConfigError("output_dir", f"{self.output_dir!r} is an existing file")

    def gain_config(self, s0: float = 1.0) -> GainConfig:
        return GainConfig(s0=s0, theta0=self.theta0_mrad, wavelength=self.wavelength_m,
                          cell_length=self.cell_length_m, pump_far_width=self.pump_far_radius_mrad,
                          overlap_width=self.overlap_width_mrad)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def with_overrides(self, **kw) -> "RunConfig":
        for key in kw:
            if key not in _TYPES:
                raise ConfigError(key, "unknown configuration key")
        return replace(self, **kw)


_TYPES = typing.get_type_hints(RunConfig)


def _check_type(key, value, hint):
    if hint is float:
        ok = isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)
    elif hint is int:
        ok = isinstance(value, int) and not isinstance(value, bool)
    elif hint is str:
        ok = isinstance(value, str)
    else:  # Optional[float]
        ok = value is None or (isinstance(value, (int, float)) and not isinstance(value, bool)
                               and math.isfinite(value))
    if not ok:
        raise ConfigError(key, f"expected {getattr(hint, '__name__', 'number or null')}, got {value!r}")


def _coerce(key, value):
    # JSON numbers are exact for ints; promote ints to float where a float is expected
    if _TYPES[key] in (float, typing.Optional[float]) and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    return value


def config_from_dict(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("<root>", "configuration must be a JSON object")
    unknown = sorted(set(data) - set(_TYPES))
    if unknown:
        raise ConfigError(unknown[0], "unknown configuration key")
    return RunConfig(**{k: _coerce(k, v) for k, v in data.items()})


def parse_config(path) -> RunConfig:
    """Read a JSON config; an empty file yields all defaults."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError("<file>", f"config file {str(path)!r} not found")
    text = path.read_text(encoding="utf-8")
    if not text.strip():
        return RunConfig()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"malformed JSON: {exc}") from exc
    return config_from_dict(data)


def parse_override(item: str) -> tuple:
    """Split ``key=value``; the value is read as JSON, falling back to a bare string."""
    if "=" not in item:
        raise ConfigError(item, "override must look like key=value")
    key, raw = item.split("=", 1)
    key = key.strip()
    if key not in _TYPES:
        raise ConfigError(key, "unknown configuration key")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key, _coerce(key, value)
