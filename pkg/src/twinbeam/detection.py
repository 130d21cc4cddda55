"""Far-field detector masks: irises, slits, straight edges and attenuators.

A mask holds one real amplitude transmission per pixel of one beam line.
Binary masks decide pixel membership from the pixel centre. Orientation
names the direction along which a slit is narrow or an edge clips:
``polar`` is θx (radial for beams launched at azimuth 0) and
``azimuthal`` is θy.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument
from .transverse import ModeField, TransverseGrid, _check_beam, mirror_image

_ORIENTATION_AXIS = {"polar": 0, "azimuthal": 1}


@dataclass(frozen=True, eq=False)
class DetectorMask:
    grid: TransverseGrid
    t: np.ndarray
    descriptor: dict = field(default_factory=dict)

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float).ravel()
        if t.shape != (self.grid.size,):
            raise InvalidArgument(f"mask has {t.size} pixels, grid has {self.grid.size}")
        if not np.all(np.isfinite(t)) or np.any(t < 0) or np.any(t > 1):
            raise InvalidArgument("mask transmission must lie in [0, 1]")
        object.__setattr__(self, "t", t)

    @property
    def beam(self) -> str:
        return self.descriptor.get("beam", "probe")

    @property
    def is_binary(self) -> bool:
        return bool(np.all((self.t == 0) | (self.t == 1)))

    def __mul__(self, other: "DetectorMask") -> "DetectorMask":
        if not isinstance(other, DetectorMask):
            return NotImplemented
        if other.grid != self.grid:
            raise InvalidArgument("cannot compose masks on different grids")
        if other.beam != self.beam:
            raise InvalidArgument("cannot compose masks for different beams")
        desc = {"kind": "composite", "beam": self.beam, "parts": [self.descriptor, other.descriptor]}
        return DetectorMask(self.grid, self.t * other.t, desc)

    def to_json(self) -> dict:
        return dict(self.descriptor)


def _coords(grid, beam):
    _check_beam(beam)
    return grid.coords(beam)


def _orientation(orientation):
    if orientation not in _ORIENTATION_AXIS:
        raise InvalidArgument(f"orientation must be 'polar' or 'azimuthal', got {orientation!r}")
    return _ORIENTATION_AXIS[orientation]


def all_pass(grid: TransverseGrid, beam: str = "probe") -> DetectorMask:
    _check_beam(beam)
    return DetectorMask(grid, np.ones(grid.size), {"kind": "open", "beam": beam})


def iris_mask(grid: TransverseGrid, center, radius: float, beam: str = "probe") -> DetectorMask:
    """Transmit pixels whose centre lies within ``radius`` mrad of ``center``."""
    if not radius > 0:
        raise InvalidArgument(f"iris radius must be positive, got {radius}")
    q = _coords(grid, beam) - np.asarray(center, dtype=float)
    t = (np.hypot(q[:, 0], q[:, 1]) <= radius).astype(float)
    desc = {"kind": "iris", "beam": beam, "center": [float(c) for c in center], "radius": float(radius)}
    return DetectorMask(grid, t, desc)


def slit_mask(grid: TransverseGrid, center, width: float, orientation: str,
              beam: str = "probe") -> DetectorMask:
    """Band of full ``width`` about ``center``, narrow along ``orientation``."""
    if not width > 0:
        raise InvalidArgument(f"slit width must be positive, got {width}")
    ax = _orientation(orientation)
    q = _coords(grid, beam)
    t = (np.abs(q[:, ax] - float(center[ax])) <= width / 2).astype(float)
    desc = {"kind": "slit", "beam": beam, "center": [float(c) for c in center],
            "width": float(width), "orientation": orientation}
    return DetectorMask(grid, t, desc)


def edge_mask(grid: TransverseGrid, position: float, keep: str, orientation: str = "polar",
              beam: str = "probe") -> DetectorMask:
    """Straight edge at ``position`` along ``orientation``; ``keep`` the side above or below it."""
    if keep not in ("above", "below"):
        raise InvalidArgument(f"keep must be 'above' or 'below', got {keep!r}")
    ax = _orientation(orientation)
    x = _coords(grid, beam)[:, ax]
    t = (x >= position) if keep == "above" else (x <= position)
    desc = {"kind": "edge", "beam": beam, "position": float(position), "keep": keep,
            "orientation": orientation}
    return DetectorMask(grid, t.astype(float), desc)


def attenuator_mask(grid: TransverseGrid, power_t: float, beam: str = "probe") -> DetectorMask:
    if not 0 <= power_t <= 1:
        raise InvalidArgument(f"power transmission must be in [0, 1], got {power_t}")
    _check_beam(beam)
    desc = {"kind": "attenuator", "beam": beam, "power_t": float(power_t)}
    return DetectorMask(grid, np.full(grid.size, np.sqrt(power_t)), desc)


def power_transmission(mask: DetectorMask, field: ModeField) -> float:
    """Fraction Σ t²|f|² / Σ |f|² of the field's power passing the mask."""
    if field.grid != mask.grid:
        raise InvalidArgument("mask and field live on different grids")
    total = np.sum(field.intensity)
    if not total > 0:
        raise InvalidArgument("field has zero norm")
    return float(np.sum(mask.t**2 * field.intensity) / total)


def mirror_mask(mask: DetectorMask, axis: str) -> DetectorMask:
    """Mask reflected the same way ``mirror_image`` reflects a field."""
    f = mirror_image(ModeField(mask.grid, mask.t, mask.beam), axis)
    desc = {"kind": "mirror", "axis": axis, "beam": f.beam, "of": mask.descriptor}
    return DetectorMask(mask.grid, f.amplitude.real, desc)
