"""Far-field transverse geometry and optical mode functions.

All transverse positions are divergence angles in mrad measured from the
pump axis. A grid is either a full 2D plane or a 1D cut through it:

* an ``x`` cut samples both beams along the θx axis (the polar direction
  for beams launched at azimuth 0);
* a ``y`` cut samples the probe along the line θx = +line_offset and the
  conjugate along θx = -line_offset, i.e. the azimuthal direction through
  a beam sitting at polar angle ``line_offset``.

Pixel centres are symmetric about the origin and, with an even ``n_side``,
no pixel sits on an axis, so reflections map pixels onto pixels exactly.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import ndimage

from .errors import InvalidArgument, UndefinedFringeCount

BEAMS = ("probe", "conjugate")


@dataclass(frozen=True)
class TransverseGrid:
    half_extent: float
    n_side: int
    dims: int = 2
    axis: str = "x"
    line_offset: float = 0.0

    def __post_init__(self):
        if not self.half_extent > 0:
            raise InvalidArgument(f"half_extent must be positive, got {self.half_extent}")
        if int(self.n_side) != self.n_side or self.n_side < 2:
            raise InvalidArgument(f"n_side must be an integer >= 2, got {self.n_side}")
        if self.dims not in (1, 2):
            raise InvalidArgument(f"dims must be 1 or 2, got {self.dims}")
        if self.axis not in ("x", "y"):
            raise InvalidArgument(f"axis must be 'x' or 'y', got {self.axis!r}")
        if self.dims == 2 and (self.axis != "x" or self.line_offset != 0.0):
            raise InvalidArgument("axis/line_offset only apply to 1D cuts")
        if self.axis == "x" and self.line_offset != 0.0:
            raise InvalidArgument("an x cut passes through the pump axis; line_offset must be 0")

    @property
    def pitch(self) -> float:
        return 2.0 * self.half_extent / self.n_side

    @property
    def pixel_area(self) -> float:
        """Pixel area in mrad² (pixel length in mrad for a 1D cut)."""
        return self.pitch**self.dims

    @property
    def size(self) -> int:
        return self.n_side**self.dims

    @property
    def shape(self) -> tuple:
        return (self.n_side,) * self.dims

    @property
    def axis_coords(self) -> np.ndarray:
        """Pixel-centre coordinates along one grid axis."""
        return (np.arange(self.n_side) - (self.n_side - 1) / 2.0) * self.pitch

    def coords(self, beam: str = "probe") -> np.ndarray:
        """(size, 2) array of pixel centres (θx, θy) for ``beam``.

        2D pixels are ordered row-major with θy as the slow index.
        """
        _check_beam(beam)
        c = self.axis_coords
        if self.dims == 2:
            x, y = np.meshgrid(c, c, indexing="xy")
            return np.column_stack([x.ravel(), y.ravel()])
        if self.axis == "x":
            return np.column_stack([c, np.zeros_like(c)])
        sign = 1.0 if beam == "probe" else -1.0
        return np.column_stack([np.full_like(c, sign * self.line_offset), c])


def make_grid(half_extent: float, n_side: int, dims: int = 2, axis: str = "x",
              line_offset: float = 0.0) -> TransverseGrid:
    """Build a grid spanning ±half_extent mrad with ``n_side`` pixels per axis."""
    return TransverseGrid(float(half_extent), int(n_side), int(dims), axis, float(line_offset))


def _check_beam(beam):
    if beam not in BEAMS:
        raise InvalidArgument(f"beam must be one of {BEAMS}, got {beam!r}")


@dataclass(frozen=True, eq=False)
class ModeField:
    """Complex field amplitude sampled at the pixel centres of ``grid``.

    ``amplitude`` is a flat array of length ``grid.size``; its squared
    modulus is an intensity per unit solid angle, so the norm carries the
    pixel area.
    """

    grid: TransverseGrid
    amplitude: np.ndarray
    beam: str = "probe"

    def __post_init__(self):
        _check_beam(self.beam)
        amp = np.asarray(self.amplitude, dtype=complex).ravel()
        if amp.shape != (self.grid.size,):
            raise InvalidArgument(
                f"amplitude has {amp.size} samples, grid has {self.grid.size} pixels")
        object.__setattr__(self, "amplitude", amp)

    @classmethod
    def from_pixels(cls, grid, pixels, beam="probe"):
        """Field whose per-pixel mode coefficients are ``pixels``."""
        return cls(grid, np.asarray(pixels) / np.sqrt(grid.pixel_area), beam)

    @property
    def pixels(self) -> np.ndarray:
        """Coefficients on the orthonormal pixel modes (unit vector if normalized)."""
        return self.amplitude * np.sqrt(self.grid.pixel_area)

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.amplitude) ** 2

    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.intensity) * self.grid.pixel_area))

    def is_normalized(self, tol: float = 1e-9) -> bool:
        return abs(self.norm() ** 2 - 1.0) <= tol

    def normalized(self) -> "ModeField":
        n = self.norm()
        if not n > 0:
            raise InvalidArgument("cannot normalize a zero field")
        return ModeField(self.grid, self.amplitude / n, self.beam)

    def image(self) -> np.ndarray:
        """Amplitude reshaped to the grid (rows are θy for 2D grids)."""
        return self.amplitude.reshape(self.grid.shape)

    def to_csv(self, path) -> None:
        write_field_csv(path, self)


def write_field_csv(path, field: ModeField) -> None:
    """Write theta_x_mrad, theta_y_mrad, re, im rows, one per pixel."""
    q = field.grid.coords(field.beam)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["theta_x_mrad", "theta_y_mrad", "re", "im"])
        for (x, y), a in zip(q, field.amplitude):
            w.writerow([repr(float(x)), repr(float(y)), repr(float(a.real)), repr(float(a.imag))])


def _polar(grid, center, beam):
    q = grid.coords(beam) - np.asarray(center, dtype=float)
    return np.hypot(q[:, 0], q[:, 1]), np.arctan2(q[:, 1], q[:, 0])


def gaussian_mode(grid: TransverseGrid, center: Sequence[float], waist: float,
                  beam: str = "probe") -> ModeField:
    """Normalized Gaussian; ``waist`` is the 1/e² intensity radius in mrad."""
    return lg_mode(grid, center, waist, 0, beam)


def lg_mode(grid: TransverseGrid, center: Sequence[float], waist: float, ell: int,
            beam: str = "probe") -> ModeField:
    """Normalized p=0 Laguerre-Gauss mode carrying ``ell`` units of OAM.

    The amplitude is r^|ell| exp(-r²/waist²) exp(i ell φ) about ``center``.
    """
    if not waist > 0:
        raise InvalidArgument(f"waist must be positive, got {waist}")
    if int(ell) != ell:
        raise InvalidArgument(f"ell must be an integer, got {ell}")
    ell = int(ell)
    r, phi = _polar(grid, center, beam)
    amp = np.exp(-(r / waist) ** 2).astype(complex)
    if ell:
        amp *= (r / waist) ** abs(ell) * np.exp(1j * ell * phi)
    field = ModeField(grid, amp, beam)
    if not field.norm() > 0:
        raise InvalidArgument("mode has no support on the grid")
    return field.normalized()


def _check_same_space(f, g):
    if f.grid != g.grid:
        raise InvalidArgument("fields live on different grids")
    if f.beam != g.beam:
        raise InvalidArgument("fields live on different beam lines")


def superpose(fields: Iterable[tuple]) -> ModeField:
    """Weighted pixel-wise sum of ``(field, weight)`` pairs, renormalized."""
    fields = list(fields)
    if not fields:
        raise InvalidArgument("nothing to superpose")
    first = fields[0][0]
    total = np.zeros(first.grid.size, dtype=complex)
    for field, weight in fields:
        _check_same_space(first, field)
        total += weight * field.amplitude
    out = ModeField(first.grid, total, first.beam)
    if out.norm() <= 1e-12 * max(abs(w) * f.norm() for f, w in fields):
        raise InvalidArgument("superposition cancels to a zero field; cannot renormalize")
    return out.normalized()


def inner_product(f: ModeField, g: ModeField) -> complex:
    """⟨f, g⟩ = Σ f*(q) g(q) · pixel area."""
    _check_same_space(f, g)
    return complex(np.vdot(f.amplitude, g.amplitude) * f.grid.pixel_area)


def mirror_image(f: ModeField, axis: str) -> ModeField:
    """Reflect ``f`` about the θx axis (``axis='x'``) or the θy axis (``'y'``).

    On a ``y`` cut the reflection about θy carries the probe line onto the
    conjugate line, so the result is tagged with the other beam.
    """
    if axis not in ("x", "y"):
        raise InvalidArgument(f"axis must be 'x' or 'y', got {axis!r}")
    grid, amp, beam = f.grid, f.amplitude, f.beam
    if grid.dims == 2:
        img = amp.reshape(grid.shape)
        img = img[::-1, :] if axis == "x" else img[:, ::-1]
        return ModeField(grid, img.ravel(), beam)
    if grid.axis == "x":
        return ModeField(grid, amp if axis == "x" else amp[::-1], beam)
    if axis == "x":
        return ModeField(grid, amp[::-1], beam)
    if grid.line_offset == 0.0:
        return ModeField(grid, amp, beam)
    other = "conjugate" if beam == "probe" else "probe"
    return ModeField(grid, amp, other)


def point_reflection(f: ModeField) -> ModeField:
    """f(q) -> f(-q), the reflection through the pump axis."""
    return mirror_image(mirror_image(f, "x"), "y")


def count_fringes(intensity: np.ndarray, n_angles: int = 720, threshold: float = 0.5) -> int:
    """Count azimuthal intensity lobes on the brightest ring of a 2D pattern.

    The ring is centred on the intensity centroid; its radius maximizes the
    azimuthally averaged intensity. Lobes are connected arcs at or above
    ``threshold`` times the ring maximum. A ring that never drops below the
    threshold (or a pattern peaked at its centroid) has no fringes.
    """
    img = np.asarray(intensity, dtype=float)
    total = img.sum()
    if not total > 0:
        raise UndefinedFringeCount("interferogram has zero total intensity")
    iy, ix = np.indices(img.shape)
    cy = (img * iy).sum() / total
    cx = (img * ix).sum() / total
    rms = np.sqrt((img * ((ix - cx) ** 2 + (iy - cy) ** 2)).sum() / total)
    edge = min(cx, cy, img.shape[1] - 1 - cx, img.shape[0] - 1 - cy)
    r_max = max(min(3.0 * rms, edge), 1.0)
    radii = np.arange(0.0, r_max, 0.25)
    phi = np.linspace(0.0, 2 * np.pi, n_angles, endpoint=False)
    rr, pp = np.meshgrid(radii, phi, indexing="ij")
    samples = ndimage.map_coordinates(
        img, [cy + rr * np.sin(pp), cx + rr * np.cos(pp)], order=1, mode="nearest")
    r_idx = int(np.argmax(samples.mean(axis=1)))
    if radii[r_idx] < 0.5:
        return 0
    ring = samples[r_idx]
    above = ring >= threshold * ring.max()
    if above.all():
        return 0
    return int(np.sum(above & ~np.roll(above, 1)))


def interferogram(f: ModeField, g: ModeField) -> tuple:
    """Intensity |f+g|² as a 2D image and its azimuthal fringe count."""
    _check_same_space(f, g)
    if f.grid.dims != 2:
        raise InvalidArgument("interferograms need a 2D grid")
    img = np.abs(f.image() + g.image()) ** 2
    return img, count_fringes(img)
