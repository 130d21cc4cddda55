"""Scripted measurements on the simulated amplifier, curve fitting and output.

Every experiment is a pure function of a ``RunConfig``. The kernel's unit
decomposition (s0 = 1) is cached per grid and amplifier geometry; the
overall scale is then either taken from the config or calibrated so that
the experiment's reference Gaussian seed sees ``target_gain``.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import OptimizeWarning, curve_fit

from .config import SLIT_GAUSSIAN_FACTOR, RunConfig
from .detection import attenuator_mask, edge_mask, iris_mask, slit_mask
from .errors import (AmbiguousProjection, FitError, InconsistentWidths, InvalidArgument,
                     NumericalFailure)
from .gain import (SchmidtDecomposition, build_kernel, calibrate_scale, effective_gain,
                   schmidt_decompose)
from .gaussian_state import NoiseResult, TwinBeamState, amplify, attenuate, beam_weights
from .transverse import (ModeField, TransverseGrid, gaussian_mode, inner_product, interferogram,
                         lg_mode, make_grid, mirror_image, superpose)


# ---------------------------------------------------------------- results

@dataclass(frozen=True)
class GaussianFit:
    center: float
    width_e2: float
    amplitude: float
    offset: float
    rms_residual: float

    def __call__(self, x):
        return _gauss(np.asarray(x, dtype=float), self.center, self.width_e2, self.amplitude, self.offset)

    def to_json(self) -> dict:
        return {"center": self.center, "width_e2": self.width_e2, "amplitude": self.amplitude,
                "offset": self.offset, "rms_residual": self.rms_residual}


@dataclass(frozen=True, eq=False)
class ScanResult:
    """One data series. ``columns[0]`` is x, ``y`` names the plotted column."""

    columns: tuple
    data: np.ndarray
    y: str
    fit: GaussianFit | None = None
    derived: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.ndim != 2 or data.shape[0] == 0 or data.shape[1] != len(self.columns):
            raise InvalidArgument("scan needs at least one row matching its columns")
        if self.y not in self.columns:
            raise InvalidArgument(f"unknown y column {self.y!r}")
        data = data[np.argsort(data[:, 0], kind="stable")]
        object.__setattr__(self, "data", data)

    def column(self, name: str) -> np.ndarray:
        return self.data[:, self.columns.index(name)]

    @property
    def x(self) -> np.ndarray:
        return self.data[:, 0]

    @property
    def values(self) -> np.ndarray:
        return self.column(self.y)

    @property
    def points(self) -> list:
        return list(zip(self.x.tolist(), self.values.tolist()))


# ---------------------------------------------------------------- set-up helpers

def grid_1d(config: RunConfig, axis: str = "x") -> TransverseGrid:
    offset = config.theta0_mrad if axis == "y" else 0.0
    return make_grid(config.grid_1d_half_extent_mrad, config.grid_1d_n_side, 1, axis, offset)


def grid_2d(config: RunConfig) -> TransverseGrid:
    return make_grid(config.grid_2d_half_extent_mrad, config.grid_2d_n_side, 2)


@lru_cache(maxsize=8)
def unit_decomposition(grid: TransverseGrid, gain_config) -> SchmidtDecomposition:
    """Schmidt decomposition of the kernel at s0 = 1 (cached)."""
    return schmidt_decompose(build_kernel(grid, gain_config.with_s0(1.0)))


def amplifier(config: RunConfig, grid: TransverseGrid, reference: ModeField) -> tuple:
    """(decomposition, s0) with s0 from the config or calibrated on ``reference``."""
    unit = unit_decomposition(grid, config.gain_config())
    s0 = config.s0 if config.s0 is not None else calibrate_scale(unit, reference, config.target_gain)
    return unit.scaled(s0), float(s0)


def _probe_center(config):
    return (config.theta0_mrad, 0.0)


def _conjugate_center(config):
    return (-config.theta0_mrad, 0.0)


def _amplitude(config):
    return math.sqrt(config.seed_photons)


def difference_noise(state: TwinBeamState, eta: float, probe_mask=None, conj_mask=None) -> NoiseResult:
    """N_p - N_c noise after detection efficiency ``eta`` and optional masks."""
    state = attenuate(state, eta)
    if probe_mask is not None:
        state = state.apply_mask("probe", probe_mask)
    if conj_mask is not None:
        state = state.apply_mask("conjugate", conj_mask)
    return state.detector_noise(beam_weights(state.M, 1.0, -1.0))


def _probe_noise(state, mask=None):
    if mask is not None:
        state = state.apply_mask("probe", mask)
    return state.detector_noise(beam_weights(state.M, 1.0, 0.0))


def _check_on_grid(grid, center, waist, what="seed"):
    lim = grid.half_extent
    for c in center:
        if abs(c) + waist > lim:
            raise InvalidArgument(f"{what} at {tuple(center)} with waist {waist} leaves the grid (±{lim} mrad)")


def full_width_half_depth(x, y) -> float:
    """Full width of a dip at half its depth below zero, by linear interpolation."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    i0 = int(np.argmin(y))
    half = y[i0] / 2
    if not half < 0:
        return math.nan

    def crossing(idx):
        for a, b in zip(idx[:-1], idx[1:]):
            if y[b] >= half:
                return x[a] + (half - y[a]) * (x[b] - x[a]) / (y[b] - y[a])
        return math.nan

    left = crossing(list(range(i0, -1, -1)))
    right = crossing(list(range(i0, len(y))))
    return float(right - left)


# ---------------------------------------------------------------- angle sweep

def run_angle_sweep(config: RunConfig) -> ScanResult:
    grid = grid_1d(config)
    thetas = np.arange(config.sweep_start_mrad, config.sweep_stop_mrad + config.sweep_step_mrad / 2,
                       config.sweep_step_mrad)
    for th in thetas:
        _check_on_grid(grid, (th, 0.0), config.seed_waist_mrad)
    ref = gaussian_mode(grid, _probe_center(config), config.seed_waist_mrad)
    schmidt, s0 = amplifier(config, grid, ref)
    rows = []
    for th in thetas:
        seed = gaussian_mode(grid, (th, 0.0), config.seed_waist_mrad)
        state = amplify(schmidt, seed, _amplitude(config))
        noise = difference_noise(state, config.detection_efficiency)
        rows.append((th, effective_gain(schmidt, seed), noise.rel_sql_db))
    data = np.array(rows)
    derived = {"s0": s0, "dip_full_width_mrad": full_width_half_depth(data[:, 0], data[:, 2]),
               "max_gain": float(data[:, 1].max()),
               "theta_at_max_gain_mrad": float(data[np.argmax(data[:, 1]), 0]),
               "min_noise_db": float(data[:, 2].min())}
    meta = {"grid": _grid_meta(grid), "seed_waist_mrad": config.seed_waist_mrad}
    return ScanResult(("theta_mrad", "gain", "noise_db"), data, "noise_db", derived=derived, metadata=meta)


# ---------------------------------------------------------------- Mandel Q scans

def _mandel_setup(config, schmidt):
    grid = grid_1d(config) if schmidt is None else schmidt.grid
    seed = gaussian_mode(grid, _probe_center(config), config.seed_waist_mrad)
    if schmidt is None:
        schmidt, s0 = amplifier(config, grid, seed)
    else:
        s0 = None
    state = attenuate(amplify(schmidt, seed, _amplitude(config)), config.detection_efficiency)
    return grid, state, s0


def run_mandel_probe(config: RunConfig, schmidt: SchmidtDecomposition | None = None) -> tuple:
    """Q of the amplified probe alone: (uniform attenuation, centred iris).

    ``schmidt`` replaces the calibrated kernel, e.g. with a single-pair
    control. Transmission is the detected fraction of probe photons.
    """
    grid, state, s0 = _mandel_setup(config, schmidt)
    full = _probe_noise(state)
    q1 = full.mandel_Q
    center = np.asarray(_probe_center(config))
    q = grid.coords("probe") - center
    radii = np.unique(np.hypot(q[:, 0], q[:, 1]))
    clip_rows, att_rows = [], []
    for r in radii:
        if r <= 0:
            continue
        res = _probe_noise(state, iris_mask(grid, center, r))
        t = res.mean_N / full.mean_N
        if not 0.02 <= t <= 0.999:
            continue
        clip_rows.append((t, res.mandel_Q, 2 * r))
        att = _probe_noise(state, attenuator_mask(grid, t))
        att_rows.append((t, att.mandel_Q))
    att_rows.append((1.0, q1))
    if not clip_rows:
        raise NumericalFailure("no iris radius gives a transmission in [0.02, 0.999]")
    clip = np.array(clip_rows)
    gap = clip[:, 1] - clip[:, 0] * q1
    derived = {"Q_full": q1, "iris_crossover_diameter_mrad": float(clip[np.argmax(gap), 2]),
               "max_clipping_excess_Q": float(gap.max())}
    if s0 is not None:
        derived["s0"] = s0
    meta = {"grid": _grid_meta(grid), "seed_waist_mrad": config.seed_waist_mrad,
            "detection_efficiency": config.detection_efficiency}
    attenuation = ScanResult(("transmission", "Q"), np.array(att_rows), "Q", derived=derived, metadata=meta)
    clipping = ScanResult(("transmission", "Q", "iris_diameter_mrad"), clip, "Q", derived=derived, metadata=meta)
    return attenuation, clipping


def run_mandel_diff(config: RunConfig, schmidt: SchmidtDecomposition | None = None) -> tuple:
    """Q of N_p - N_c: (uniform attenuation, mirrored edges, same-side edges).

    The probe keeps θx <= θ0 + d. The symmetric conjugate edge keeps the
    mirror image θx >= -θ0 - d; the antisymmetric one clips the same side,
    θx <= -θ0 + d, so both beams lose the same fraction from the same side.
    """
    grid, state, s0 = _mandel_setup(config, schmidt)
    w = beam_weights(grid.size, 1.0, -1.0)
    full = state.detector_noise(w)
    probe_full = _probe_noise(state).mean_N
    q1 = full.mandel_Q
    th0 = config.theta0_mrad
    boundaries = grid.axis_coords + grid.pitch / 2
    offsets = boundaries - th0
    offsets = offsets[np.abs(offsets) <= 4 * config.seed_waist_mrad]
    # the open detector is the edge pushed to the grid boundary
    open_d = grid.half_extent - th0
    att_rows, sym_rows, anti_rows = [(1.0, q1)], [(1.0, q1, open_d)], [(1.0, q1, open_d)]
    for d in offsets:
        pm = edge_mask(grid, th0 + d, "below", "polar", "probe")
        t = _probe_noise(state, pm).mean_N / probe_full
        if not 0.02 <= t <= 0.999:
            continue
        sym = edge_mask(grid, -th0 - d, "above", "polar", "conjugate")
        anti = edge_mask(grid, -th0 + d, "below", "polar", "conjugate")
        sym_rows.append((t, state.apply_mask("probe", pm).apply_mask("conjugate", sym)
                         .detector_noise(w).mandel_Q, d))
        anti_rows.append((t, state.apply_mask("probe", pm).apply_mask("conjugate", anti)
                          .detector_noise(w).mandel_Q, d))
        a = math.sqrt(t)
        att_rows.append((t, state.apply_mask("probe", a).apply_mask("conjugate", a).detector_noise(w).mandel_Q))
    derived = {"Q_full": q1, "noise_db_full": full.rel_sql_db}
    if s0 is not None:
        derived["s0"] = s0
    meta = {"grid": _grid_meta(grid), "seed_waist_mrad": config.seed_waist_mrad,
            "detection_efficiency": config.detection_efficiency}
    cols = ("transmission", "Q", "edge_offset_mrad")
    return (ScanResult(("transmission", "Q"), np.array(att_rows), "Q", derived=derived, metadata=meta),
            ScanResult(cols, np.array(sym_rows), "Q", derived=derived, metadata=meta),
            ScanResult(cols, np.array(anti_rows), "Q", derived=derived, metadata=meta))


# ---------------------------------------------------------------- slit scan

def _gauss(x, center, width, amp, offset):
    return offset + amp * np.exp(-8.0 * (x - center) ** 2 / width**2)


def fit_gaussian(points) -> GaussianFit:
    """Least-squares Gaussian peak or dip; width is the full width at 1/e²."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 5:
        raise InvalidArgument("need at least 5 (x, y) points")
    if not np.all(np.isfinite(pts)):
        raise InvalidArgument("points must be finite")
    pts = pts[np.argsort(pts[:, 0], kind="stable")]
    x, y = pts[:, 0], pts[:, 1]
    span = np.ptp(y)
    if span <= 1e-12 * max(1.0, np.abs(y).max()):
        raise FitError("data are flat; no peak to fit")
    offset0 = 0.5 * (y[0] + y[-1])
    i_ext = int(np.argmax(np.abs(y - offset0)))
    amp0 = y[i_ext] - offset0
    wts = np.clip((y - offset0) / amp0, 0.0, None)
    if wts.sum() > 0:
        sigma = math.sqrt(np.sum(wts * (x - x[i_ext]) ** 2) / wts.sum())
    else:
        sigma = 0.0
    width0 = max(4.0 * sigma, 2.0 * np.min(np.diff(x)) if len(x) > 1 else 1.0)
    try:
        with warnings.catch_warnings():
            # an exact fit leaves the covariance undefined; only the parameters are used
            warnings.simplefilter("ignore", OptimizeWarning)
            popt, _ = curve_fit(_gauss, x, y, p0=(x[i_ext], width0, amp0, offset0), maxfev=20000)
    except (RuntimeError, ValueError) as exc:
        raise FitError(f"Gaussian fit did not converge: {exc}") from exc
    center, width, amp, offset = (float(v) for v in popt)
    width = abs(width)
    resid = y - _gauss(x, center, width, amp, offset)
    rms = float(np.sqrt(np.mean(resid**2)))
    if not (np.all(np.isfinite(popt)) and width > 0 and math.isfinite(rms)):
        raise FitError("Gaussian fit produced non-finite parameters")
    if not x.min() <= center <= x.max():
        raise FitError(f"fitted centre {center} lies outside the data")
    return GaussianFit(center, width, amp, offset, rms)


def deconvolve_slit(width_measured: float, slit_w1: float, slit_w2: float,
                    factor: float = SLIT_GAUSSIAN_FACTOR) -> float:
    """Remove two top-hat slits from a measured 1/e² full width in quadrature.

    Each slit is replaced by the Gaussian with the same second moment,
    whose 1/e² full width is ``factor`` times the slit width.
    """
    for name, v in (("width_measured", width_measured), ("slit_w1", slit_w1), ("slit_w2", slit_w2),
                    ("factor", factor)):
        if not v >= 0:
            raise InvalidArgument(f"{name} must be non-negative, got {v}")
    rad = width_measured**2 - (factor * slit_w1) ** 2 - (factor * slit_w2) ** 2
    if rad < 0:
        raise InconsistentWidths(
            f"measured width {width_measured} is narrower than the slits it contains")
    return math.sqrt(rad)


_SCAN_AXIS = {"polar": ("x", 0), "azimuthal": ("y", 1)}


def run_slit_scan(config: RunConfig, orientation: str | None = None) -> ScanResult:
    """Fixed conjugate slit, probe slit scanned across the mirrored position.

    Polar slits are scanned along an x cut, azimuthal slits along a y cut
    through the beam centres. The conjugate slit sits half a pixel off the
    beam centre so that it is centred on a pixel.
    """
    orientation = orientation or config.slit_orientation
    if orientation not in _SCAN_AXIS:
        raise InvalidArgument(f"orientation must be 'polar' or 'azimuthal', got {orientation!r}")
    cut, ax = _SCAN_AXIS[orientation]
    grid = grid_1d(config, cut)
    width = config.slit_width_mrad
    if width >= grid.half_extent:
        raise InvalidArgument("slit wider than the grid")
    seed = gaussian_mode(grid, _probe_center(config), config.seed_waist_mrad)
    schmidt, s0 = amplifier(config, grid, seed)
    state = amplify(schmidt, seed, _amplitude(config))

    conj_center = np.array(_conjugate_center(config))
    conj_center[ax] += grid.pitch / 2
    expected = -conj_center[ax]
    conj_mask = slit_mask(grid, conj_center, width, orientation, "conjugate")
    probe_line = np.array(_probe_center(config))
    scan_coords = np.unique(grid.coords("probe")[:, ax])
    positions = scan_coords[np.abs(scan_coords - expected) <= config.scan_half_range_mrad]
    probe_full = state.mean_photons()[: grid.size].sum()
    rows = []
    probe_mask = None
    for pos in positions:
        c = probe_line.copy()
        c[ax] = pos
        probe_mask = slit_mask(grid, c, width, orientation, "probe")
        noise = difference_noise(state, config.detection_efficiency, probe_mask, conj_mask)
        frac = float((probe_mask.t**2 * state.mean_photons()[: grid.size]).sum() / probe_full)
        rows.append((pos, noise.rel_sql_db, frac))
    data = np.array(rows)

    w_conj = float(conj_mask.t.sum() * grid.pitch)
    w_probe = float(probe_mask.t.sum() * grid.pitch)
    meta = {"grid": _grid_meta(grid), "orientation": orientation, "slit_width_nominal_mrad": width,
            "slit_width_realized_probe_mrad": w_probe, "slit_width_realized_conjugate_mrad": w_conj,
            "conjugate_slit_center_mrad": [float(v) for v in conj_center],
            "deconvolution": "quadrature subtraction of second-moment-equivalent Gaussians",
            "deconvolution_factor": config.slit_deconv_factor,
            "seed_waist_mrad": config.seed_waist_mrad}
    derived = {"s0": s0, "expected_dip_center_mrad": float(expected),
               "min_noise_db": float(data[:, 1].min()),
               "plateau_db": float(0.5 * (data[0, 1] + data[-1, 1]))}
    fit = None
    try:
        fit = fit_gaussian(data[:, :2])
    except FitError as exc:
        meta["fit_error"] = str(exc)
    if fit is not None:
        derived["dip_center_mrad"] = fit.center
        derived["dip_width_e2_mrad"] = fit.width_e2
        try:
            derived["theta_c_mrad"] = deconvolve_slit(fit.width_e2, w_conj, w_probe, config.slit_deconv_factor)
        except InconsistentWidths as exc:
            meta["deconvolution_error"] = str(exc)
    return ScanResult(("position_mrad", "noise_db", "probe_transmission"), data, "noise_db",
                      fit=fit, derived=derived, metadata=meta)


# ---------------------------------------------------------------- two spots

@dataclass(frozen=True)
class TwoSpotResult:
    joint_db: float
    pair_a_db: float
    pair_b_db: float
    single_db: float
    pair_a_alone_db: float
    spot_overlap: float
    s0: float
    metadata: dict = field(default_factory=dict)

    @property
    def independence_shift_db(self) -> float:
        return abs(self.pair_a_db - self.pair_a_alone_db)


def run_two_spot(config: RunConfig) -> TwoSpotResult:
    """Seed two Gaussian spots at the same polar angle, split in θy.

    Pair A is the spot at +θy with its conjugate partner at -θy; each pair
    is detected through half-plane masks through the midline θy = 0.
    """
    grid = grid_2d(config)
    th0, d, w = config.theta0_mrad, config.spot_separation_mrad, config.spot_waist_mrad
    if d / 2 >= th0:
        raise InvalidArgument("spot separation exceeds the ring diameter")
    x = math.sqrt(th0**2 - (d / 2) ** 2)
    for c in ((x, d / 2), (x, -d / 2)):
        _check_on_grid(grid, c, w, "spot")
    spot_a = gaussian_mode(grid, (x, d / 2), w)
    spot_b = gaussian_mode(grid, (x, -d / 2), w)
    single = gaussian_mode(grid, _probe_center(config), w)
    schmidt, s0 = amplifier(config, grid, single)
    amp = _amplitude(config)
    eta = config.detection_efficiency

    overlap = abs(inner_product(spot_a, spot_b)) ** 2
    both = superpose([(spot_a, 1.0), (spot_b, 1.0)])
    joint_state = amplify(schmidt, both, amp)
    alone_state = amplify(schmidt, spot_a, amp / math.sqrt(2))

    upper_p = edge_mask(grid, 0.0, "above", "azimuthal", "probe")
    lower_p = edge_mask(grid, 0.0, "below", "azimuthal", "probe")
    upper_c = edge_mask(grid, 0.0, "above", "azimuthal", "conjugate")
    lower_c = edge_mask(grid, 0.0, "below", "azimuthal", "conjugate")

    result = TwoSpotResult(
        joint_db=difference_noise(joint_state, eta).rel_sql_db,
        pair_a_db=difference_noise(joint_state, eta, upper_p, lower_c).rel_sql_db,
        pair_b_db=difference_noise(joint_state, eta, lower_p, upper_c).rel_sql_db,
        single_db=difference_noise(amplify(schmidt, single, amp), eta).rel_sql_db,
        pair_a_alone_db=difference_noise(alone_state, eta, upper_p, lower_c).rel_sql_db,
        spot_overlap=overlap,
        s0=s0,
        metadata={"grid": _grid_meta(grid), "spot_waist_mrad": w, "spot_separation_mrad": d,
                  "spot_centers_mrad": [[x, d / 2], [x, -d / 2]],
                  "pair_masks": "half planes through theta_y = 0",
                  "warnings": (["spots overlap by more than 50% in power"] if overlap > 0.5 else [])},
    )
    return result


# ---------------------------------------------------------------- OAM seeds

@dataclass(frozen=True, eq=False)
class LGResult:
    probe_interferogram: np.ndarray
    conjugate_interferogram: np.ndarray
    probe_fringes: int
    conjugate_fringes: int
    squeezing_db: float
    gaussian_db: float
    conjugate_ell: int
    overlaps: dict
    s0: float
    grid: TransverseGrid
    metadata: dict = field(default_factory=dict)


def identify_ell(f: ModeField, waist: float, ells=range(-3, 4), margin: float = 0.05) -> tuple:
    """OAM index of ``f`` by maximum overlap with LG modes about its centroid."""
    inten = f.intensity
    q = f.grid.coords(f.beam)
    centroid = (q * inten[:, None]).sum(axis=0) / inten.sum()
    fn = f.normalized()
    overlaps = {int(l): abs(inner_product(lg_mode(f.grid, centroid, waist, l, f.beam), fn)) ** 2
                for l in ells}
    ranked = sorted(overlaps, key=overlaps.get, reverse=True)
    best, second = ranked[0], ranked[1]
    if overlaps[second] >= (1 - margin) * overlaps[best]:
        raise AmbiguousProjection(
            f"overlaps with ell={best} ({overlaps[best]:.3g}) and ell={second} ({overlaps[second]:.3g}) are within {margin:.0%}")
    return best, overlaps


def run_lg(config: RunConfig, ell: int | None = None) -> LGResult:
    ell = config.lg_ell if ell is None else ell
    if int(ell) != ell or abs(ell) > 3:
        raise InvalidArgument(f"ell must be an integer with |ell| <= 3, got {ell}")
    ell = int(ell)
    grid = grid_2d(config)
    w = config.lg_waist_mrad
    _check_on_grid(grid, _probe_center(config), 2 * w, "LG seed")
    ref = gaussian_mode(grid, _probe_center(config), w)
    schmidt, s0 = amplifier(config, grid, ref)
    seed = lg_mode(grid, _probe_center(config), w, ell)
    amp = _amplitude(config)
    state = amplify(schmidt, seed, amp)
    probe = state.beam_field("probe", grid)
    conj = state.beam_field("conjugate", grid)
    p_img, p_count = interferogram(probe, mirror_image(probe, "x"))
    c_img, c_count = interferogram(conj, mirror_image(conj, "x"))
    conj_ell, overlaps = identify_ell(conj, w)
    eta = config.detection_efficiency
    gauss_db = difference_noise(amplify(schmidt, ref, amp), eta).rel_sql_db
    return LGResult(p_img, c_img, p_count, c_count, difference_noise(state, eta).rel_sql_db,
                    gauss_db, conj_ell, overlaps, s0, grid,
                    {"grid": _grid_meta(grid), "lg_waist_mrad": w, "ell": ell,
                     "interferogram": "field plus its reflection about the theta_x axis"})


# ---------------------------------------------------------------- output

def _grid_meta(grid):
    return {"dims": grid.dims, "axis": grid.axis, "half_extent_mrad": grid.half_extent,
            "n_side": grid.n_side, "pitch_mrad": grid.pitch, "line_offset_mrad": grid.line_offset}


def _fmt(v):
    if isinstance(v, str):
        return v
    return repr(float(v))


def write_csv(path, columns, rows) -> None:
    """UTF-8, comma separated, header row, LF line endings, shortest round-trip floats."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def write_series_csv(path, series: dict) -> None:
    """Several ScanResults in one table, tagged by a leading ``series`` column.

    Columns are the union in first-seen order; cells a series lacks stay empty.
    """
    columns = []
    for r in series.values():
        columns += [c for c in r.columns if c not in columns]
    rows = []
    for name, r in series.items():
        idx = [r.columns.index(c) if c in r.columns else None for c in columns]
        for row in r.data:
            rows.append((name, *("" if i is None else row[i] for i in idx)))
    write_csv(path, ("series", *columns), rows)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def write_json(path, payload: dict) -> None:
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        json.dump(_jsonable(payload), fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")


def scan_summary(result: ScanResult) -> dict:
    return {"derived": result.derived, "fit": result.fit.to_json() if result.fit else None,
            "metadata": result.metadata}
