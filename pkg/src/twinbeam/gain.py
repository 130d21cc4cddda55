"""Pair-creation kernel, its Schmidt decomposition and the amplifier map.

The kernel is a phenomenological model of the traveling-wave amplifier in
the far field::

    kappa(q_p, q_c) = s0 * exp(-|q_p + q_c|² / w_p²) * PM(θ̄) * OV(θ̄)

with θ̄ = (|q_p| + |q_c|)/2. The Gaussian factor is transverse momentum
conservation set by the pump far-field spot, PM is the longitudinal
quasi-phase-matching sinc (unity at θ0) and OV is a Gaussian envelope for
the finite probe/pump overlap at large angles.

Discretization convention: pixel operators are orthonormal, so the matrix
acting on pixel mode vectors is ``kappa * pixel_area``. Its singular
values are the squeeze parameters s_i; ``s0`` therefore carries units of
1/pixel-measure (mrad⁻¹ on 1D cuts, mrad⁻² in 2D) and is calibrated
against a target gain rather than read as a squeeze parameter.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq

from .errors import InvalidArgument, NumericalFailure
from .transverse import ModeField, TransverseGrid


@dataclass(frozen=True)
class GainConfig:
    """Amplifier parameters. Angles in mrad, lengths in metres."""

    s0: float = 1.0
    theta0: float = 7.0
    wavelength: float = 795e-9
    cell_length: float = 12e-3
    pump_far_width: float = 0.5
    overlap_width: float = 6.0

    def __post_init__(self):
        if not self.s0 >= 0:
            raise InvalidArgument(f"s0 must be non-negative, got {self.s0}")
        if not self.theta0 >= 0:
            raise InvalidArgument(f"theta0 must be non-negative, got {self.theta0}")
        for name in ("wavelength", "cell_length", "pump_far_width", "overlap_width"):
            if not getattr(self, name) > 0:
                raise InvalidArgument(f"{name} must be positive, got {getattr(self, name)}")

    def with_s0(self, s0: float) -> "GainConfig":
        return replace(self, s0=float(s0))


def phase_mismatch_angle(wavelength: float, cell_length: float) -> float:
    """Mismatch angle √(λ/L), in radians, at which the dephasing length equals L."""
    if not (wavelength > 0 and cell_length > 0):
        raise InvalidArgument("wavelength and cell_length must be positive")
    return math.sqrt(wavelength / cell_length)


def phase_matching(theta, config: GainConfig):
    """Longitudinal quasi-phase-matching factor sinc(πL(θ²-θ0²)/(2λ)); θ in mrad."""
    theta = np.asarray(theta, dtype=float) * 1e-3
    x = np.pi * config.cell_length * (theta**2 - (config.theta0 * 1e-3) ** 2) / (2 * config.wavelength)
    return np.sinc(x / np.pi)


def overlap_envelope(theta, config: GainConfig):
    theta = np.asarray(theta, dtype=float)
    return np.exp(-((theta - config.theta0) / config.overlap_width) ** 2)


@dataclass(frozen=True, eq=False)
class CouplingKernel:
    """Pair-creation amplitude kappa[i, j] between probe pixel i and conjugate pixel j."""

    grid: TransverseGrid
    kappa: np.ndarray

    @property
    def matrix(self) -> np.ndarray:
        """Kernel acting on orthonormal pixel-mode coefficients."""
        return self.kappa * self.grid.pixel_area


def build_kernel(grid: TransverseGrid, config: GainConfig) -> CouplingKernel:
    qp = grid.coords("probe")
    qc = grid.coords("conjugate")
    rp = np.hypot(qp[:, 0], qp[:, 1])
    rc = np.hypot(qc[:, 0], qc[:, 1])
    kappa = np.add.outer(qp[:, 0], qc[:, 0]) ** 2
    kappa += np.add.outer(qp[:, 1], qc[:, 1]) ** 2
    kappa *= -1.0 / config.pump_far_width**2
    np.exp(kappa, out=kappa)
    theta_bar = np.add.outer(rp, rc)
    theta_bar *= 0.5
    kappa *= phase_matching(theta_bar, config)
    kappa *= overlap_envelope(theta_bar, config)
    kappa *= config.s0
    return CouplingKernel(grid, kappa)


def rank_one_kernel(u: ModeField, v: ModeField, s: float) -> CouplingKernel:
    """Kernel s·u(q_p)v(q_c) coupling exactly one probe/conjugate mode pair."""
    if u.grid != v.grid:
        raise InvalidArgument("u and v live on different grids")
    if not (u.is_normalized() and v.is_normalized()):
        raise InvalidArgument("u and v must be normalized")
    return CouplingKernel(u.grid, s * np.outer(u.amplitude, v.amplitude))


@dataclass(frozen=True, eq=False)
class SchmidtDecomposition:
    """kappa = Σ s_i u_i(q_p) v_i(q_c) with orthonormal {u_i}, {v_i}.

    ``u`` and ``v`` hold the modes as columns of pixel coefficients
    (unit vectors), shape (M, rank).
    """

    grid: TransverseGrid
    s: np.ndarray
    u: np.ndarray
    v: np.ndarray

    @property
    def rank(self) -> int:
        return len(self.s)

    @property
    def n_pixels(self) -> int:
        return self.u.shape[0]

    def probe_mode(self, i: int) -> ModeField:
        return ModeField.from_pixels(self.grid, self.u[:, i], "probe")

    def conjugate_mode(self, i: int) -> ModeField:
        return ModeField.from_pixels(self.grid, self.v[:, i], "conjugate")

    def scaled(self, factor: float) -> "SchmidtDecomposition":
        """Decomposition of ``factor`` times the kernel (same modes)."""
        if factor < 0:
            raise InvalidArgument("scale factor must be non-negative")
        return SchmidtDecomposition(self.grid, self.s * factor, self.u, self.v)

    def reconstruct(self) -> np.ndarray:
        return (self.u * self.s) @ self.v.T / self.grid.pixel_area

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["index", "s_i"])
            for i, s in enumerate(self.s):
                w.writerow([i, repr(float(s))])


def schmidt_decompose(kernel: CouplingKernel, rel_cutoff: float = 1e-6) -> SchmidtDecomposition:
    """SVD of the kernel; pairs with s_i < rel_cutoff·s_max are dropped.

    Real symmetric kernels (every mirror-symmetric grid) go through the
    cheaper symmetric eigensolver: K = W Λ Wᵀ gives u = w, v = sign(λ)·w.
    """
    mat = kernel.matrix
    if not np.all(np.isfinite(mat)):
        raise NumericalFailure("kernel has non-finite entries")
    try:
        if np.isrealobj(mat) and mat.shape[0] == mat.shape[1] and np.array_equal(mat, mat.T):
            lam, W = np.linalg.eigh(mat)
            order = np.argsort(-np.abs(lam), kind="stable")
            lam, U = lam[order], W[:, order]
            s = np.abs(lam)
            Vh = (U * np.where(lam < 0, -1.0, 1.0)).T
        else:
            U, s, Vh = np.linalg.svd(mat)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"SVD did not converge: {exc}") from exc
    if s.size == 0 or s[0] == 0:
        keep = 0
    else:
        keep = int(np.count_nonzero(s >= rel_cutoff * s[0]))
    return SchmidtDecomposition(kernel.grid, s[:keep].copy(), U[:, :keep].copy(), Vh[:keep].T.copy())


@dataclass(frozen=True, eq=False)
class BogoliubovTransform:
    """a_out = U_aa a + V_ab b†,  b_out = U_bb b + V_ba a†.

    Stored in factored form: one pair of orthonormal mode columns and a
    squeeze parameter per Schmidt pair; all other modes pass through.
    Dense blocks are built on demand, which is only sensible for small M.
    """

    M: int
    u: np.ndarray
    v: np.ndarray
    s: np.ndarray

    @classmethod
    def from_pairs(cls, M, u, v, s):
        u = np.asarray(u, dtype=complex).reshape(M, -1)
        v = np.asarray(v, dtype=complex).reshape(M, -1)
        s = np.atleast_1d(np.asarray(s, dtype=float))
        if u.shape[1] != s.size or v.shape[1] != s.size:
            raise InvalidArgument("one squeeze parameter per mode pair is required")
        return cls(M, u, v, s)

    @classmethod
    def identity(cls, M):
        return cls(M, np.zeros((M, 0)), np.zeros((M, 0)), np.zeros(0))

    @property
    def U_aa(self):
        return np.eye(self.M) + (self.u * (np.cosh(self.s) - 1)) @ self.u.conj().T

    @property
    def V_ab(self):
        return (self.u * np.sinh(self.s)) @ self.v.T

    @property
    def U_bb(self):
        return np.eye(self.M) + (self.v * (np.cosh(self.s) - 1)) @ self.v.conj().T

    @property
    def V_ba(self):
        return (self.v * np.sinh(self.s)) @ self.u.T

    def symplectic_error(self) -> float:
        """Largest violation of the commutator-preservation conditions."""
        Uaa, Vab, Ubb, Vba = self.U_aa, self.V_ab, self.U_bb, self.V_ba
        eye = np.eye(self.M)
        errs = [
            Uaa @ Uaa.conj().T - Vab @ Vab.conj().T - eye,
            Ubb @ Ubb.conj().T - Vba @ Vba.conj().T - eye,
            Uaa @ Vba.T - Vab @ Ubb.T,
        ]
        return max(float(np.abs(e).max()) for e in errs)


def bogoliubov_from_schmidt(schmidt: SchmidtDecomposition) -> BogoliubovTransform:
    return BogoliubovTransform(schmidt.n_pixels, schmidt.u, schmidt.v, schmidt.s)


def _seed_projections(schmidt, seed):
    if seed.grid != schmidt.grid:
        raise InvalidArgument("seed and decomposition live on different grids")
    if not seed.is_normalized():
        raise InvalidArgument(f"seed must be normalized (norm² = {seed.norm() ** 2})")
    return schmidt.u.conj().T @ seed.pixels


def effective_gain(schmidt: SchmidtDecomposition, seed: ModeField) -> float:
    """Output/input photon ratio of a bright coherent probe seed in mode ``seed``."""
    w = np.abs(_seed_projections(schmidt, seed)) ** 2
    return float(np.sum(np.cosh(schmidt.s) ** 2 * w) + (1.0 - np.sum(w)))


def calibrate_scale(schmidt: SchmidtDecomposition, seed: ModeField, target_gain: float) -> float:
    """Factor by which to scale ``schmidt`` so ``seed`` sees ``target_gain``."""
    if not target_gain >= 1:
        raise InvalidArgument(f"gain must be >= 1, got {target_gain}")
    w = np.abs(_seed_projections(schmidt, seed)) ** 2
    if target_gain == 1:
        return 0.0
    if schmidt.rank == 0 or w.sum() < 1e-12:
        raise NumericalFailure("seed does not overlap any amplified mode")

    def excess(k):
        with np.errstate(over="ignore"):
            return np.sum((np.cosh(k * schmidt.s) ** 2 - 1) * w) - (target_gain - 1)

    hi = 1.0
    while excess(hi) < 0:
        hi *= 2
        if hi > 1e6:
            raise NumericalFailure("target gain out of reach")
    return brentq(excess, 0.0, hi, xtol=1e-14, rtol=1e-14)


def mode_count_estimate(theta0: float, delta_theta: float, theta_c: float) -> tuple:
    """Count coherence areas in the angular bandwidth: (radial, azimuthal, total)."""
    if not (theta0 > 0 and delta_theta > 0 and theta_c > 0):
        raise InvalidArgument("all angles must be positive")
    radial = delta_theta / theta_c
    azimuthal = math.pi * theta0 / theta_c
    return radial, azimuthal, radial * azimuthal
