"""Gaussian states of the probe and conjugate beams and their photon statistics.

Modes are the pixels of a transverse grid: indices 0..M-1 are probe pixels,
M..2M-1 conjugate pixels. A state is described by its mean amplitudes
``alpha`` and the normal/anomalous moments of the fluctuations::

    A[j, k] = <δa_j† δa_k>,    B[j, k] = <δa_j δa_k>

Loss acts on these normal-ordered moments by plain rescaling, which is why
masks need no explicit vacuum term.

Two representations share one interface:

* ``GaussianState`` stores A and B densely and supports any Bogoliubov map.
* ``TwinBeamState`` is the output of the amplifier acting on a coherent
  probe and vacuum, kept in factored Schmidt form. Its statistics cost
  O(M r²) instead of O(M³) memory-bound dense algebra, which makes 2D grids
  tractable. ``to_dense`` converts for cross-checks.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import InvalidArgument, NumericalFailure, UndefinedQError
from .gain import BogoliubovTransform, SchmidtDecomposition
from .transverse import ModeField

_BEAM_SLICE = {"probe": 0, "conjugate": 1}


@dataclass(frozen=True)
class NoiseResult:
    mean_N: float
    var_N: float
    mandel_Q: float
    rel_sql_db: float

    def to_json(self) -> dict:
        return asdict(self)


def _beam_offset(beam, M):
    if beam not in _BEAM_SLICE:
        raise InvalidArgument(f"beam must be 'probe' or 'conjugate', got {beam!r}")
    return _BEAM_SLICE[beam] * M


def _mode_vector(mode, M):
    if isinstance(mode, ModeField):
        if mode.grid.size != M:
            raise InvalidArgument("mode grid does not match the state")
        vec = mode.pixels
    else:
        vec = np.asarray(mode, dtype=complex).ravel()
        if vec.size != M:
            raise InvalidArgument("mode vector does not match the state")
    if abs(np.vdot(vec, vec).real - 1.0) > 1e-9:
        raise InvalidArgument("seed mode must be normalized")
    return vec


def _transmission(mask, M):
    t = getattr(mask, "t", mask)
    t = np.broadcast_to(np.asarray(t, dtype=float), (M,))
    if np.any(t < 0) or np.any(t > 1) or not np.all(np.isfinite(t)):
        raise InvalidArgument("mask transmission must lie in [0, 1]")
    return t


def _weights(weights, n):
    w = np.asarray(weights, dtype=float).ravel()
    if w.size != n:
        raise InvalidArgument(f"expected {n} weights, got {w.size}")
    if not np.all(np.isfinite(w)):
        raise InvalidArgument("weights must be finite")
    return w


def beam_weights(M: int, probe: float = 1.0, conjugate: float = -1.0) -> np.ndarray:
    """Weights for a detector summing ``probe``·N_p + ``conjugate``·N_c."""
    return np.concatenate([np.full(M, float(probe)), np.full(M, float(conjugate))])


def _noise_from(mean, var, sql):
    if not (math.isfinite(mean) and math.isfinite(var) and math.isfinite(sql)):
        raise NumericalFailure("photon-number moments overflowed")
    if not sql > 0:
        raise UndefinedQError("detector sees no light; Mandel Q is undefined")
    ratio = var / sql
    db = 10 * math.log10(ratio) if ratio > 0 else -math.inf
    return NoiseResult(float(mean), float(var), float(ratio - 1), float(db))


class _Statistics:
    """Detector-level quantities shared by both representations."""

    def detector_noise(self, weights) -> NoiseResult:
        w = _weights(weights, 2 * self.M)
        n = self.mean_photons()
        return _noise_from(w @ n, self._variance(w, n), np.abs(w) @ n)

    def photon_mean(self, weights) -> float:
        return float(_weights(weights, 2 * self.M) @ self.mean_photons())


@dataclass(frozen=True, eq=False)
class GaussianState(_Statistics):
    M: int
    alpha: np.ndarray
    A: np.ndarray
    B: np.ndarray

    def mean_photons(self) -> np.ndarray:
        """Mean photon number of every mode."""
        return np.real(np.diag(self.A)) + np.abs(self.alpha) ** 2

    def photon_cov(self, j: int, k: int) -> float:
        a, A, B = self.alpha, self.A, self.B
        cov = abs(A[j, k]) ** 2 + abs(B[j, k]) ** 2
        cov += 2 * np.real(np.conj(a[j]) * a[k] * A[k, j] + np.conj(a[j]) * np.conj(a[k]) * B[j, k])
        if j == k:
            cov += A[j, j].real + abs(a[j]) ** 2
        return float(cov)

    def _variance(self, w, n):
        A, B = self.A, self.B
        x = w * self.alpha
        var = w @ (np.abs(A) ** 2 + np.abs(B) ** 2) @ w
        var += 2 * np.real(x.conj() @ A.T @ x + x.conj() @ B @ x.conj())
        return float(var + (w**2) @ n)

    def apply_mask(self, beam: str, mask) -> "GaussianState":
        off = _beam_offset(beam, self.M)
        d = np.ones(2 * self.M)
        d[off:off + self.M] = _transmission(mask, self.M)
        return GaussianState(self.M, self.alpha * d, self.A * np.outer(d, d), self.B * np.outer(d, d))

    def physicality_violation(self) -> float:
        """Most negative eigenvalue of the fluctuation covariance (0 if physical).

        The covariance of (δa, δa†) is [[I + Aᵀ, B], [B̄, A]].
        """
        n = 2 * self.M
        cov = np.block([[np.eye(n) + self.A.T, self.B], [self.B.conj(), self.A]])
        cov = 0.5 * (cov + cov.conj().T)
        return float(max(0.0, -np.linalg.eigvalsh(cov).min()))

    def is_physical(self, tol: float = 1e-8) -> bool:
        herm = np.abs(self.A - self.A.conj().T).max() <= tol if self.A.size else True
        sym = np.abs(self.B - self.B.T).max() <= tol if self.B.size else True
        return bool(herm and sym and self.physicality_violation() <= tol)


def vacuum_state(M: int) -> GaussianState:
    if int(M) != M or M < 1:
        raise InvalidArgument(f"M must be a positive integer, got {M}")
    M = int(M)
    n = 2 * M
    return GaussianState(M, np.zeros(n, dtype=complex), np.zeros((n, n), dtype=complex),
                         np.zeros((n, n), dtype=complex))


def seed_coherent(state: GaussianState, beam: str, mode, amplitude: complex) -> GaussianState:
    """Displace ``beam`` by ``amplitude`` along the normalized ``mode``."""
    off = _beam_offset(beam, state.M)
    vec = _mode_vector(mode, state.M)
    alpha = state.alpha.copy()
    alpha[off:off + state.M] += amplitude * vec
    return GaussianState(state.M, alpha, state.A, state.B)


def apply_bogoliubov(state: GaussianState, t: BogoliubovTransform) -> GaussianState:
    if t.M != state.M:
        raise InvalidArgument(f"transform acts on {t.M} modes per beam, state has {state.M}")
    M = state.M
    zero = np.zeros((M, M))
    S = np.block([[t.U_aa, zero], [zero, t.U_bb]])
    T = np.block([[zero, t.V_ab], [t.V_ba, zero]])
    A, B, a = state.A, state.B, state.alpha
    I = np.eye(2 * M)
    Sc, Tc = S.conj(), T.conj()
    A_new = Sc @ A @ S.T + Sc @ B.conj() @ T.T + Tc @ B @ S.T + Tc @ (I + A.T) @ T.T
    B_new = S @ B @ S.T + S @ (I + A.T) @ T.T + T @ A @ S.T + T @ B.conj() @ T.T
    A_new = 0.5 * (A_new + A_new.conj().T)
    B_new = 0.5 * (B_new + B_new.T)
    return GaussianState(M, S @ a + T @ a.conj(), A_new, B_new)


@dataclass(frozen=True, eq=False)
class TwinBeamState(_Statistics):
    """Amplified coherent probe plus vacuum, after any number of masks.

    Fluctuations are A_pp = P̄ N Pᵀ, A_cc = C̄ N Cᵀ, B_pc = P K Cᵀ with
    N = diag(sinh² s) and K = diag(sinh s cosh s). Masks rescale the rows
    of P and C, so the columns stop being orthonormal once a mask is applied.
    """

    M: int
    alpha: np.ndarray
    P: np.ndarray
    C: np.ndarray
    s: np.ndarray

    @property
    def _n(self):
        return np.sinh(self.s) ** 2

    @property
    def _k(self):
        return np.sinh(self.s) * np.cosh(self.s)

    def mean_photons(self) -> np.ndarray:
        n = self._n
        spont = np.concatenate([(np.abs(self.P) ** 2) @ n, (np.abs(self.C) ** 2) @ n])
        return spont + np.abs(self.alpha) ** 2

    def _entries(self, j, k):
        M, n, kk = self.M, self._n, self._k
        rows = [(self.P, j) if j < M else (self.C, j - M), (self.P, k) if k < M else (self.C, k - M)]
        (Xj, jj), (Xk, kk_) = rows
        same_beam = (j < M) == (k < M)
        if same_beam:
            return np.sum(np.conj(Xj[jj]) * n * Xk[kk_]), 0.0
        return 0.0, np.sum(Xj[jj] * kk * Xk[kk_])

    def photon_cov(self, j: int, k: int) -> float:
        a = self.alpha
        Ajk, Bjk = self._entries(j, k)
        Akj = np.conj(Ajk)
        cov = abs(Ajk) ** 2 + abs(Bjk) ** 2
        cov += 2 * np.real(np.conj(a[j]) * a[k] * Akj + np.conj(a[j]) * np.conj(a[k]) * Bjk)
        if j == k:
            cov += self.mean_photons()[j]
        return float(cov)

    def _variance(self, w, nbar):
        M, n, kk = self.M, self._n, self._k
        wp, wc = w[:M], w[M:]
        P, C = self.P, self.C
        Gp = P.T @ (wp[:, None] * P.conj())
        Gc = C.T @ (wc[:, None] * C.conj())
        nn = np.outer(n, n)
        var = np.sum(nn * (np.abs(Gp) ** 2 + np.abs(Gc) ** 2))
        var += 2 * np.real(np.sum(np.outer(kk, kk) * Gc * Gp))
        yp = P.conj().T @ (wp * self.alpha[:M])
        yc = C.conj().T @ (wc * self.alpha[M:])
        var += 2 * np.sum(n * (np.abs(yp) ** 2 + np.abs(yc) ** 2))
        var += 4 * np.real(np.sum(np.conj(yp) * kk * np.conj(yc)))
        return float(var + (w**2) @ nbar)

    def apply_mask(self, beam: str, mask) -> "TwinBeamState":
        t = _transmission(mask, self.M)
        off = _beam_offset(beam, self.M)
        alpha = self.alpha.copy()
        alpha[off:off + self.M] *= t
        P, C = (self.P * t[:, None], self.C) if beam == "probe" else (self.P, self.C * t[:, None])
        return TwinBeamState(self.M, alpha, P, C, self.s)

    def beam_field(self, beam: str, grid) -> ModeField:
        """Mean field of ``beam`` as an (unnormalized) ModeField."""
        off = _beam_offset(beam, self.M)
        return ModeField.from_pixels(grid, self.alpha[off:off + self.M], beam)

    def to_dense(self) -> GaussianState:
        M, n, kk = self.M, self._n, self._k
        P, C = self.P, self.C
        zero = np.zeros((M, M), dtype=complex)
        Bpc = (P * kk) @ C.T
        A = np.block([[(P.conj() * n) @ P.T, zero], [zero, (C.conj() * n) @ C.T]])
        B = np.block([[zero, Bpc], [Bpc.T, zero]])
        return GaussianState(M, self.alpha.copy(), A, B)

    def is_physical(self, tol: float = 1e-8) -> bool:
        return True


def amplify(schmidt: SchmidtDecomposition, seed=None, amplitude: complex = 0.0) -> TwinBeamState:
    """Amplifier output for a coherent probe ``amplitude``·``seed`` and vacuum conjugate."""
    M = schmidt.n_pixels
    u, v, s = schmidt.u, schmidt.v, schmidt.s
    alpha = np.zeros(2 * M, dtype=complex)
    if seed is not None and amplitude != 0:
        a0 = amplitude * _mode_vector(seed, M)
        c = u.conj().T @ a0
        alpha[:M] = a0 + u @ ((np.cosh(s) - 1) * c)
        alpha[M:] = v @ (np.sinh(s) * np.conj(c))
    return TwinBeamState(M, alpha, u, v, s)


# Module-level API; each works on either representation.

def photon_mean(state, weights) -> float:
    return state.photon_mean(weights)


def photon_cov(state, j: int, k: int) -> float:
    return state.photon_cov(j, k)


def detector_noise(state, weights) -> NoiseResult:
    return state.detector_noise(weights)


def apply_mask(state, beam: str, mask):
    return state.apply_mask(beam, mask)


def attenuate(state, power_t: float):
    """Uniform beamsplitter loss of power transmission ``power_t`` on both beams."""
    if not 0 <= power_t <= 1:
        raise InvalidArgument(f"power transmission must be in [0, 1], got {power_t}")
    t = math.sqrt(power_t)
    return state.apply_mask("probe", t).apply_mask("conjugate", t)


def mandel_q_single_beam(state, beam: str, mask) -> float:
    """Q of ``beam`` alone seen through ``mask``; the other beam is ignored.

    The mask is applied as loss before detection, which for binary masks
    coincides with weighting pixels by t².
    """
    masked = state.apply_mask(beam, mask)
    w = beam_weights(state.M, 1.0, 0.0) if beam == "probe" else beam_weights(state.M, 0.0, 1.0)
    return masked.detector_noise(w).mandel_Q
