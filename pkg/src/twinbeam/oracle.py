"""Brute-force Fock-space reference for one or two squeezed mode pairs.

The two-mode squeeze generator s(ab - a†b†) conserves n_a - n_b, so the
truncated propagator is block diagonal in the photon-number difference.
Each block is a small tridiagonal chain exponentiated with ``expm``. Loss
is modelled on the joint photon-number distribution by binomial thinning,
which is all the number statistics need.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import expm
from scipy.special import gammaln
from scipy.stats import binom

from .errors import InvalidArgument, TruncationError
from .gain import BogoliubovTransform
from .gaussian_state import apply_bogoliubov, seed_coherent, vacuum_state

LEAKAGE_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class FockState:
    """Pure state on ``n_modes`` modes truncated at ``n_max`` photons each."""

    n_modes: int
    n_max: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if not 1 <= self.n_modes <= 3:
            raise InvalidArgument(f"oracle supports 1 to 3 modes, got {self.n_modes}")
        if self.amplitudes.shape != (self.n_max + 1,) * self.n_modes:
            raise InvalidArgument("amplitude array does not match n_modes/n_max")

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    @property
    def leakage(self) -> float:
        """Probability outside the n_max - 2 shell plus any norm deficit."""
        p = self.probabilities
        inner = p[(slice(0, self.n_max - 1),) * self.n_modes].sum()
        return float(max(0.0, 1.0 - inner))


def default_n_max(s: float, alpha: complex = 0.0) -> int:
    """Truncation with 20 photons of margin over the 8(n̄ + |α|²) + 20 rule.

    The extra margin keeps the reflection off the truncated chain's end
    below 1e-12 in amplitude, not just in leaked probability.
    """
    return int(math.ceil(8 * (math.sinh(s) ** 2 + abs(alpha) ** 2) + 40))


def _check_leakage(state):
    if state.leakage > LEAKAGE_TOL:
        raise TruncationError(f"truncation at n_max={state.n_max} leaks {state.leakage:.3g}")
    return state


def coherent_amplitudes(alpha: complex, n_max: int) -> np.ndarray:
    n = np.arange(n_max + 1)
    if alpha == 0:
        out = np.zeros(n_max + 1, dtype=complex)
        out[0] = 1.0
        return out
    log_mag = -abs(alpha) ** 2 / 2 + n * math.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    return np.exp(log_mag) * np.exp(1j * n * np.angle(alpha))


def _sector_generator(s, d, length):
    # basis |d+k, k> (d >= 0), k = 0..length-1; a <-> b swap handles d < 0
    g = np.zeros((length, length))
    k = np.arange(1, length)
    off = s * np.sqrt((d + k) * k)
    g[k - 1, k] = off
    g[k, k - 1] = -off
    return g


def fock_two_mode_squeeze(s: float, seed_alpha: complex = 0.0, n_max: int | None = None,
                          check: bool = True) -> FockState:
    """exp(s ab - s a†b†) applied to |seed_alpha> ⊗ |0>."""
    if not s >= 0:
        raise InvalidArgument(f"s must be non-negative, got {s}")
    n_max = default_n_max(s, seed_alpha) if n_max is None else int(n_max)
    if n_max < 2:
        raise InvalidArgument("n_max must be at least 2")
    psi = np.zeros((n_max + 1, n_max + 1), dtype=complex)
    psi[:, 0] = coherent_amplitudes(seed_alpha, n_max)
    if s > 0:
        out = np.zeros_like(psi)
        for d in range(-n_max, n_max + 1):
            length = n_max + 1 - abs(d)
            k = np.arange(length)
            ia, ib = (d + k, k) if d >= 0 else (k, k - d)
            prop = expm(_sector_generator(s, abs(d), length))
            out[ia, ib] = prop @ psi[ia, ib]
        psi = out
    state = FockState(2, n_max, psi)
    return _check_leakage(state) if check else state


def tmsv_closed_form(s: float, n_max: int | None = None, check: bool = True) -> FockState:
    """Two-mode squeezed vacuum Σ (-tanh s)^n / cosh s |n, n>."""
    if not s >= 0:
        raise InvalidArgument(f"s must be non-negative, got {s}")
    n_max = default_n_max(s) if n_max is None else int(n_max)
    psi = np.zeros((n_max + 1, n_max + 1), dtype=complex)
    n = np.arange(n_max + 1)
    psi[n, n] = (-math.tanh(s)) ** n / math.cosh(s)
    state = FockState(2, n_max, psi)
    return _check_leakage(state) if check else state


def thermal_distribution(nbar: float, n_max: int) -> np.ndarray:
    """Photon-number distribution of a thermal mode with mean ``nbar``."""
    if not nbar >= 0:
        raise InvalidArgument("nbar must be non-negative")
    n = np.arange(n_max + 1)
    p = nbar**n / (1 + nbar) ** (n + 1)
    if 1 - p.sum() > LEAKAGE_TOL:
        raise TruncationError(f"thermal tail beyond n_max={n_max} is {1 - p.sum():.3g}")
    return p


def _distribution(state_or_dist):
    if isinstance(state_or_dist, FockState):
        return state_or_dist.probabilities
    return np.asarray(state_or_dist, dtype=float)


def fock_loss(state, mode: int, eta: float) -> np.ndarray:
    """Joint number distribution after power transmission ``eta`` on ``mode``."""
    if not 0 <= eta <= 1:
        raise InvalidArgument(f"eta must be in [0, 1], got {eta}")
    p = _distribution(state)
    if not 0 <= mode < p.ndim:
        raise InvalidArgument(f"mode {mode} out of range")
    n = np.arange(p.shape[mode])
    thin = binom.pmf(n[None, :], n[:, None], eta)  # thin[n, k] = P(k kept | n)
    return np.moveaxis(np.tensordot(p, thin, axes=([mode], [0])), -1, mode)


def fock_number_stats(state, weights: Sequence[float]) -> tuple:
    """Exact (mean, var) of Σ w_j n_j over the truncated distribution."""
    p = _distribution(state)
    w = np.asarray(weights, dtype=float)
    if w.size != p.ndim:
        raise InvalidArgument(f"expected {p.ndim} weights, got {w.size}")
    total = np.zeros(p.shape)
    for j, wj in enumerate(w):
        shape = [1] * p.ndim
        shape[j] = -1
        total = total + wj * np.arange(p.shape[j]).reshape(shape)
    mean = float(np.sum(p * total))
    var = float(np.sum(p * (total - mean) ** 2))
    return mean, var


@dataclass(frozen=True)
class PairSpec:
    """One squeezed pair: squeeze ``s``, probe seed ``alpha``, power transmissions."""

    s: float = 0.0
    alpha: complex = 0.0
    eta_probe: float = 1.0
    eta_conjugate: float = 1.0


@dataclass(frozen=True)
class Scenario:
    name: str
    pairs: tuple = field(default_factory=lambda: (PairSpec(),))
    n_max: int | None = None


WEIGHT_BATTERY = {
    "probe": (1.0, 0.0),
    "conjugate": (0.0, 1.0),
    "difference": (1.0, -1.0),
    "sum": (1.0, 1.0),
}


def _gaussian_pair_state(pairs):
    M = len(pairs)
    eye = np.eye(M)
    state = vacuum_state(M)
    for i, p in enumerate(pairs):
        state = seed_coherent(state, "probe", eye[i], p.alpha)
    t = BogoliubovTransform.from_pairs(M, eye, eye, [p.s for p in pairs])
    state = apply_bogoliubov(state, t)
    state = state.apply_mask("probe", np.sqrt([p.eta_probe for p in pairs]))
    return state.apply_mask("conjugate", np.sqrt([p.eta_conjugate for p in pairs]))


def _fock_pair_distribution(p, n_max):
    if p.s > 0.5 + 1e-12 or abs(p.alpha) ** 2 > 4 + 1e-12:
        raise InvalidArgument("oracle scenarios are limited to s <= 0.5 and |alpha|² <= 4")
    dist = fock_two_mode_squeeze(p.s, p.alpha, n_max).probabilities
    return fock_loss(fock_loss(dist, 0, p.eta_probe), 1, p.eta_conjugate)


def _rel_dev(g, f):
    return abs(g - f) / max(abs(f), 1e-8)


def compare_gaussian_fock(scenario: Scenario) -> float:
    """Max relative deviation of mean, variance and Q over the weight battery.

    Independent pairs are run through the oracle one at a time; their
    number moments add.
    """
    pairs = scenario.pairs
    g_state = _gaussian_pair_state(pairs)
    dists = [_fock_pair_distribution(p, scenario.n_max) for p in pairs]
    M = len(pairs)
    worst = 0.0
    for wp, wc in WEIGHT_BATTERY.values():
        f_mean = f_var = f_sql = 0.0
        for d in dists:
            m, v = fock_number_stats(d, (wp, wc))
            f_mean += m
            f_var += v
            f_sql += fock_number_stats(d, (abs(wp), abs(wc)))[0]
        w = np.concatenate([np.full(M, wp), np.full(M, wc)])
        g_mean = g_state.photon_mean(w)
        g_var = g_state._variance(w, g_state.mean_photons())
        worst = max(worst, _rel_dev(g_mean, f_mean), _rel_dev(g_var, f_var))
        if f_sql > 1e-12:
            g_q = g_state.detector_noise(w).mandel_Q
            worst = max(worst, _rel_dev(g_q, f_var / f_sql - 1))
    return worst


def standard_battery() -> list:
    """Scenarios spanning vacuum, coherent, squeezed vacuum, seeded and lossy pairs."""
    P = PairSpec
    return [
        Scenario("vacuum"),
        Scenario("coherent |a|^2=1", (P(alpha=1.0),)),
        Scenario("coherent |a|^2=4 eta=0.5", (P(alpha=2.0, eta_probe=0.5),)),
        Scenario("tmsv s=0.1", (P(s=0.1),)),
        Scenario("tmsv s=0.3", (P(s=0.3),)),
        Scenario("tmsv s=0.5", (P(s=0.5),)),
        Scenario("tmsv s=0.5 eta=0.9", (P(s=0.5, eta_probe=0.9, eta_conjugate=0.9),)),
        Scenario("tmsv s=0.3 eta=0.5", (P(s=0.3, eta_probe=0.5, eta_conjugate=0.5),)),
        Scenario("seeded s=0.3 |a|^2=1", (P(s=0.3, alpha=1.0),)),
        Scenario("seeded s=0.1 |a|^2=4", (P(s=0.1, alpha=2.0),)),
        Scenario("seeded s=0.5 |a|^2=4 eta=0.9",
                 (P(s=0.5, alpha=2.0, eta_probe=0.9, eta_conjugate=0.9),)),
        Scenario("seeded s=0.5 |a|^2=1 eta=0.5/0.9",
                 (P(s=0.5, alpha=1.0, eta_probe=0.5, eta_conjugate=0.9),)),
        Scenario("seeded s=0.3 complex a eta=0.9",
                 (P(s=0.3, alpha=2.0 * np.exp(0.7j), eta_probe=0.9, eta_conjugate=0.9),)),
        Scenario("two pairs s=0.5/0.3 seeded eta=0.9",
                 (P(s=0.5, alpha=1.0, eta_probe=0.9, eta_conjugate=0.9),
                  P(s=0.3, alpha=2.0, eta_probe=0.9, eta_conjugate=0.9))),
    ]


@dataclass(frozen=True)
class BatteryResult:
    rows: tuple  # (scenario name, deviation)
    tolerance: float
    runtime_s: float

    @property
    def max_deviation(self) -> float:
        return max(d for _, d in self.rows)

    @property
    def passed(self) -> bool:
        return self.max_deviation < self.tolerance


def run_battery(scenarios=None, tolerance: float = 1e-6) -> BatteryResult:
    scenarios = standard_battery() if scenarios is None else scenarios
    start = time.perf_counter()
    rows = tuple((sc.name, compare_gaussian_fock(sc)) for sc in scenarios)
    return BatteryResult(rows, tolerance, time.perf_counter() - start)
