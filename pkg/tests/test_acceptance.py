"""Acceptance criteria, one test per criterion at its stated tolerance.

Each test records a pass/fail line that the session summary prints under
"acceptance criteria" before asserting.
"""

import math
import time

import numpy as np
import pytest

from twinbeam import cli
from twinbeam import experiments as ex
from twinbeam.gain import mode_count_estimate, phase_mismatch_angle, rank_one_kernel, schmidt_decompose
from twinbeam.gaussian_state import amplify
from twinbeam.oracle import run_battery
from twinbeam.transverse import gaussian_mode

G, ETA = 4.5, 0.9
T_SAMPLE = (0.2, 0.9)


def _in_window(r):
    return (r.x >= T_SAMPLE[0]) & (r.x <= T_SAMPLE[1])


def _theta0_noise(config, eta):
    grid = ex.grid_1d(config)
    seed = gaussian_mode(grid, (config.theta0_mrad, 0.0), config.seed_waist_mrad)
    schmidt, _ = ex.amplifier(config, grid, seed)
    return ex.difference_noise(amplify(schmidt, seed, math.sqrt(config.seed_photons)), eta).rel_sql_db


def test_1_oracle_gate(acceptance_report):
    res = run_battery()
    ok = len(res.rows) >= 12 and res.max_deviation < 1e-6 and res.runtime_s < 60
    acceptance_report("1", ok, f"{len(res.rows)} scenarios, max dev {res.max_deviation:.2e}, "
                               f"{res.runtime_s:.2f} s")
    assert ok


def test_2_squeezing_point(acceptance_report, config):
    model = 10 * math.log10(1 - ETA + ETA / (2 * G - 1))
    sim = _theta0_noise(config, ETA)
    ok = abs(sim - (-6.73)) <= 0.05 and abs(model - (-6.73)) <= 0.05 and abs(-6.5 - model) <= 0.3
    acceptance_report("2", ok, f"simulated {sim:.4f} dB, model {model:.4f} dB, measured -6.5 dB")
    assert ok


def test_3_ideal_limit(acceptance_report, config):
    sim = _theta0_noise(config, 1.0)
    ok = abs(sim - (-9.03)) <= 0.02 and abs(10 * math.log10(1 / (2 * G - 1)) - sim) < 1e-3
    acceptance_report("3", ok, f"{sim:.4f} dB")
    assert ok


def test_4_mismatch_angle(acceptance_report):
    th = phase_mismatch_angle(795e-9, 12e-3) * 1e3
    ok = abs(th - 8.14) <= 0.01
    acceptance_report("4", ok, f"{th:.4f} mrad")
    assert ok


def test_5_angular_bandwidth(acceptance_report, config):
    ex.unit_decomposition.cache_clear()
    start = time.perf_counter()
    r = ex.run_angle_sweep(config)
    elapsed = time.perf_counter() - start
    width = r.derived["dip_full_width_mrad"]
    ok = abs(width - 8) <= 4 and elapsed < 120 and config.grid_1d_n_side == 256
    acceptance_report("5", ok, f"dip full width {width:.3f} mrad in {elapsed:.2f} s")
    assert ok


def test_6a_probe_clipping_exceeds_attenuation(acceptance_report, mandel_probe):
    att, clip = mandel_probe
    q1 = att.derived["Q_full"]
    sel = _in_window(clip)
    gap = clip.values[sel] - clip.x[sel] * q1
    ok = sel.sum() > 0 and bool(np.all(gap > 0))
    acceptance_report("6a", ok, f"{sel.sum()} samples, min Q_c - Q_a = {gap.min():.4f}")
    assert ok


def test_6b_symmetric_clipping_below_attenuation(acceptance_report, mandel_diff):
    att, sym, _ = mandel_diff
    q1 = att.derived["Q_full"]
    sel = _in_window(sym)
    gap = sym.values[sel] - sym.x[sel] * q1
    ok = sel.sum() > 0 and bool(np.all(gap < 0))
    acceptance_report("6b sym", ok, f"{sel.sum()} samples, max Q_cS - Q_a = {gap.max():.4f}")
    assert ok


@pytest.mark.xfail(strict=True, reason="Q_cA crosses zero near t = 0.85 at gain 4.5; "
                                       "in the delta-correlated limit it vanishes exactly at t = 0.9")
def test_6b_antisymmetric_clipping_positive(acceptance_report, mandel_diff):
    _, _, anti = mandel_diff
    sel = _in_window(anti)
    bad = anti.x[sel][anti.values[sel] <= 0]
    ok = sel.sum() > 0 and bad.size == 0
    detail = f"{sel.sum()} samples, min Q_cA = {anti.values[sel].min():.4f}"
    if bad.size:
        detail += f"; Q_cA <= 0 for t in [{bad.min():.3f}, {bad.max():.3f}]"
    acceptance_report("6b anti", ok, detail)
    assert ok


def test_6c_attenuation_branches(acceptance_report, mandel_probe, mandel_diff):
    worst = 0.0
    for att in (mandel_probe[0], mandel_diff[0]):
        q1 = att.derived["Q_full"]
        worst = max(worst, float(np.max(np.abs(att.values - att.x * q1) / np.abs(att.x * q1))))
    ok = worst < 1e-9
    acceptance_report("6c", ok, f"max relative deviation {worst:.2e}")
    assert ok


def test_7_single_mode_control(acceptance_report, config):
    grid = ex.grid_1d(config)
    u = gaussian_mode(grid, (config.theta0_mrad, 0.0), config.seed_waist_mrad)
    v = gaussian_mode(grid, (-config.theta0_mrad, 0.0), config.seed_waist_mrad, "conjugate")
    one = schmidt_decompose(rank_one_kernel(u, v, math.acosh(math.sqrt(G))))
    att, clip = ex.run_mandel_probe(config, one)
    q1 = att.derived["Q_full"]
    dev = float(np.max(np.abs(clip.values - clip.x * q1) / np.abs(clip.x * q1)))
    ok = one.rank == 1 and dev < 1e-9 and len(clip.x) >= 5
    acceptance_report("7", ok, f"{len(clip.x)} iris samples, max relative gap {dev:.2e}")
    assert ok


def test_8_coherence_area(acceptance_report, slit_scans):
    parts, ok = [], True
    for o, r in slit_scans.items():
        pitch = r.metadata["grid"]["pitch_mrad"]
        off = abs(r.derived["dip_center_mrad"] - r.derived["expected_dip_center_mrad"])
        ok &= off <= pitch
        parts.append(f"{o} dip off by {off:.4f} (pitch {pitch}), theta_c {r.derived['theta_c_mrad']:.3f}")
    mean = float(np.mean([r.derived["theta_c_mrad"] for r in slit_scans.values()]))
    ok &= abs(mean - 1.2) <= 0.4
    acceptance_report("8", ok, "; ".join(parts) + f"; mean theta_c {mean:.3f} mrad")
    assert ok


def test_9_mode_count(acceptance_report, config):
    _, _, total = mode_count_estimate(7, 8, 1.2)
    unit = ex.unit_decomposition(ex.grid_2d(config), config.gain_config())
    n_half = int(np.sum(unit.s >= unit.s[0] / 2))
    ok = 100 <= total <= 130 and total / 2 <= n_half <= 2 * total
    acceptance_report("9", ok, f"estimate {total:.1f}, modes above half maximum {n_half}")
    assert ok


def test_10_two_spot_parallelism(acceptance_report, two_spot, two_spot_far):
    r = two_spot
    ok = (abs(r.joint_db - r.single_db) <= 0.2 and abs(r.pair_a_db - r.joint_db) <= 1
          and abs(r.pair_b_db - r.joint_db) <= 1 and two_spot_far.independence_shift_db < 0.1)
    acceptance_report("10", ok, f"joint {r.joint_db:.3f}, single {r.single_db:.3f}, pairs "
                                f"{r.pair_a_db:.3f}/{r.pair_b_db:.3f} dB, independence shift at "
                                f"{two_spot_far.metadata['spot_separation_mrad']} mrad "
                                f"{two_spot_far.independence_shift_db:.2e} dB")
    assert ok


def test_11_oam_conservation(acceptance_report, lg_runs):
    parts, ok = [], True
    for ell, r in sorted(lg_runs.items()):
        good = (r.conjugate_ell == -ell and r.probe_fringes == 2 * abs(ell)
                and r.conjugate_fringes == 2 * abs(ell) and abs(r.squeezing_db - r.gaussian_db) <= 1)
        ok &= good
        parts.append(f"ell {ell:+d}: conj {r.conjugate_ell:+d}, fringes {r.probe_fringes}/"
                     f"{r.conjugate_fringes}, {r.squeezing_db:.2f} vs {r.gaussian_db:.2f} dB")
    acceptance_report("11", ok, "; ".join(parts))
    assert ok


SUBCOMMANDS = [
    ("angle-sweep",),
    ("mandel-probe",),
    ("mandel-diff",),
    ("slit-scan",),
    ("oracle-verify",),
    # the 2D subcommands run on a coarser grid to keep the double run short
    ("two-spot", "--set", "grid_2d_n_side=32"),
    ("lg", "--set", "grid_2d_n_side=32"),
]


def test_12_determinism(acceptance_report, tmp_path):
    mismatched = []
    for args in SUBCOMMANDS:
        # same output directory: it is part of the echoed configuration
        out = tmp_path / args[0]
        outputs = []
        for _ in range(2):
            assert cli.main([*args, "--out", str(out)]) == 0
            outputs.append([(out / f"{args[0]}.{ext}").read_bytes() for ext in ("csv", "json")])
        if outputs[0] != outputs[1]:
            mismatched.append(args[0])
    ok = not mismatched
    acceptance_report("12", ok, f"{len(SUBCOMMANDS)} subcommands, CSV and JSON byte-identical"
                      if ok else f"differ: {', '.join(mismatched)}")
    assert ok
