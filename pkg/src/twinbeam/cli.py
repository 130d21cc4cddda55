"""Command-line entry point: ``twinbeam <subcommand> --config run.json``.

Each run writes ``<sub>.csv``, ``<sub>.json`` and ``config.resolved.json``
into the output directory. Exit status: 0 success, 2 invalid input,
3 numerical failure (including a failed oracle gate).
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import experiments as ex
from .config import RunConfig, parse_config, parse_override
from .errors import InvalidArgument, NumericalFailure
from .oracle import run_battery

log = logging.getLogger("twinbeam")

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3


def _payload(name, config, **parts):
    return {"experiment": name, "config": config.to_dict(), **parts}


def _angle_sweep(config, out, args):
    r = ex.run_angle_sweep(config)
    ex.write_csv(out / "angle-sweep.csv", r.columns, r.data)
    ex.write_json(out / "angle-sweep.json", _payload("angle-sweep", config, **ex.scan_summary(r)))
    return f"dip full width {r.derived['dip_full_width_mrad']:.3f} mrad, best noise {r.derived['min_noise_db']:.3f} dB"


def _mandel_probe(config, out, args):
    att, clip = ex.run_mandel_probe(config)
    ex.write_series_csv(out / "mandel-probe.csv", {"attenuation": att, "clipping": clip})
    ex.write_json(out / "mandel-probe.json", _payload("mandel-probe", config, **ex.scan_summary(clip)))
    return f"Q(1) = {att.derived['Q_full']:.4f}, iris crossover {att.derived['iris_crossover_diameter_mrad']:.3f} mrad"


def _mandel_diff(config, out, args):
    att, sym, anti = ex.run_mandel_diff(config)
    ex.write_series_csv(out / "mandel-diff.csv",
                        {"attenuation": att, "symmetric": sym, "antisymmetric": anti})
    ex.write_json(out / "mandel-diff.json", _payload("mandel-diff", config, **ex.scan_summary(att)))
    return f"Q(1) = {att.derived['Q_full']:.4f}"


def _slit_scan(config, out, args):
    orientations = ["polar", "azimuthal"] if args.orientation == "both" else [args.orientation]
    results = {o: ex.run_slit_scan(config, o) for o in orientations}
    ex.write_series_csv(out / "slit-scan.csv", results)
    thetas = [r.derived.get("theta_c_mrad") for r in results.values()]
    derived = {"theta_c_mean_mrad": float(np.mean(thetas)) if None not in thetas else None}
    ex.write_json(out / "slit-scan.json", _payload(
        "slit-scan", config, derived=derived, scans={o: ex.scan_summary(r) for o, r in results.items()}))
    mean = derived["theta_c_mean_mrad"]
    return "theta_c unavailable (see JSON)" if mean is None else f"theta_c = {mean:.3f} mrad"


def _two_spot(config, out, args):
    r = ex.run_two_spot(config)
    rows = [("joint", r.joint_db), ("pair_a", r.pair_a_db), ("pair_b", r.pair_b_db),
            ("single_gaussian", r.single_db), ("pair_a_alone", r.pair_a_alone_db)]
    ex.write_csv(out / "two-spot.csv", ("detector", "noise_db"), rows)
    derived = {name + "_db": v for name, v in rows}
    derived.update(spot_overlap=r.spot_overlap, s0=r.s0, independence_shift_db=r.independence_shift_db)
    ex.write_json(out / "two-spot.json", _payload("two-spot", config, derived=derived, metadata=r.metadata))
    return f"joint {r.joint_db:.3f} dB, pairs {r.pair_a_db:.3f} / {r.pair_b_db:.3f} dB"


def _lg(config, out, args):
    ell = config.lg_ell if args.ell is None else args.ell
    r = ex.run_lg(config, ell)
    q = r.grid.coords("probe")
    rows = zip(q[:, 0], q[:, 1], r.probe_interferogram.ravel(), r.conjugate_interferogram.ravel())
    ex.write_csv(out / "lg.csv", ("theta_x_mrad", "theta_y_mrad", "probe_intensity", "conjugate_intensity"),
                 rows)
    derived = {"ell": ell, "conjugate_ell": r.conjugate_ell, "probe_fringes": r.probe_fringes,
               "conjugate_fringes": r.conjugate_fringes, "squeezing_db": r.squeezing_db,
               "gaussian_seed_db": r.gaussian_db, "s0": r.s0,
               "conjugate_overlaps": {str(k): v for k, v in sorted(r.overlaps.items())}}
    ex.write_json(out / "lg.json", _payload("lg", config, derived=derived, metadata=r.metadata))
    return f"conjugate ell {r.conjugate_ell}, fringes {r.probe_fringes}/{r.conjugate_fringes}, {r.squeezing_db:.3f} dB"


class OracleGateFailed(NumericalFailure):
    pass


def _oracle_verify(config, out, args):
    res = run_battery()
    ex.write_csv(out / "oracle-verify.csv", ("scenario", "max_rel_deviation"), res.rows)
    ex.write_json(out / "oracle-verify.json", _payload(
        "oracle-verify", config, derived={"max_deviation": res.max_deviation, "passed": res.passed,
                                          "tolerance": res.tolerance}))
    width = max(len(n) for n, _ in res.rows)
    for name, dev in res.rows:
        print(f"{name:<{width}}  {dev:.3e}  {'ok' if dev < res.tolerance else 'FAIL'}")
    if not res.passed:
        raise OracleGateFailed(f"max deviation {res.max_deviation:.3e} exceeds {res.tolerance:g}")
    return f"all {len(res.rows)} scenarios below {res.tolerance:g}"


COMMANDS = {
    "angle-sweep": _angle_sweep,
    "mandel-probe": _mandel_probe,
    "mandel-diff": _mandel_diff,
    "slit-scan": _slit_scan,
    "two-spot": _two_spot,
    "lg": _lg,
    "oracle-verify": _oracle_verify,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="twinbeam", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", help="JSON run configuration (defaults if omitted)")
    p.add_argument("--out", help="output directory (overrides output_dir)")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override one configuration key; repeatable")
    p.add_argument("--ell", type=int, help="OAM index for the lg command")
    p.add_argument("--orientation", choices=["polar", "azimuthal", "both"], default="both",
                   help="slit orientation for slit-scan")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def resolve_config(args) -> RunConfig:
    config = parse_config(args.config) if args.config else RunConfig()
    overrides = dict(parse_override(item) for item in args.set)
    if args.out:
        overrides["output_dir"] = args.out
    return config.with_overrides(**overrides) if overrides else config


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")
    try:
        config = resolve_config(args)
        out = Path(config.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "config.resolved.json").write_text(config.to_json(), encoding="utf-8")
        log.info("running %s into %s", args.command, out)
        summary = COMMANDS[args.command](config, out, args)
    except InvalidArgument as exc:
        print(f"twinbeam: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalFailure as exc:
        print(f"twinbeam: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    print(f"{args.command}: {summary}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
