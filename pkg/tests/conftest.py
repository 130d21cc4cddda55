import pytest

from twinbeam.config import RunConfig
from twinbeam import experiments as ex

_ACCEPTANCE = {}


@pytest.fixture(scope="session")
def acceptance_report():
    """Record one pass/fail line per acceptance criterion for the session summary."""

    def record(key, passed, detail=""):
        _ACCEPTANCE[key] = (bool(passed), detail)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_ACCEPTANCE, key=lambda k: (int(k.split()[0].rstrip("abcdefgh")), k)):
        passed, detail = _ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if passed else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def config():
    return RunConfig()


@pytest.fixture(scope="session")
def angle_sweep(config):
    return ex.run_angle_sweep(config)


@pytest.fixture(scope="session")
def mandel_probe(config):
    return ex.run_mandel_probe(config)


@pytest.fixture(scope="session")
def mandel_diff(config):
    return ex.run_mandel_diff(config)


@pytest.fixture(scope="session")
def slit_scans(config):
    return {o: ex.run_slit_scan(config, o) for o in ("polar", "azimuthal")}


@pytest.fixture(scope="session")
def two_spot(config):
    return ex.run_two_spot(config)


@pytest.fixture(scope="session")
def two_spot_far(config):
    # four coherence widths apart: beyond the three-width independence threshold
    return ex.run_two_spot(config.with_overrides(spot_separation_mrad=4.0))


@pytest.fixture(scope="session")
def lg_runs(config):
    return {ell: ex.run_lg(config, ell) for ell in (-2, -1, 0, 1, 2)}
