import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from twinbeam.detection import (all_pass, attenuator_mask, edge_mask, iris_mask, mirror_mask,
                                power_transmission, slit_mask)
from twinbeam.errors import InvalidArgument
from twinbeam.transverse import ModeField, gaussian_mode, make_grid, mirror_image


@pytest.fixture(scope="module")
def fine():
    return make_grid(5.0, 200, 2)


def test_iris_gaussian_transmission(fine):
    w = 1.0
    f = gaussian_mode(fine, (0, 0), w)
    # independent quadrature of the radial intensity profile
    num, _ = integrate.quad(lambda r: r * math.exp(-2 * r**2 / w**2), 0, w)
    den, _ = integrate.quad(lambda r: r * math.exp(-2 * r**2 / w**2), 0, np.inf)
    assert num / den == pytest.approx(1 - math.exp(-2), abs=1e-12)
    assert power_transmission(iris_mask(fine, (0, 0), w), f) == pytest.approx(num / den, abs=5e-3)


def test_large_apertures_pass_everything(fine):
    f = gaussian_mode(fine, (1, 0), 1.0)
    assert power_transmission(iris_mask(fine, (0, 0), 10.0), f) == 1.0
    assert power_transmission(slit_mask(fine, (0, 0), 10.0, "polar"), f) == 1.0
    assert power_transmission(all_pass(fine), f) == 1.0



@pytest.mark.parametrize("bad", [lambda g: iris_mask(g, (0, 0), 0.0),
                                 lambda g: slit_mask(g, (0, 0), -1.0, "polar"),
                                 lambda g: slit_mask(g, (0, 0), 1.0, "diagonal"),
                                 lambda g: edge_mask(g, 0.0, "left"),
                                 lambda g: attenuator_mask(g, 1.5)])
def test_invalid_masks(fine, bad):
    with pytest.raises(InvalidArgument):
        bad(fine)


def test_slit_orientation(fine):
    polar = slit_mask(fine, (1.0, 0.0), 0.5, "polar")
    az = slit_mask(fine, (0.0, 1.0), 0.5, "azimuthal")
    q = fine.coords()
    assert np.all(np.abs(q[polar.t == 1, 0] - 1.0) <= 0.25)
    assert np.all(np.abs(q[az.t == 1, 1] - 1.0) <= 0.25)


def test_edges_beyond_grid(fine):
    assert edge_mask(fine, 100.0, "below").t.all()
    assert not edge_mask(fine, 100.0, "above").t.any()


def test_attenuator(fine):
    f = gaussian_mode(fine, (0.3, -0.2), 0.7)
    for p in (0.0, 0.5, 1.0):
        assert power_transmission(attenuator_mask(fine, p), f) == pytest.approx(p)


def test_symmetric_edges_clip_equal_fractions():
    g = make_grid(16, 256, 1)
    p = gaussian_mode(g, (7, 0), 2.0)
    c = gaussian_mode(g, (-7, 0), 2.0, "conjugate")
    for d in (-1.0, 0.0, 0.5):
        pm = edge_mask(g, 7 + d, "below", beam="probe")
        cm = edge_mask(g, -7 - d, "above", beam="conjugate")
        assert power_transmission(pm, p) == pytest.approx(power_transmission(cm, c), abs=1e-14)


def test_zero_field_rejected(fine):
    with pytest.raises(InvalidArgument):
        power_transmission(all_pass(fine), ModeField(fine, np.zeros(fine.size)))


def test_json_descriptor(fine):
    import json
    m = slit_mask(fine, (1, 2), 0.4, "azimuthal") * iris_mask(fine, (0, 0), 3.0)
    d = json.loads(json.dumps(m.to_json()))
    assert d["kind"] == "composite" and d["parts"][0]["orientation"] == "azimuthal"


small = make_grid(4.0, 24, 2)
masks = st.one_of(
    st.builds(lambda c, r: iris_mask(small, c, r), st.tuples(st.floats(-3, 3), st.floats(-3, 3)), st.floats(0.1, 5)),
    st.builds(lambda c, w, o: slit_mask(small, c, w, o), st.tuples(st.floats(-3, 3), st.floats(-3, 3)),
              st.floats(0.1, 4), st.sampled_from(["polar", "azimuthal"])),
    st.builds(lambda p, k, o: edge_mask(small, p, k, o), st.floats(-5, 5), st.sampled_from(["above", "below"]),
              st.sampled_from(["polar", "azimuthal"])),
    st.builds(lambda p: attenuator_mask(small, p), st.floats(0, 1)),
)


@settings(max_examples=40, deadline=None)
@given(a=masks, b=masks, x=st.floats(-2, 2), y=st.floats(-2, 2))
def test_mask_algebra(a, b, x, y):
    f = gaussian_mode(small, (x, y), 1.2)
    ab = a * b
    assert np.array_equal(ab.t, a.t * b.t)
    assert power_transmission(ab, f) <= min(power_transmission(a, f), power_transmission(b, f)) + 1e-15
    if a.is_binary:
        assert np.array_equal((a * a).t, a.t)
    for axis in ("x", "y"):
        assert power_transmission(mirror_mask(a, axis), mirror_image(f, axis)) == pytest.approx(
            power_transmission(a, f), rel=1e-12, abs=1e-15)
