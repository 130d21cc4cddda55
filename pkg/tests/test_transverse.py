import csv

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twinbeam.errors import InvalidArgument, UndefinedFringeCount
from twinbeam.transverse import (count_fringes, gaussian_mode, inner_product, interferogram,
                                 lg_mode, make_grid, mirror_image, point_reflection, superpose,
                                 write_field_csv)


@pytest.fixture
def grid2d():
    return make_grid(6.0, 48, 2)


def test_grid_geometry():
    g = make_grid(16, 256, 1)
    assert g.pitch == pytest.approx(0.125)
    c = g.axis_coords
    assert c[0] == pytest.approx(-c[-1])
    assert not np.any(c == 0)
    assert g.pixel_area == pytest.approx(0.125)
    g2 = make_grid(12, 64, 2)
    assert g2.size == 4096 and g2.pixel_area == pytest.approx(0.375**2)


@pytest.mark.parametrize("kw", [dict(half_extent=0, n_side=8), dict(half_extent=1, n_side=1),
                                dict(half_extent=1, n_side=8, dims=3),
                                dict(half_extent=1, n_side=8, dims=1, axis="x", line_offset=1.0),
                                dict(half_extent=1, n_side=8, dims=2, axis="y")])
def test_grid_rejects_bad_arguments(kw):
    with pytest.raises(InvalidArgument):
        make_grid(**kw)


def test_y_cut_places_beams_on_mirrored_lines():
    g = make_grid(4, 16, 1, "y", 7.0)
    assert np.all(g.coords("probe")[:, 0] == 7.0)
    assert np.all(g.coords("conjugate")[:, 0] == -7.0)
    assert np.array_equal(g.coords("probe")[:, 1], g.axis_coords)


def test_gaussian_is_normalized_and_peaked(grid2d):
    f = gaussian_mode(grid2d, (1.0, -0.5), 1.2)
    assert f.is_normalized()
    q = grid2d.coords()[np.argmax(f.intensity)]
    assert np.hypot(q[0] - 1.0, q[1] + 0.5) <= grid2d.pitch


def test_lg_modes_are_orthonormal(grid2d):
    modes = [lg_mode(grid2d, (0.0, 0.0), 1.5, ell) for ell in range(-3, 4)]
    gram = np.array([[inner_product(a, b) for b in modes] for a in modes])
    assert np.allclose(gram, np.eye(len(modes)), atol=1e-6)


def test_lg_rejects_bad_waist_and_ell(grid2d):
    with pytest.raises(InvalidArgument):
        lg_mode(grid2d, (0, 0), 0.0, 1)
    with pytest.raises(InvalidArgument):
        lg_mode(grid2d, (0, 0), 1.0, 1.5)


def test_superpose_and_cancellation(grid2d):
    a = gaussian_mode(grid2d, (-2, 0), 0.8)
    b = gaussian_mode(grid2d, (2, 0), 0.8)
    s = superpose([(a, 1.0), (b, 1.0)])
    assert s.is_normalized()
    o = inner_product(a, b).real
    assert abs(inner_product(a, s)) ** 2 == pytest.approx((1 + o) / 2, abs=1e-12)
    with pytest.raises(InvalidArgument):
        superpose([(a, 1.0), (a, -1.0)])
    with pytest.raises(InvalidArgument):
        superpose([(a, 1.0), (gaussian_mode(grid2d, (0, 0), 1.0, "conjugate"), 1.0)])


def test_mirror_flips_oam(grid2d):
    f = lg_mode(grid2d, (0, 0), 1.5, 2)
    m = mirror_image(f, "x")
    assert abs(inner_product(lg_mode(grid2d, (0, 0), 1.5, -2), m)) == pytest.approx(1.0, abs=1e-9)


def test_y_cut_reflection_swaps_beams():
    g = make_grid(4, 16, 1, "y", 7.0)
    f = gaussian_mode(g, (7.0, 1.0), 1.0)
    m = mirror_image(f, "y")
    assert m.beam == "conjugate"
    assert np.array_equal(m.amplitude, f.amplitude)


@settings(max_examples=25, deadline=None)
@given(x=st.floats(-3, 3), y=st.floats(-3, 3), axis=st.sampled_from(["x", "y"]))
def test_mirror_is_an_involution(x, y, axis):
    g = make_grid(6.0, 24, 2)
    f = lg_mode(g, (x, y), 1.3, 1)
    back = mirror_image(mirror_image(f, axis), axis)
    assert np.array_equal(back.amplitude, f.amplitude)
    p = point_reflection(f)
    expect = lg_mode(g, (-x, -y), 1.3, 1)
    # a point reflection maps the vortex onto one of the same handedness
    assert abs(inner_product(expect, p)) == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("ell", [0, 1, 2, 3])
def test_fringe_count_of_lg_against_mirror(grid2d, ell):
    f = lg_mode(grid2d, (0.0, 0.0), 1.8, ell)
    _, n = interferogram(f, mirror_image(f, "x"))
    assert n == 2 * ell


def test_fringes_zero_intensity():
    with pytest.raises(UndefinedFringeCount):
        count_fringes(np.zeros((8, 8)))


def test_interferogram_needs_2d():
    g = make_grid(4, 16, 1)
    f = gaussian_mode(g, (0, 0), 1.0)
    with pytest.raises(InvalidArgument):
        interferogram(f, f)


def test_field_csv(tmp_path, grid2d):
    f = gaussian_mode(grid2d, (0, 0), 1.0)
    path = tmp_path / "f.csv"
    write_field_csv(path, f)
    raw = path.read_bytes()
    assert b"\r\n" not in raw
    rows = list(csv.reader(raw.decode().splitlines()))
    assert rows[0] == ["theta_x_mrad", "theta_y_mrad", "re", "im"]
    assert len(rows) == grid2d.size + 1
    assert complex(float(rows[5][2]), float(rows[5][3])) == f.amplitude[4]
