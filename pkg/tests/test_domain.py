"""Grid construction, masks, quadrature, and boundary arm geometry."""

import math

import numpy as np
import pytest

from maxheat import ConfigError, build_domain, integrate_faces, integrate_nodal


def test_rectangle_shapes_and_coords():
    dom = build_domain("rectangle", 16)
    assert dom.nx == 16 and dom.ny == 16
    assert dom.h == pytest.approx(1.0 / 16)
    assert dom.node_x[0] == 0.0 and dom.node_x[-1] == pytest.approx(1.0)
    assert dom.quad_weights.shape == (17, 17)
    assert dom.face_wx.shape == (17, 16)
    assert dom.face_wy.shape == (16, 17)


def test_rectangle_masks():
    dom = build_domain("rectangle", 8)
    assert dom.interior.sum() == 7 * 7
    assert dom.boundary.sum() == 9 * 9 - 7 * 7
    assert not dom.exterior.any()
    # Edge ring is pinned, not free.
    assert not dom.theta_free[0, :].any()
    assert dom.theta_free.sum() == dom.interior.sum()


def test_rectangle_quadrature_exact_for_constants():
    dom = build_domain("rectangle", 12)
    ones = np.ones(dom.node_shape)
    assert integrate_nodal(ones, dom) == pytest.approx(1.0, abs=1e-15)
    fx = np.ones_like(dom.face_wx)
    fy = np.ones_like(dom.face_wy)
    assert integrate_faces(fx, fy, dom) == pytest.approx(2.0, abs=1e-15)


def test_rectangle_quadrature_trapezoid_accuracy():
    # Trapezoid rule integrates smooth fields at second order.
    errs = []
    for n in (16, 32):
        dom = build_domain("rectangle", n)
        X, Y = dom.node_grids()
        f = np.sin(math.pi * X) * np.sin(math.pi * Y)
        exact = 4.0 / math.pi**2
        errs.append(abs(integrate_nodal(f, dom) - exact))
    assert errs[1] < errs[0] / 3.5


def test_rectangle_nonsquare():
    dom = build_domain("rectangle", 10, width=1.0, height=2.0)
    assert dom.ny == 20
    assert integrate_nodal(np.ones(dom.node_shape), dom) == pytest.approx(2.0)


def test_rectangle_incommensurate_height_rejected():
    with pytest.raises(ConfigError, match="height"):
        build_domain("rectangle", 10, width=1.0, height=1.05)


def test_annulus_mask_symmetry():
    dom = build_domain("annulus", 48)
    inside = dom.inside_mask
    # Coordinates are symmetric by construction, so masks must be too.
    assert np.array_equal(inside, inside[::-1, :])
    assert np.array_equal(inside, inside[:, ::-1])
    assert np.array_equal(inside, inside.T)
    assert np.array_equal(dom.interior, dom.interior.T)


def test_annulus_mask_definition():
    dom = build_domain("annulus", 32)
    X, Y = dom.node_grids()
    r2 = X * X + Y * Y
    expect = (r2 > 1.0) & (r2 < 2.0)
    assert np.array_equal(dom.inside_mask, expect)
    assert np.array_equal(dom.interior | dom.boundary, dom.inside_mask)
    assert not (dom.interior & dom.boundary).any()
    # Interior nodes have all four neighbors inside.
    ii, jj = np.nonzero(dom.interior)
    for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        assert dom.inside_mask[ii + di, jj + dj].all()
    # Boundary nodes touch at least one exterior neighbor.
    ii, jj = np.nonzero(dom.boundary)
    touches = np.zeros(len(ii), dtype=bool)
    for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        touches |= dom.exterior[ii + di, jj + dj]
    assert touches.all()


def test_annulus_area_converges_to_pi():
    errs = []
    for n in (64, 128, 256):
        dom = build_domain("annulus", n)
        errs.append(abs(dom.area() - math.pi) / math.pi)
    assert errs[0] < 0.02
    assert errs[0] > errs[1] > errs[2]


def test_annulus_face_weights_cover_area():
    dom = build_domain("annulus", 96)
    wx = float(np.sum(dom.face_wx))
    wy = float(np.sum(dom.face_wy))
    assert wx == pytest.approx(dom.area(), rel=1e-12)
    assert wy == pytest.approx(dom.area(), rel=1e-12)


def test_annulus_static_field_energy_quadrature():
    # integral of 1/r^2 over the ring is pi log 2; the face rule must hit
    # it well inside the 1% budget the energy checks rely on.
    exact = math.pi * math.log(2.0)
    for n, tol in ((64, 0.01), (128, 0.005)):
        dom = build_domain("annulus", n)
        xf, yf = dom.bx_grids()
        r2x = xf * xf + yf * yf
        fx = np.where(dom.face_wx > 0, (yf / r2x) ** 2, 0.0)
        xf, yf = dom.by_grids()
        r2y = xf * xf + yf * yf
        fy = np.where(dom.face_wy > 0, (xf / r2y) ** 2, 0.0)
        val = integrate_faces(fx, fy, dom)
        assert abs(val - exact) / exact < tol


def test_annulus_arm_coefficients():
    dom = build_domain("annulus", 40)
    h = dom.h
    base = 1.0 / (h * h)
    for c in (dom.lap_ce, dom.lap_cw, dom.lap_cn, dom.lap_cs):
        # Zero off the free set, at least the plain coefficient on it
        # (shortened arms only increase the coupling).
        assert not c[~dom.theta_free].any()
        free_vals = c[dom.theta_free]
        assert (free_vals >= base * (1.0 - 1e-12)).all()
        # Clamp caps the growth at 10x.
        assert (free_vals <= base * 10.0 * (1.0 + 1e-12)).all()
    # Somewhere along the ring an arm must actually be shortened.
    assert (dom.lap_ce[dom.theta_free] > base * 1.01).any()
    # Symmetry: east arms mirror west arms under x -> -x.
    assert np.allclose(dom.lap_ce, dom.lap_cw[::-1, :], rtol=1e-12)
    assert np.allclose(dom.lap_cn, dom.lap_cs[:, ::-1], rtol=1e-12)


def test_annulus_arm_lengths_match_circles():
    dom = build_domain("annulus", 24)
    h = dom.h
    ii, jj = np.nonzero(dom.theta_free)
    checked = 0
    for i, j in zip(ii, jj):
        if dom.theta_free[i + 1, j]:
            continue
        # East neighbor is exterior: the stored arm must solve the circle
        # equation along the x axis (unless the clamp kicked in).
        arm = 1.0 / (h * dom.lap_ce[i, j])
        x, y = dom.node_x[i] + arm, dom.node_y[j]
        r2 = x * x + y * y
        on_circle = min(abs(r2 - 1.0), abs(r2 - 2.0)) < 1e-10
        assert on_circle or arm == pytest.approx(0.1 * h)
        checked += 1
    assert checked > 0


def test_domain_arrays_are_write_protected():
    dom = build_domain("annulus", 16)
    with pytest.raises(ValueError):
        dom.quad_weights[0, 0] = 1.0
    with pytest.raises(ValueError):
        dom.interior[0, 0] = True


def test_build_domain_rejections():
    with pytest.raises(ConfigError, match="at least 8"):
        build_domain("rectangle", 4)
    with pytest.raises(ConfigError, match="even"):
        build_domain("annulus", 33)
    with pytest.raises(ConfigError, match="kind"):
        build_domain("hexagon", 16)
    with pytest.raises(ConfigError, match="integer"):
        build_domain("rectangle", 16.0)


def test_integrate_shape_checks():
    dom = build_domain("rectangle", 8)
    with pytest.raises(ConfigError, match="shape"):
        integrate_nodal(np.ones((3, 3)), dom)
    with pytest.raises(ConfigError, match="shape"):
        integrate_faces(np.ones((3, 3)), np.ones((3, 3)), dom)
