"""Conductivity models, bound audits, constants, and the source term."""

import math

import numpy as np
import pytest

from maxheat import (
    AffineClampedConductivity,
    ConfigError,
    ConstantConductivity,
    PhysicalConstants,
    SourceG,
    TabulatedConductivity,
    build_domain,
    sigma_field,
    validate_bounds,
)
from maxheat.errors import NumericsError
from maxheat.state import ThetaField


def test_constants_positive():
    c = PhysicalConstants(eps=2.0, mu=0.5, kappa=1.0)
    assert c.eps == 2.0
    for bad in ({"eps": 0.0}, {"mu": -1.0}, {"kappa": float("nan")}):
        kwargs = {"eps": 1.0, "mu": 1.0, "kappa": 1.0, **bad}
        with pytest.raises(ConfigError, match=next(iter(bad))):
            PhysicalConstants(**kwargs)


def test_constant_model():
    m = ConstantConductivity(value=2.5)
    assert m.sigma0 == 2.5 and m.sigma1 == 0.0
    xi = np.linspace(-3, 3, 7)
    assert np.all(m.evaluate(xi) == 2.5)
    # Negative conductivity is allowed; the bound is on the magnitude.
    m2 = ConstantConductivity(value=-1.0)
    assert m2.sigma0 == 1.0


def test_constant_model_declared_sigma0_too_small():
    with pytest.raises(ConfigError, match="sigma0"):
        ConstantConductivity(value=2.0, sigma0=1.0)


def test_affine_clamped_evaluation():
    m = AffineClampedConductivity(a=0.0, b=1.0, lo=0.0, hi=5.0)
    # Clamp saturates: sigma(9) = 5.
    assert m.evaluate(np.array([9.0]))[0] == 5.0
    assert m.evaluate(np.array([-1.0]))[0] == 0.0
    assert m.evaluate(np.array([2.0]))[0] == 2.0
    assert m.sigma0 == 5.0 and m.sigma1 == 1.0


def test_affine_clamped_rejections():
    with pytest.raises(ConfigError, match="lo <= hi"):
        AffineClampedConductivity(a=0.0, b=1.0, lo=2.0, hi=1.0)
    with pytest.raises(ConfigError, match="sigma1"):
        AffineClampedConductivity(a=0.0, b=2.0, lo=-10.0, hi=10.0, sigma1=0.5)
    with pytest.raises(ConfigError, match="finite"):
        AffineClampedConductivity(a=float("inf"), b=1.0, lo=0.0, hi=1.0)


def test_tabulated_model():
    m = TabulatedConductivity(xi=np.array([0.0, 1.0, 2.0]), sigma=np.array([1.0, 2.0, 2.5]))
    assert m.sigma0 == 2.5
    assert m.sigma1 == 1.0  # steepest secant
    assert m.evaluate(np.array([0.5]))[0] == pytest.approx(1.5)
    # Flat extension outside the table.
    assert m.evaluate(np.array([-10.0]))[0] == 1.0
    assert m.evaluate(np.array([10.0]))[0] == 2.5


def test_tabulated_requires_increasing_xi():
    with pytest.raises(ConfigError, match="strictly increasing"):
        TabulatedConductivity(xi=np.array([0.0, 1.0, 1.0]), sigma=np.array([1.0, 2.0, 3.0]))


def test_tabulated_jagged_slope_rejected():
    # Declared Lipschitz constant below the steepest secant must reject.
    xi = np.array([-1.0, 0.0, 0.01, 1.0])
    sg = np.array([0.0, 0.0, 1.0, 1.0])
    with pytest.raises(ConfigError, match="sigma1"):
        TabulatedConductivity(xi=xi, sigma=sg, sigma1=1.0)
    m = TabulatedConductivity(xi=xi, sigma=sg)
    assert m.sigma1 == pytest.approx(100.0)


def test_tabulated_from_csv(tmp_path):
    path = tmp_path / "table.csv"
    path.write_text("# xi, sigma\n-1.0,0.5\n0.0,1.0\n2.0,1.5\n")
    m = TabulatedConductivity.from_csv(path)
    assert m.evaluate(np.array([1.0]))[0] == pytest.approx(1.25)
    bad = tmp_path / "bad.csv"
    bad.write_text("1.0,2.0,3.0\n")
    with pytest.raises(ConfigError, match="2 columns"):
        TabulatedConductivity.from_csv(bad)
    with pytest.raises(ConfigError, match="cannot read"):
        TabulatedConductivity.from_csv(tmp_path / "missing.csv")


def test_validate_bounds_report():
    m = AffineClampedConductivity(a=1.0, b=0.5, lo=0.0, hi=3.0)
    rep = validate_bounds(m, theta_max=10.0)
    assert rep.max_abs_value <= 3.0
    assert rep.max_abs_slope <= 0.5 * (1 + 1e-6)
    assert rep.n_samples == 10_000


def test_validate_bounds_names_offending_xi():
    # Declared sigma0 holds on the declared range but not on a wider one;
    # the audit over the wider range must name the offending xi.
    m = AffineClampedConductivity(a=0.0, b=1.0, lo=-50.0, hi=50.0, sigma0=20.0, theta_max=10.0)
    assert m.sigma0 == 20.0
    with pytest.raises(ConfigError) as err:
        validate_bounds(m, theta_max=500.0)
    assert "sigma0" in str(err.value) and "-500" in str(err.value)


def test_sigma_field_masks_and_shapes():
    dom = build_domain("annulus", 24)
    m = ConstantConductivity(value=3.0)
    th = ThetaField(np.zeros(dom.node_shape), 0.0)
    s = sigma_field(m, th, dom)
    assert np.all(s[dom.inside_mask] == 3.0)
    assert not s[dom.exterior].any()
    with pytest.raises(ConfigError, match="shape"):
        sigma_field(m, np.zeros((3, 3)), dom)
    bad = np.zeros(dom.node_shape)
    bad[0, 0] = np.nan
    with pytest.raises(NumericsError, match="non-finite"):
        sigma_field(m, bad, dom)


def test_sigma_field_temperature_dependence():
    dom = build_domain("rectangle", 8)
    m = AffineClampedConductivity(a=0.0, b=1.0, lo=0.0, hi=5.0)
    th = np.full(dom.node_shape, 9.0)
    s = sigma_field(m, th, dom)
    assert np.all(s == 5.0)  # rectangle mask covers every node


def test_source_zero():
    dom = build_domain("rectangle", 8)
    g = SourceG.zero()
    assert g.is_zero
    assert not g.sample(dom, 1.0).any()
    assert g.time_factor(2.0) == 0.0


def test_source_separable():
    dom = build_domain("rectangle", 16)
    g = SourceG.separable(lambda t: 2.0 * t, lambda X, Y: np.ones_like(X))
    s = g.sample(dom, 0.5)
    assert s[dom.interior].max() == pytest.approx(1.0)
    # Source is applied where Dz lives, nowhere else.
    assert not s[~dom.interior].any()
    prof = g.spatial_profile(dom)
    assert prof[dom.interior].all()
    with pytest.raises(ConfigError, match="callable"):
        SourceG.separable(1.0, lambda X, Y: X)


def test_source_shape_mismatch():
    dom = build_domain("rectangle", 8)
    g = SourceG.separable(lambda t: 1.0, lambda X, Y: np.ones(3))
    with pytest.raises(ConfigError, match="shape"):
        g.sample(dom, 0.0)


def test_tabulated_physical_range():
    # A monotone table shaped like a real loss curve round-trips cleanly.
    xi = np.linspace(0.0, 80.0, 33)
    sg = 1.0 + 0.8 * np.tanh((xi - 40.0) / 15.0)
    m = TabulatedConductivity(xi=xi, sigma=sg)
    probe = np.linspace(0.0, 80.0, 101)
    vals = m.evaluate(probe)
    assert np.all(np.diff(vals) >= -1e-12)
    assert math.isclose(float(vals[0]), float(sg[0]))
