import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from heatlab import ConcentrationSpec, InitialDatum
from heatlab.acceptance import engine
from heatlab.convlab import mass
from heatlab.heatkern import DomainError
from heatlab.solvlab import (DivergentWeightError, MassFunction, SolvablePoint, abel_check,
                             constants, h_tilde, half_space_distance, htilde_total_mass,
                             kostant_check, log_height_polar, mass_outside_tilde, modular,
                             omega_tilde, outside_sup_tilde, ratio_gap, sup_norm_htilde, thm15_l1,
                             thm15_linf, weighted_class_check, weighted_deviation_trend)
from heatlab.spherical import phi0

SPEC = ConcentrationSpec()


@settings(max_examples=50, deadline=None)
@given(st.floats(0.0, 8.0), st.floats(0.0, math.pi))
def test_polar_points(r, theta):
    p = SolvablePoint.from_polar(r, theta)
    assert p.distance() == pytest.approx(r, abs=1e-9 * (1 + math.exp(r)))
    assert p.A == pytest.approx(float(log_height_polar(r, theta)), abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(st.floats(-20, 20), st.floats(-20, 20), st.floats(-12, 12))
def test_kostant_bound(x1, x2, logh):
    assert kostant_check(SolvablePoint(np.array([x1, x2]), math.exp(logh)))


def test_kostant_equality_on_vertical_axis():
    for a in (-3.0, 0.0, 2.5):
        p = SolvablePoint(np.zeros(1), math.exp(a))
        assert p.distance() == pytest.approx(abs(a), abs=1e-12)
        assert kostant_check(p)


def test_half_space_distance_origin():
    assert float(half_space_distance(np.zeros(1), 1.0)) == 0.0
    with pytest.raises(ValueError):
        SolvablePoint(np.zeros(1), 0.0)


def test_modular_and_htilde():
    e = engine("Hr:2")
    p = SolvablePoint(np.zeros(1), math.e)
    assert modular(e.space, p) == pytest.approx(math.exp(-1.0))
    # on the vertical axis the distance is |A|
    expect = math.exp(-0.5 + 0.25 * 3.0) * float(e.heat_kernel(3.0, 1.0))
    assert h_tilde(e, 3.0, p) == pytest.approx(expect, rel=1e-12)


@pytest.mark.parametrize("name", ["Hr:2", "Hr:3", "Hc:2", "A2c"])
def test_right_haar_probability(name):
    e = engine(name)
    for t in (1.0, 10.0):
        assert htilde_total_mass(e, t) == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("name", ["Hr:2", "Hr:3"])
def test_abel_transform_is_gaussian(name):
    e = engine(name)
    t = 4.0
    v0, g0 = abel_check(e, t, 0.0)
    assert g0 == pytest.approx((4 * math.pi * t) ** -0.5)
    for A in (-3.0, -0.5, 1.2, 5.0):
        v, g = abel_check(e, t, A)
        assert v == pytest.approx(g, rel=1e-8)
    assert abel_check(e, t, 2.0)[0] == pytest.approx(abel_check(e, t, -2.0)[0], rel=1e-8)
    with pytest.raises(DomainError):
        abel_check(e, t, 9.0)


def test_omega_tilde():
    reg = omega_tilde(SPEC, 16.0)
    assert reg.inner == pytest.approx(2.0) and reg.outer == pytest.approx(8.0)
    assert reg.contains(engine("Hr:2").space, np.array([[4.0]])).all()
    with pytest.raises(DomainError):
        omega_tilde(SPEC, 0.5)


def test_outside_mass_shrinks():
    e = engine("Hr:2")
    out = [mass_outside_tilde(e, SPEC, t) for t in (5.0, 20.0, 80.0)]
    assert out[0] > out[1] > out[2] > 0
    wide = ConcentrationSpec(exponent=0.4)
    assert mass_outside_tilde(e, wide, 20.0) < out[1]


def test_refined_far_field_constant():
    # (phi_0 / (pi(H) e^{-<rho,H>}) - C2) * mu(H) settles at C2 * 2 log 2 on H^2
    e = engine("Hr:2")
    C2 = constants(e)[1]
    for r in (40.0, 80.0):
        H = np.array([r])
        resid = (float(phi0(e.space, H)) / (r * math.exp(-0.5 * r)) - C2) * r
        assert resid == pytest.approx(C2 * 2 * math.log(2), rel=0.03)


def test_mass_function_constant_for_radial_data():
    e = engine("Hr:2")
    mf = MassFunction(e, InitialDatum.bump())
    v = mf(np.array([0.0, 1.0, 3.0, 7.0]))
    assert np.allclose(v, mf.hv0, rtol=1e-10)
    assert mf.hv0 > 0


def test_mass_function_off_origin():
    e = engine("Hr:2")
    mf = MassFunction(e, InitialDatum.bump(center=1.0))
    r = np.array([0.0, 0.5, 2.0, 6.0])
    for psi in (0.0, 1.0, math.pi):
        assert np.allclose(mf(r, psi), mf.closed_form(r, psi), rtol=1e-9)
    assert mf.harnack_bound() >= float(mf.closed_form(np.linspace(0, 20, 81), math.pi).max())


def test_narrow_normalised_bump_has_unit_mass_function():
    e = engine("Hr:3")
    d = InitialDatum.bump(xi=0.02)
    d = InitialDatum.bump(xi=0.02, amplitude=1.0 / mass(e, d))
    assert MassFunction(e, d).hv0 == pytest.approx(1.0, rel=1e-3)


def test_ratio_gap():
    e = engine("Hr:2")
    t = 80.0
    reg = omega_tilde(SPEC, t)
    r = np.linspace(reg.inner, reg.outer, 5)
    assert np.all(ratio_gap(e, t, r, 0.0) == 0)
    gap = np.abs(ratio_gap(e, t, r, 1.0, 0.7))
    assert gap.max() < 0.2
    with pytest.raises(DomainError):
        ratio_gap(e, t, np.array([100.0]), 1.0)


def test_sup_norm_band_h2():
    e = engine("Hr:2")
    vals = [sup_norm_htilde(e, t)[0] for t in (5.0, 20.0, 80.0)]
    assert max(vals) / min(vals) < 5
    with pytest.raises(DomainError):
        sup_norm_htilde(e, 0.5)


def test_outside_sup_decreases_h2():
    e = engine("Hr:2")
    a = outside_sup_tilde(e, SPEC, 5.0)
    b = outside_sup_tilde(e, SPEC, 80.0)
    assert b["all"] < a["all"]
    assert set(a) >= {"small", "large", "all"}


def test_weighted_class():
    e = engine("Hr:2")
    ok, _ = weighted_class_check(e, InitialDatum.bump().profile)
    assert ok
    ok, _ = weighted_class_check(e, lambda r: np.exp(-2.5 * r))
    assert ok
    ok, _ = weighted_class_check(e, lambda r: np.exp(-0.5 * r))
    assert not ok
    with pytest.raises(DivergentWeightError):
        weighted_deviation_trend(e, lambda r: np.exp(-0.5 * r))


def test_tilde_norms_radial():
    e = engine("Hr:2")
    d = InitialDatum.bump()
    a, b = thm15_l1(e, d, 5.0), thm15_l1(e, d, 20.0)
    assert b < a
    raw = thm15_linf(e, d, 5.0, normalized=False)
    assert thm15_linf(e, d, 5.0) == pytest.approx(5.0 * raw)
