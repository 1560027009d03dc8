import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from heatlab import ConcentrationSpec, HeatEngine, build_space
from heatlab.acceptance import engine
from heatlab.heatkern import (DomainError, critical_asymptote, log_critical_asymptote, delayed_kernel_gap, heat_envelope,
                              heat_transform, mass_outside)

# H^2 kernel from the McKean integral, evaluated with mpmath.quad at 30 digits
MCKEAN = [
    (1.0, 1.0, 0.0414911839578222173),
    (2.0, 3.0, 0.0038802213894533371),
    (0.5, 0.2, 0.131954117960432340),
    (5.0, 6.0, 0.000111630975256443505),
]


@pytest.mark.parametrize("t,r,ref", MCKEAN)
def test_h2_frozen(t, r, ref):
    assert float(engine("Hr:2").heat_kernel(t, r)) == pytest.approx(ref, rel=1e-6)


def h3_exact(t, r):
    r = np.asarray(r, float)
    ratio = np.where(r > 0, r / np.sinh(np.maximum(r, 1e-300)), 1.0)
    return (4 * math.pi * t) ** -1.5 * ratio * np.exp(-t - r * r / (4 * t))


@pytest.mark.parametrize("t", [0.1, 1.0, 7.5, 40.0])
def test_h3_closed_form(t):
    e = engine("Hr:3")
    r = np.linspace(0.0, 2 * t + 6 * math.sqrt(t), 50)
    assert np.allclose(e.heat_kernel(t, r), h3_exact(t, r), rtol=1e-6, atol=0)


@pytest.mark.parametrize("name", ["Hr:2", "Hr:3", "Hc:2", "Hq:2", "A2c"])
def test_unit_mass(name):
    e = engine(name)
    for t in (0.3, 2.0, 15.0):
        assert e.total_mass(t) == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("name", ["Hr:2", "Hr:3"])
def test_round_trip(name):
    e = engine(name)
    lam = np.array([0.5, 1.3])
    for t in (1.0, 4.0):
        assert np.allclose(e.round_trip(t, lam), heat_transform(e.space, lam, t), rtol=1e-5)


def test_round_trip_a2c():
    e = engine("A2c")
    lam = np.array([[0.4, 0.9]])
    assert np.allclose(e.round_trip(2.0, lam), heat_transform(e.space, lam, 2.0), rtol=1e-5)


def test_calibration_close_to_theory():
    for name in ("Hr:2", "Hr:3", "Hc:2"):
        e = engine(name)
        assert e.calibration_residual < 1e-9
        assert e.c0 / e.c0_theory == pytest.approx(1.0, rel=1e-6)


@pytest.mark.parametrize("name", ["Hr:2", "Hr:3", "Hc:2"])
def test_envelope_band(name):
    e = engine(name)
    ratios = []
    for t in (0.5, 3.0, 20.0):
        r = np.linspace(0, 2 * t * float(e.space.rho[0]) + 8 * math.sqrt(t), 40)
        ratios.append(e.heat_kernel(t, r) / heat_envelope(e, t, r))
    ratios = np.concatenate(ratios)
    assert ratios.max() / ratios.min() < 20


def test_critical_asymptote():
    e = engine("Hr:3")
    t = 400.0
    H = np.array([2 * t])
    gap = float(e.heat_kernel(t, H, log=True) - log_critical_asymptote(e, t, H))
    assert abs(gap) < 1e-3


def test_critical_domain():
    e = engine("Hr:2")
    with pytest.raises(DomainError):
        critical_asymptote(e, 2.0, np.array([10.0]))
    with pytest.raises(DomainError):
        critical_asymptote(e, 10.0, np.array([1.0]))


def test_concentration_decreases():
    e = engine("Hr:3")
    spec = ConcentrationSpec()
    out = [mass_outside(e, spec, t) for t in (10, 40, 160)]
    assert out[0] > out[1] > out[2]
    assert out[-1] < 0.05


def test_wider_region_holds_more_mass():
    e = engine("Hr:2")
    spec = ConcentrationSpec()
    r = float(spec.radius(20.0))
    assert mass_outside(e, spec, 20.0, radius=1.5 * r) < mass_outside(e, spec, 20.0)


def test_concentration_spec_validation():
    with pytest.raises(ValueError):
        ConcentrationSpec(exponent=0.5)
    assert ConcentrationSpec().admissible([1, 10, 100])


def test_small_t_rejected():
    e = engine("Hr:3")
    with pytest.raises(DomainError):
        e.heat_kernel(0.01, 1.0)
    with pytest.raises(DomainError):
        mass_outside(e, ConcentrationSpec(), 0.5)


def test_engine_immutable():
    e = engine("Hr:3")
    with pytest.raises(AttributeError):
        e.c0 = 1.0


def test_rank_two_real_form_rejected():
    from heatlab.spacegeom import SpaceError, load_abstract
    roots = build_space("A2c").datum.roots.tolist()
    with pytest.raises(SpaceError):
        HeatEngine(load_abstract({"rank": 2, "roots": roots, "mult": [[1, 0]] * 3}))


@settings(max_examples=25, deadline=None)
@given(st.floats(0.5, 30.0), st.floats(0.0, 20.0))
def test_kernel_positive_and_radially_decreasing(t, r):
    e = engine("Hr:2")
    a, b = e.heat_kernel(t, np.array([r, r + 0.5]))
    assert 0 < b < a


def test_delayed_gap_positive():
    e = engine("Hr:3")
    assert delayed_kernel_gap(e, 10.0, 0.0) == 0.0
    assert delayed_kernel_gap(e, 10.0, 1.0) > 0
