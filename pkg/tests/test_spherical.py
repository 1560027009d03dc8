import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from heatlab import build_space
from heatlab.acceptance import engine
from heatlab.solvlab import constants
from heatlab.spacegeom import pi_prod
from heatlab.spherical import (JacobiParams, SphericalError, complex_case_phi, iwasawa_A_rank1,
                               phi0, phi0_envelope_check, phi_hypergeometric, phi_integral_rank1,
                               phi_ode_rank1, phi_rank1, phi_series_hc)

# reference values from mpmath.hyp2f1 at 30 digits
FROZEN = [
    ((1, 0), 1.0, 5.0, -0.05465805622107525),
    ((1, 0), 0.5, 2.0, 0.6150553749710181),
    ((2, 1), 1.3, 3.0, -0.0019584611620015843),
    ((4, 3), 0.7, 2.5, 0.0009325174636799693),
    ((4, 0), 2.0, 1.5, 0.14133035601531715),
]


@pytest.mark.parametrize("mult,lam,r,ref", FROZEN)
def test_frozen_values(mult, lam, r, ref):
    jac = JacobiParams.from_multiplicities(*mult)
    v = phi_rank1(jac, lam, r)[0]
    assert abs(v.imag) < 1e-12
    assert v.real == pytest.approx(ref, rel=1e-9, abs=1e-13)


def test_h2_phi0_far():
    sp = build_space("Hr:2")
    assert float(phi0(sp, np.array([10.0]))) == pytest.approx(0.04884162679054329, rel=1e-10)


def test_hypergeometric_matches_dispatch():
    jac = JacobiParams.from_multiplicities(1, 0)
    assert phi_hypergeometric(jac, 0.5, 2.0).real == pytest.approx(0.6150553749710181, rel=1e-12)


def test_h3_closed_form():
    jac = build_space("Hr:3").jacobi()
    r = np.linspace(0.05, 12, 60)
    for lam in (0.3, 0.7, 2.0, 5.0):
        exact = np.sin(lam * r) / (lam * np.sinh(r))
        assert np.max(np.abs(phi_rank1(jac, lam, r).real - exact)) < 1e-9


@pytest.mark.parametrize("name", ["Hr:2", "Hr:3", "Hc:2", "Hq:2"])
def test_i_rho_is_one(name):
    jac = build_space(name).jacobi()
    r = np.linspace(0, 8, 17)
    assert np.max(np.abs(phi_rank1(jac, 1j * jac.rho, r) - 1)) < 1e-9
    assert np.max(np.abs(phi_rank1(jac, -1j * jac.rho, r) - 1)) < 1e-9


@pytest.mark.parametrize("name", ["Hr:2", "Hr:3"])
@pytest.mark.parametrize("lam", [0.5, 1.7])
def test_ode_vs_integral(name, lam):
    sp = build_space(name)
    for r in (0.5, 2.0, 5.0):
        a = phi_ode_rank1(sp.jacobi(), lam, r)
        b = phi_integral_rank1(sp, lam, r).real
        assert abs(a - b) < 1e-8


@settings(max_examples=40, deadline=None)
@given(st.floats(0.0, 4.0), st.floats(0.0, 8.0))
def test_bounded_by_phi0(lam, r):
    sp = build_space("Hr:2")
    v = abs(phi_rank1(sp.jacobi(), lam, r)[0])
    assert v <= float(phi0(sp, np.array([r]))) * (1 + 1e-9) + 1e-14


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 3.0), st.floats(0.0, 3.0))
def test_a2c_at_origin(x, y):
    sp = build_space("A2c")
    lam = np.array([x, y])
    assume(np.min(np.abs(lam @ sp.datum.roots.T)) > 0.05)
    assert abs(complex_case_phi(sp, lam, np.zeros(2)) - 1) < 1e-9


def test_a2c_singular_parameter_rejected():
    sp = build_space("A2c")
    with pytest.raises(SphericalError):
        complex_case_phi(sp, np.zeros(2), np.ones(2))


def test_a2c_series_matches_closed_form():
    sp = build_space("A2c")
    H = 4 * np.array([math.cos(1.0), math.sin(1.0)])
    lam = np.array([0.4, 0.9])
    s = phi_series_hc(sp, lam, H)
    c = complex_case_phi(sp, lam, H)
    # no -1 in the Weyl group: phi is genuinely complex for real lam
    assert abs(np.imag(c)) > 1e-6
    assert abs(s / c - 1) < 1e-9


def test_series_rejects_near_wall():
    sp = build_space("A2c")
    with pytest.raises(SphericalError):
        phi_series_hc(sp, np.array([0.4, 0.9]), np.array([1.0, 0.5]))


def test_a2c_i_rho():
    sp = build_space("A2c")
    H = 4 * np.array([math.cos(1.0), math.sin(1.0)])
    assert abs(complex_case_phi(sp, -1j * sp.rho, H) - 1) < 1e-12


@pytest.mark.parametrize("name,H", [("Hr:3", [30.0]), ("A2c", 30 * np.array([math.cos(1.0), math.sin(1.0)]))])
def test_phi0_far_field(name, H):
    e = engine(name)
    sp = e.space
    H = np.asarray(H, float)
    C2 = constants(e)[1]
    model = C2 * pi_prod(sp, H) * np.exp(-sp.rho @ H)
    assert abs(float(phi0(sp, H) / model) - 1) < 0.01


def test_phi0_far_field_h2_rate():
    # H^2 approaches the leading term only like 2 log 2 / r
    e = engine("Hr:2")
    sp = e.space
    C2 = constants(e)[1]
    for r in (30.0, 60.0, 120.0):
        H = np.array([r])
        resid = float(phi0(sp, H) / (C2 * r * math.exp(-0.5 * r))) - 1
        assert resid * r == pytest.approx(2 * math.log(2), rel=0.03)


@pytest.mark.parametrize("name", ["Hr:2", "Hr:3", "Hc:2"])
def test_envelope_band(name):
    sp = build_space(name)
    _, ratio = phi0_envelope_check(sp, np.linspace(0, 40, 201))
    assert ratio.max() / ratio.min() < 10


def test_iwasawa_projection():
    assert iwasawa_A_rank1(0.0, 1.0) == pytest.approx(1.0)
    assert iwasawa_A_rank1(math.pi, 1.0) == pytest.approx(-1.0)
    assert iwasawa_A_rank1(math.pi / 2, 1.0) == pytest.approx(-math.log(math.cosh(1.0)))


@pytest.mark.parametrize("n", [2, 3])
def test_average_of_horospherical_exponential(n):
    # int_K e^{(i lam + rho) A(k^{-1} x)} dk reproduces phi_lam; at lam = -i rho it is 1
    sp = build_space(f"Hr:{n}")
    assert phi_integral_rank1(sp, -1j * sp.rho[0], 2.0).real == pytest.approx(1.0, abs=1e-10)
