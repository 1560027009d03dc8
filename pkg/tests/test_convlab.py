import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from heatlab import InitialDatum, build_space
from heatlab.acceptance import engine
from heatlab.convlab import (SphericalTransform, boundary_limit, boundary_transform,
                             boundary_transform_translated, busemann, busemann_limit,
                             dirac_l1_gap, euclidean_baseline, evolve, evolve_direct,
                             k_integral_limit, kernel_quotient, l1_deviation, linf_deviation,
                             loglog_fit, lp_deviation, mass, ordered_map, quotient_limit,
                             triangle_gap)
from heatlab.heatkern import DomainError
from heatlab.spacegeom import SpaceError, log_density

BUMP = InitialDatum.bump()


@pytest.mark.parametrize("name", ["Hr:2", "Hr:3"])
def test_mass_is_transform_at_i_rho(name):
    e = engine(name)
    st_ = SphericalTransform(e, BUMP)
    rho = float(e.space.rho[0])
    assert complex(st_(np.array(-1j * rho))).real == pytest.approx(mass(e, BUMP), rel=1e-10)


@pytest.mark.parametrize("name", ["Hr:2", "Hr:3"])
def test_mass_conserved(name):
    e = engine(name)
    M = mass(e, BUMP)
    for t in (1.0, 8.0):
        r, w = e.radial_rule(t, 0.0, 2 * t * float(e.space.rho[0]) + 14 * math.sqrt(t) + 6)
        u = evolve(e, BUMP, t, r)
        total = e.c_meas * float(np.sum(w * np.exp(log_density(e.space, r)) * u))
        assert total == pytest.approx(M, rel=1e-6)


def test_spectral_and_direct_evolution_agree():
    e = engine("Hr:2")
    r = np.array([0.0, 0.7, 2.0, 5.0, 9.0])
    a = evolve(e, BUMP, 3.0, r)
    b = evolve_direct(e, BUMP, 3.0, r)
    assert np.allclose(a, b, rtol=1e-5)


def test_evolve_rejects_offset_data():
    with pytest.raises(SpaceError):
        evolve(engine("Hr:2"), BUMP.recentred(1.0), 2.0, 1.0)


def test_heat_datum_semigroup():
    # h_s evolved for time t is h_{s+t}
    e = engine("Hr:3")
    d = InitialDatum.heat(e, 1.0)
    r = np.linspace(0, 8, 9)
    assert np.allclose(evolve(e, d, 2.0, r), e.heat_kernel(3.0, r), rtol=1e-8)


def test_transform_grid_deterministic():
    e = engine("Hr:3")
    s = np.linspace(0, 3, 40)
    b = np.linspace(0, 2, 7)
    first = SphericalTransform(e, BUMP).grid(s, b)
    for _ in range(3):
        assert SphericalTransform(e, BUMP).grid(s, b).tobytes() == first.tobytes()


def test_transform_grid_matches_exact():
    e = engine("Hr:2")
    tr = SphericalTransform(e, BUMP)
    s = np.array([0.1, 1.3, 2.9])
    b = np.array([0.0, 0.4, 1.7])
    exact = tr(s[None, :] + 1j * b[:, None])
    assert np.allclose(tr.grid(s, b), exact, rtol=1e-10, atol=1e-14)


def test_holder_interpolation():
    e = engine("Hr:3")
    t = 10.0
    l1, linf, l3 = l1_deviation(e, BUMP, t), linf_deviation(e, BUMP, t), lp_deviation(e, BUMP, t, 3.0)
    assert l3 <= l1 ** (1 / 3) * linf ** (2 / 3) * (1 + 1e-12)


def test_triangle_gap_nonnegative():
    e = engine("Hr:3")
    v0 = InitialDatum.bump(xi=0.6, amplitude=2.0)
    assert triangle_gap(e, BUMP, v0, 10.0) >= -1e-12


# normalised K-integrals from mpmath.quad at 30 digits
@pytest.mark.parametrize("n,ref", [(2, 0.611640186495615843), (3, 0.924234314520019517)])
def test_k_integral_frozen(n, ref):
    assert k_integral_limit(build_space(f"Hr:{n}"), 1.0) == pytest.approx(ref, rel=1e-10)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.05, 4.0))
def test_signed_k_integral_vanishes(s):
    assert abs(k_integral_limit(build_space("Hr:2"), s, signed=True)) < 1e-9


def test_dirac_gap_positive_and_bounded():
    e = engine("Hr:2")
    g = dirac_l1_gap(e, 1.0, 20.0)
    assert 0.3 < g < 2.0
    with pytest.raises(DomainError):
        dirac_l1_gap(e, 1.0, 1.0)


def test_kernel_quotient_limit():
    e = engine("Hr:2")
    t = 200.0
    for th in (0.0, 1.0, math.pi):
        q = float(kernel_quotient(e, t, 2 * t * 0.5, 1.0, th))
        assert q == pytest.approx(float(quotient_limit(e.space, 1.0, th)), rel=0.05)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, math.pi), st.floats(0.0, 3.0))
def test_busemann_converges(theta, s):
    assert busemann(theta, s, 60.0) == pytest.approx(busemann_limit(theta, s), abs=1e-9)


def test_busemann_vectorised():
    v = busemann(np.linspace(0, math.pi, 5), 1.0, np.full(5, 3.0))
    assert v.shape == (5,)


def test_boundary_transform():
    e = engine("Hr:2")
    d = BUMP.recentred(0.8)
    th = np.linspace(0.1, 3.0, 6)
    M = mass(e, BUMP)
    assert np.allclose(boundary_transform(e, d, th, -1), M, rtol=1e-8)
    assert np.allclose(boundary_transform(e, d, th, +1), boundary_transform_translated(e, d, th), rtol=1e-6)
    assert boundary_limit(e, d) == pytest.approx(boundary_limit(e, d, route="translated"), rel=1e-6)
    assert boundary_limit(e, BUMP) == pytest.approx(0.0, abs=1e-9)


def test_euclidean_baseline_decays():
    v = euclidean_baseline(BUMP, 3, (5.0, 20.0, 80.0))
    assert v[0] > v[1] > v[2]


def test_loglog_fit_exact():
    x = np.array([1.0, 2.0, 4.0, 8.0])
    slope, hw = loglog_fit(x, 3 * x ** -0.5)
    assert slope == pytest.approx(-0.5)
    assert hw == pytest.approx(0.0, abs=1e-9)


def test_ordered_map_keeps_order():
    assert ordered_map(lambda x: x * x, range(10), workers=4) == [x * x for x in range(10)]
