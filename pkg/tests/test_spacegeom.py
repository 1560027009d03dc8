import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from heatlab import build_space
from heatlab.spacegeom import (SpaceError, cartan_distance, density_delta, load_abstract,
                               log_density, log_density_envelope, longest_element, mu_min,
                               pi_prod, to_chamber, weyl_orbit)

CATALOG = ["Hr:2", "Hr:3", "Hr:5", "Hc:2", "Hc:3", "Hq:2", "A2c"]


def test_real_hyperbolic_3():
    sp = build_space("Hr:3")
    assert (sp.rank, sp.n, sp.nu) == (1, 3, 3)
    assert sp.datum.mult.tolist() == [[2, 0]]
    assert sp.rho[0] == pytest.approx(1.0)


def test_complex_a2():
    sp = build_space("A2c")
    assert (sp.rank, sp.n_reduced, sp.n, sp.nu, sp.weyl_order) == (2, 3, 8, 8, 6)
    assert sp.rho_norm2 == pytest.approx(8.0)


def test_normal_real_form_a2():
    roots = build_space("A2c").datum.roots.tolist()
    sp = load_abstract({"rank": 2, "roots": roots, "mult": [[1, 0]] * 3})
    assert sp.l_plus_sigma == 5 == sp.n
    assert sp.nu == 8


@pytest.mark.parametrize("name", CATALOG)
def test_dimension_identities(name):
    sp = build_space(name)
    m = sp.datum.mult
    assert sp.n == sp.rank + int(m.sum())
    assert sp.nu == sp.rank + 2 * sp.n_reduced
    # n - nu = sum over reduced roots of (m_a + m_2a - 2)
    assert sp.n - sp.nu == int((m.sum(axis=1) - 2).sum())


@pytest.mark.parametrize("name,expected", [("Hr:2", 0.5), ("Hr:4", 1.5), ("Hc:2", 2.0), ("Hq:2", 5.0)])
def test_rank_one_rho(name, expected):
    assert build_space(name).rho[0] == pytest.approx(expected)


@pytest.mark.parametrize("name", CATALOG)
def test_rho_positive_on_simple_roots(name):
    sp = build_space(name)
    assert np.all(sp.datum.simple @ sp.rho > 0)
    assert np.all(sp.datum.simple @ sp.rho0 > 0)


def test_invalid_multiplicity():
    with pytest.raises(SpaceError):
        load_abstract({"rank": 1, "roots": [[1.0]], "mult": [[0, 1]]})
    with pytest.raises(SpaceError):
        load_abstract({"rank": 1, "roots": [[1.0]], "mult": [[-1, 0]]})
    with pytest.raises(SpaceError):
        build_space("Hx:3")


def test_density_values():
    assert density_delta(build_space("Hr:2"), np.array([1.0])) == pytest.approx(math.sinh(1.0))
    for name in CATALOG:
        sp = build_space(name)
        assert float(np.ravel(density_delta(sp, np.zeros(sp.rank)))[0]) == 0


def test_density_envelope_band_h2():
    sp = build_space("Hr:2")
    r = np.linspace(0.1, 30, 300)
    ratio = np.exp(log_density(sp, r) - log_density_envelope(sp, r))
    assert ratio.max() / ratio.min() < 10


def test_mu_and_pi():
    sp = build_space("Hr:3")
    assert float(mu_min(sp, np.array([2.0]))) == 2.0
    assert float(pi_prod(sp, np.array([2.0]))) == 2.0
    a2 = build_space("A2c")
    wall = np.array([0.0, 1.0])          # orthogonal to the first simple root
    assert float(mu_min(a2, wall)) == pytest.approx(0.0, abs=1e-15)
    assert float(pi_prod(a2, wall)) == pytest.approx(0.0, abs=1e-15)
    t = 3.0
    assert float(mu_min(a2, 2 * t * a2.rho)) == pytest.approx(2 * t * min(a2.datum.roots @ a2.rho))


def test_cartan_distance():
    assert cartan_distance(np.array([1.0]), np.array([4.0])) == pytest.approx(3.0)
    assert cartan_distance(np.array([1.0, 2.0]), np.array([1.0, 2.0])) == 0


def test_weyl_orbits_and_longest():
    h3 = build_space("Hr:3")
    orb = sorted(float(v[0]) for v in weyl_orbit(h3, 3.0))
    assert orb == [-3.0, 3.0]
    assert np.allclose(longest_element(h3), -np.eye(1))
    a2 = build_space("A2c")
    assert len(weyl_orbit(a2, np.array([0.3, 0.71]))) == 6
    for name in CATALOG:
        sp = build_space(name)
        assert np.allclose(longest_element(sp) @ sp.rho, -sp.rho)


chamber_pt = st.tuples(st.floats(0, 10), st.floats(0, 10))


@settings(max_examples=60, deadline=None)
@given(st.floats(-10, 10), st.floats(-10, 10))
def test_chamber_representative_weyl_invariant(x, y):
    sp = build_space("A2c")
    H = np.array([x, y])
    Hc = to_chamber(sp, H)
    assert sp.in_chamber(Hc, tol=1e-9)
    for w in sp.datum.weyl:
        assert np.allclose(to_chamber(sp, w @ H), Hc, atol=1e-9)


@settings(max_examples=60, deadline=None)
@given(chamber_pt, chamber_pt, chamber_pt)
def test_cartan_triangle(a, b, c):
    a, b, c = map(np.array, (a, b, c))
    assert cartan_distance(a, c) <= cartan_distance(a, b) + cartan_distance(b, c) + 1e-12
