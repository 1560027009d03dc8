import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from heatlab import build_space
from heatlab.harish import (SpectralDomainError, b_at_zero, b_function, c_alpha_inv, c_function,
                            c_inv, gamma_ratio_asymptotic, gamma_ratio_exact, pi_of_i,
                            plancherel_density)
from heatlab.convlab import loglog_fit
from heatlab.spacegeom import pi_prod

CATALOG = ["Hr:2", "Hr:3", "Hr:5", "Hc:2", "Hq:2", "A2c"]


@pytest.mark.parametrize("name", CATALOG)
def test_normalisation_at_minus_i_rho(name):
    sp = build_space(name)
    assert abs(c_function(sp, -1j * sp.rho) - 1) < 1e-12


def test_h2_plancherel_closed_form():
    sp = build_space("Hr:2")
    lam = np.linspace(0.25, 4, 50)
    # pi lam tanh(pi lam) with c(-i rho) = 1
    assert np.allclose(plancherel_density(sp, lam), math.pi * lam * np.tanh(math.pi * lam), rtol=1e-8)


def test_h3_c_function():
    sp = build_space("Hr:3")
    lam = np.linspace(0.25, 4, 20)
    assert np.allclose(c_function(sp, lam), 1 / (1j * lam), rtol=1e-12)
    assert np.allclose(plancherel_density(sp, lam), lam ** 2, rtol=1e-10)


def test_a2c_plancherel_polynomial():
    sp = build_space("A2c")
    rng = np.random.default_rng(0)
    lam = rng.uniform(-3, 3, (30, 2))
    expected = pi_prod(sp, lam) ** 2 / float(pi_prod(sp, sp.rho)) ** 2
    assert np.allclose(plancherel_density(sp, lam), expected, rtol=1e-10)


@pytest.mark.parametrize("name", CATALOG)
def test_vanishes_at_origin(name):
    sp = build_space(name)
    assert float(np.ravel(plancherel_density(sp, np.zeros(sp.rank)))[0]) == pytest.approx(0.0, abs=1e-14)


@settings(max_examples=50, deadline=None)
@given(st.floats(-4, 4), st.floats(-4, 4))
def test_plancherel_weyl_invariant(x, y):
    sp = build_space("A2c")
    lam = np.array([x, y])
    base = float(np.ravel(plancherel_density(sp, lam))[0])
    for w in sp.datum.weyl:
        v = float(np.ravel(plancherel_density(sp, w @ lam))[0])
        assert v == pytest.approx(base, rel=1e-12, abs=1e-14)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.05, 20))
def test_schwarz_reflection(z):
    for name in ("Hr:2", "Hc:2", "Hq:2"):
        sp = build_space(name)
        a = complex(np.ravel(c_alpha_inv(sp, 0, z))[0])
        b = complex(np.ravel(c_alpha_inv(sp, 0, -z))[0])
        assert abs(a - b.conjugate()) <= 1e-12 * abs(a)


@pytest.mark.parametrize("name", CATALOG)
def test_b_definition(name):
    # b(-lam) = pi(-i lam) c(-lam)
    sp = build_space(name)
    lam = np.full(sp.rank, 0.6) + 0.3j * sp.rho / np.linalg.norm(sp.rho)
    lhs = complex(np.ravel(b_function(sp, lam))[0])
    rhs = complex(np.ravel(pi_of_i(sp, -lam) / c_inv(sp, -lam))[0])
    assert lhs == pytest.approx(rhs, rel=1e-12)
    inv = complex(np.ravel(b_function(sp, lam, inverse=True))[0])
    assert inv * lhs == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize("name", CATALOG)
def test_b_at_zero_finite(name):
    v = b_at_zero(build_space(name))
    assert math.isfinite(v) and v > 0


def test_b_at_zero_values():
    assert b_at_zero(build_space("Hr:2")) == pytest.approx(1 / math.pi, rel=1e-12)
    assert b_at_zero(build_space("Hr:3")) == pytest.approx(1.0, rel=1e-12)
    assert b_at_zero(build_space("A2c")) == pytest.approx(16.0, rel=1e-12)


def test_b_domain():
    sp = build_space("Hr:2")
    with pytest.raises(SpectralDomainError):
        b_function(sp, np.array([1.0 - 0.5j]))


@pytest.mark.parametrize("name,exponent", [("Hr:2", -0.5), ("Hr:3", 0.0), ("Hc:2", 0.5), ("Hq:2", 2.5)])
def test_b_growth_exponent(name, exponent):
    sp = build_space(name)
    lam = np.geomspace(10, 1000, 30)
    slope, _ = loglog_fit(lam, np.abs(b_function(sp, lam, inverse=True)))
    assert abs(slope - exponent) <= 0.02


def test_h3_b_bounded():
    sp = build_space("Hr:3")
    v = np.abs(b_function(sp, np.linspace(1, 100, 200), inverse=True))
    assert v.max() / v.min() < 1.0 + 1e-12


@pytest.mark.parametrize("name", ["Hr:2", "Hc:2", "Hq:2"])
def test_gamma_ratio_asymptotic(name):
    sp = build_space(name)
    z = np.array([200.0, 1000.0, 5000.0])
    ratio = gamma_ratio_exact(sp, 0, z) / gamma_ratio_asymptotic(sp, 0, z)
    assert np.all(np.abs(ratio - 1) < 5 / z)
