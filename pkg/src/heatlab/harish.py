"""Harish-Chandra c-function, Plancherel density and the b-function.

For a positive reduced root alpha with multiplicities (m1, m2) = (m_alpha,
m_2alpha) write r_a = <alpha,rho>/<alpha,alpha> and z = <alpha,lam>/<alpha,alpha>.
The rank-one factor is

    1/c_alpha(z) = K_alpha * Gamma(iz + m1/2)/Gamma(iz)
                           * Gamma(iz/2 + m1/4 + m2/2)/Gamma(iz/2 + m1/4)

with K_alpha = Gamma(r_a)/Gamma(r_a + m1/2) * Gamma(r_a/2 + m1/4)/Gamma(r_a/2 + m1/4 + m2/2),
so that c(-i rho) = 1.  The b-function is b(lam) = pi(i lam) c(lam) with
pi(X) = prod <alpha, X>; it has no zeros or poles on the closed tube
a + i closure(a+) after the sign flip lam -> -lam.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cgamma import gamma_ratio
from .spacegeom import SpaceSpec, pi_prod


class SpectralDomainError(ValueError):
    """Spectral parameter outside the region where an operation is defined."""


@dataclass(frozen=True)
class SpectralPoint:
    """lam = re + i*im in the complexified dual of the Cartan subspace."""

    re: np.ndarray
    im: np.ndarray

    def __post_init__(self):
        re = np.atleast_1d(np.asarray(self.re, float))
        im = np.atleast_1d(np.asarray(self.im, float))
        if re.shape != im.shape or not (np.all(np.isfinite(re)) and np.all(np.isfinite(im))):
            raise SpectralDomainError("spectral point must have finite, matching components")
        object.__setattr__(self, "re", re)
        object.__setattr__(self, "im", im)

    @property
    def value(self):
        return self.re + 1j * self.im


def _as_lambda(space, lam):
    """Coerce to a complex (..., l) array."""
    if isinstance(lam, SpectralPoint):
        lam = lam.value
    lam = np.asarray(lam, dtype=complex)
    if space.rank == 1 and (lam.ndim == 0 or lam.shape[-1] != 1):
        lam = lam[..., None]
    return lam


def _root_params(space: SpaceSpec, i):
    alpha = space.datum.roots[i]
    m1, m2 = (float(x) for x in space.datum.mult[i])
    aa = float(alpha @ alpha)
    ra = float(alpha @ space.rho) / aa
    return alpha, aa, ra, m1, m2


def _const_factor(ra, m1, m2):
    """K_alpha, the lam-independent part of 1/c_alpha."""
    g1 = gamma_ratio(np.array(ra, dtype=complex), m1 / 2)
    g2 = gamma_ratio(np.array(ra / 2 + m1 / 4, dtype=complex), m2 / 2)
    return complex(1.0 / (g1 * g2))


def c_alpha_inv(space: SpaceSpec, i: int, z):
    """1/c_alpha(z) for the i-th positive reduced root.

    Parameters
    ----------
    space : SpaceSpec
    i : int
        Index of the root in ``space.datum.roots``.
    z : complex array
        ``<alpha, lam>/<alpha, alpha>``.

    Raises
    ------
    GammaPoleError
        When z is within 1e-8 of a pole of the quotient.
    """
    _, _, ra, m1, m2 = _root_params(space, i)
    iz = 1j * np.asarray(z, dtype=complex)
    f1 = gamma_ratio(iz, m1 / 2, name="Gamma(iz + m_alpha/2)")
    if m2 > 0:
        f2 = gamma_ratio(iz / 2 + m1 / 4, m2 / 2, name="Gamma(iz/2 + m_alpha/4 + m_2alpha/2)")
    else:
        f2 = 1.0
    return _const_factor(ra, m1, m2) * f1 * f2


def _pairings(space, lam):
    roots = space.datum.roots
    aa = np.einsum("ij,ij->i", roots, roots)
    return (lam @ roots.T) / aa


def c_inv(space: SpaceSpec, lam):
    """1/c(lam) = prod_alpha 1/c_alpha for complex lam of shape (..., l)."""
    lam = _as_lambda(space, lam)
    z = _pairings(space, lam)
    out = np.ones(z.shape[:-1], dtype=complex)
    for i in range(space.n_reduced):
        out = out * c_alpha_inv(space, i, z[..., i])
    return out


def c_function(space: SpaceSpec, lam):
    return 1.0 / c_inv(space, lam)


def plancherel_density(space: SpaceSpec, lam):
    """|c(lam)|^{-2} = 1/(c(lam) c(-lam)) for real lam; zero where pi(lam) = 0."""
    lam = _as_lambda(space, lam)
    if np.any(np.abs(lam.imag) > 0):
        raise SpectralDomainError("plancherel_density takes real lam")
    val = c_inv(space, lam) * c_inv(space, -lam)
    return np.abs(val.real)


def b_alpha(space: SpaceSpec, i: int, z, inverse=False):
    """b_alpha(z) = |alpha|^2 (iz) c_alpha(z), or its reciprocal."""
    _, aa, ra, m1, m2 = _root_params(space, i)
    iz = 1j * np.asarray(z, dtype=complex)
    # Gamma(iz+1)/Gamma(iz+m1/2) = 1/gamma_ratio(iz+1, m1/2 - 1)
    s1 = m1 / 2 - 1
    if s1 >= 0:
        q1 = gamma_ratio(iz + 1, s1, name="Gamma(iz + m_alpha/2)")
        q1 = 1.0 / q1
    else:
        q1 = gamma_ratio(iz + m1 / 2, -s1, name="Gamma(iz + 1)")
    if m2 > 0:
        q2 = 1.0 / gamma_ratio(iz / 2 + m1 / 4, m2 / 2, name="Gamma(iz/2 + m_alpha/4 + m_2alpha/2)")
    else:
        q2 = 1.0
    val = aa * q1 * q2 / _const_factor(ra, m1, m2)
    return 1.0 / val if inverse else val


def b_function(space: SpaceSpec, lam, inverse=False):
    """b(-lam) (or its reciprocal) for lam in a + i closure(a+).

    Raises
    ------
    SpectralDomainError
        If Im lam leaves the closed positive chamber.
    """
    lam = _as_lambda(space, lam)
    pair = lam.imag @ space.datum.simple.T
    if np.any(pair < -1e-12):
        raise SpectralDomainError("Im lam must lie in the closed positive chamber")
    z = _pairings(space, -lam)
    out = np.ones(z.shape[:-1], dtype=complex)
    for i in range(space.n_reduced):
        out = out * b_alpha(space, i, z[..., i], inverse=inverse)
    return out


def b_at_zero(space: SpaceSpec) -> float:
    return float(b_function(space, np.zeros(space.rank)).real)


def pi_of_i(space: SpaceSpec, lam):
    """pi(i lam) = prod <alpha, i lam>."""
    return pi_prod(space, 1j * _as_lambda(space, lam))


def gamma_ratio_asymptotic(space: SpaceSpec, i: int, z):
    """Large-|z| model 2^{m2/2} (iz)^{1 - m1/2 - m2/2} of the lam-dependent part of b_alpha."""
    _, _, _, m1, m2 = _root_params(space, i)
    iz = 1j * np.asarray(z, dtype=complex)
    return 2.0 ** (m2 / 2) * iz ** (1 - m1 / 2 - m2 / 2)


def gamma_ratio_exact(space: SpaceSpec, i: int, z):
    """Gamma(iz+1)/Gamma(iz+m1/2) * Gamma(iz/2+m1/4)/Gamma(iz/2+m1/4+m2/2)."""
    _, aa, ra, m1, m2 = _root_params(space, i)
    return b_alpha(space, i, z) * _const_factor(ra, m1, m2) / aa


def dump_table(space: SpaceSpec, lams, fh):
    """Write (lam, |c|^-2, |b(-lam)|^-1) rows for rank one."""
    lams = np.asarray(lams, float)
    dens = plancherel_density(space, lams)
    binv = np.abs(b_function(space, lams, inverse=True))
    fh.write("lam,plancherel,abs_b_inv\n")
    for a, b, c in zip(lams, dens, binv):
        fh.write(f"{a:.10g},{b:.12e},{c:.12e}\n")
