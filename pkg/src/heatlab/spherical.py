"""Spherical functions phi_lam and the ground spherical function phi_0.

Rank-one engines work with the Jacobi parameters (a, b) of the radial
operator  u'' + ((2a+1) coth r + (2b+1) tanh r) u' :

* ``phi_hypergeometric``  cosh(r)^{-(rho+i lam)} 2F1(., .; a+1; tanh^2 r), any r
* ``phi_taylor``          the 2F1 series in -sinh^2 r, used for tiny r
* ``phi_ode_rank1``       radial ODE from a series launch at r0 = 1e-3
* ``phi_integral_rank1``  K-integral representation (real hyperbolic only)

General rank: ``phi_series_hc`` sums the Harish-Chandra expansion over the
Weyl orbit, ``complex_case_phi`` is the elementary formula for spaces with
all multiplicities equal to 2.
"""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .harish import c_inv, _as_lambda
from .spacegeom import (SpaceSpec, SpaceError, mu_min, pi_prod, root_pairings,
                        weyl_dets, rho_unit)

R0 = 1e-3            # ODE launch radius
TAYLOR_R = 0.05      # below this, the sinh^2 series is used
REGULAR_TOL = 1e-3   # min |<alpha, lam>| for a regular spectral parameter


class SphericalError(ArithmeticError):
    """Evaluation failure (non-convergence, step underflow, ...)."""


@dataclass(frozen=True)
class JacobiParams:
    """Jacobi parameters of a rank-one space (|alpha| = 1)."""

    a: float
    b: float
    m1: int = 0
    m2: int = 0

    @classmethod
    def from_multiplicities(cls, m1: int, m2: int) -> "JacobiParams":
        return cls(a=(m1 + m2 - 1) / 2, b=(m2 - 1) / 2, m1=m1, m2=m2)

    @property
    def rho(self) -> float:
        return self.a + self.b + 1.0

    def drift(self, r):
        """(2a+1) coth r + (2b+1) tanh r."""
        r = np.asarray(r, float)
        return (2 * self.a + 1) / np.tanh(r) + (2 * self.b + 1) * np.tanh(r)


def _check_tube(lam, rho):
    if np.any(np.abs(np.imag(lam)) > rho + 1e-12):
        raise SphericalError(f"|Im lam| exceeds rho = {rho}")


# ---------------------------------------------------------------------------
# series engines

def _series(A, B, C, z, max_terms=20000, tol=1e-17, derivative=False):
    """Sum 2F1(A, B; C; z) (and optionally d/dz) with broadcasting."""
    A, B, z = np.broadcast_arrays(np.asarray(A, complex), np.asarray(B, complex),
                                  np.asarray(z, complex))
    term = np.ones(z.shape, dtype=complex)
    total = term.copy()
    dtotal = np.zeros(z.shape, dtype=complex)
    # terms can grow until k ~ |A| + |B| before decaying
    peak = float(np.max(np.abs(A) + np.abs(B), initial=0.0)) + 2
    for k in range(max_terms):
        term = term * (A + k) * (B + k) / ((C + k) * (k + 1)) * z
        total += term
        if derivative:
            # d/dz z^{k+1} = (k+1) z^k
            with np.errstate(invalid="ignore", divide="ignore"):
                dtotal += np.where(z != 0, term * (k + 1) / z, 0)
            if k == 0:
                dtotal = np.where(z == 0, A * B / C, dtotal)
        small = np.abs(term) <= tol * np.maximum(np.abs(total), 1e-300)
        if k > 4 and k > peak and np.all(small):
            break
    else:
        raise SphericalError("hypergeometric series did not converge")
    return (total, dtotal) if derivative else total


def phi_hypergeometric(jac: JacobiParams, lam, r, derivative=False):
    """phi_lam(r) = cosh(r)^{-(rho + i lam)} 2F1((rho+i lam)/2, (a-b+1+i lam)/2; a+1; tanh^2 r).

    Vectorised over broadcast (lam, r).  Converges for every finite r but
    slows down as tanh^2 r -> 1, so it is used for r up to a few units.
    """
    lam = np.asarray(lam, complex)
    r = np.asarray(r, float)
    A = (jac.rho + 1j * lam) / 2
    B = (jac.a - jac.b + 1 + 1j * lam) / 2
    th = np.tanh(r)
    z = th ** 2
    pre = np.exp(-(jac.rho + 1j * lam) * np.log(np.cosh(r)))
    if not derivative:
        return pre * _series(A, B, jac.a + 1, z)
    F, dF = _series(A, B, jac.a + 1, z, derivative=True)
    val = pre * F
    # d/dr: -(rho + i lam) tanh r * val + pre * F'(z) * 2 tanh r sech^2 r
    dval = -(jac.rho + 1j * lam) * th * val + pre * dF * 2 * th / np.cosh(r) ** 2
    return val, dval


def phi_taylor(jac: JacobiParams, lam, r):
    """2F1((rho+i lam)/2, (rho-i lam)/2; a+1; -sinh^2 r), the expansion at the origin."""
    lam = np.asarray(lam, complex)
    r = np.asarray(r, float)
    z = -np.sinh(r) ** 2
    return _series((jac.rho + 1j * lam) / 2, (jac.rho - 1j * lam) / 2, jac.a + 1, z)


# ---------------------------------------------------------------------------
# ODE engine

def _ode_rhs(jac):
    rho = jac.rho

    def rhs(r, y, lam2):
        # y = [Re v, Im v, Re v', Im v'] stacked over the lam vector; u = e^{-rho r} v
        n = lam2.shape[0]
        v = y[:n] + 1j * y[n:2 * n]
        dv = y[2 * n:3 * n] + 1j * y[3 * n:]
        A = jac.drift(r)
        ddv = -(A - 2 * rho) * dv - (lam2 + 2 * rho ** 2 - rho * A) * v
        return np.concatenate([dv.real, dv.imag, ddv.real, ddv.imag])

    return rhs


def phi_ode_many(jac: JacobiParams, lams, r_eval, rtol=1e-11, atol=1e-14, dense=False):
    """Solve the radial eigen-equation for several lam at once.

    Returns phi_lam(r) with shape (len(lams), len(r_eval)); for
    ``dense=True`` the scipy solution object (in the variable v = e^{rho r} u)
    is returned as well.
    """
    lams = np.atleast_1d(np.asarray(lams, complex))
    r_eval = np.atleast_1d(np.asarray(r_eval, float))
    _check_tube(lams, jac.rho)
    if np.any(r_eval < 0):
        raise SphericalError("negative radius")
    out = np.empty((len(lams), len(r_eval)), dtype=complex)
    small = r_eval <= R0
    if np.any(small):
        out[:, small] = phi_taylor(jac, lams[:, None], r_eval[None, small])
    big = ~small
    sol = None
    if np.any(big) or dense:
        rmax = max(float(r_eval.max()), 2 * R0)
        u0, du0 = phi_hypergeometric(jac, lams, R0, derivative=True)
        e0 = math.exp(jac.rho * R0)
        v0, dv0 = e0 * u0, e0 * (du0 + jac.rho * u0)
        y0 = np.concatenate([v0.real, v0.imag, dv0.real, dv0.imag])
        lam2 = lams ** 2
        sol = integrate.solve_ivp(_ode_rhs(jac), (R0, rmax), y0, method="DOP853",
                                  rtol=rtol, atol=atol, args=(lam2,), dense_output=True)
        if sol.status != 0:
            raise SphericalError(f"ODE integration failed: {sol.message}")
        rb = r_eval[big]
        Y = sol.sol(rb)
        n = len(lams)
        v = Y[:n] + 1j * Y[n:2 * n]
        out[:, big] = v * np.exp(-jac.rho * rb)[None, :]
    return (out, sol) if dense else out


def phi_ode_rank1(jac: JacobiParams, lam, r):
    """phi_lam(r) from the radial ODE; scalar lam, scalar or array r."""
    r_arr = np.atleast_1d(np.asarray(r, float))
    val = phi_ode_many(jac, [lam], r_arr)[0]
    if np.isrealobj(lam) or np.imag(lam) == 0:
        val = val.real
    return val[0] if np.ndim(r) == 0 else val


# ---------------------------------------------------------------------------
# integral representation (real hyperbolic spaces)

def log_horo_factor(r, theta):
    """log(cosh r - sinh r cos theta), stable for large r."""
    r = np.asarray(r, float)
    theta = np.asarray(theta, float)
    with np.errstate(divide="ignore"):
        a = r + 2 * np.log(np.abs(np.sin(theta / 2)))
        b = -r + 2 * np.log(np.abs(np.cos(theta / 2)))
    return np.logaddexp(a, b)


def iwasawa_A_rank1(theta, s):
    """<alpha, A(k_theta^{-1} y)> for |y| = s: -log(cosh s - sinh s cos theta)."""
    return -log_horo_factor(s, theta)


def phi_integral_rank1(space: SpaceSpec, lam, r, epsrel=1e-12):
    """c_n int_0^pi (cosh r - sinh r cos t)^{-(i lam + rho)} sin^{n-2} t dt."""
    if space.rank != 1 or space.datum.mult[0, 1] != 0:
        raise SpaceError("integral representation needs a real hyperbolic space")
    n = space.n
    rho = float(space.rho[0])
    lam = complex(lam)
    _check_tube(lam, rho)
    r = float(r)
    cn = math.gamma(n / 2) / (math.sqrt(math.pi) * math.gamma((n - 1) / 2))
    if r == 0.0:
        return 1.0 + 0j

    def f(t, part):
        val = np.exp(-(1j * lam + rho) * log_horo_factor(r, t)) * np.sin(t) ** (n - 2)
        return val.real if part == 0 else val.imag

    pts = [0.0]
    t = 2 * math.exp(-r)
    while t < math.pi:
        pts.append(t)
        t *= 4
    pts.append(math.pi)
    total = 0j
    err = 0.0
    # the achieved error is checked below; a vanishing imaginary part makes
    # quad warn about a purely relative target it cannot meet
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for lo, hi in zip(pts[:-1], pts[1:]):
            for part in (0, 1):
                v, e = integrate.quad(f, lo, hi, args=(part,), epsabs=0, epsrel=epsrel, limit=400)
                total += v if part == 0 else 1j * v
                err += e
    val = cn * total
    if cn * err > 1e-9 * max(abs(val), 1e-300) and cn * err > 1e-13:
        raise SphericalError(f"angular quadrature reached only {cn * err:.2e}")
    return val


# ---------------------------------------------------------------------------
# Harish-Chandra series

def hc_coefficients_rank1(jac: JacobiParams, lam, K):
    """Gamma_k(lam), k = 0..K, of Phi_lam(r) = e^{(i lam - rho) r} sum_k Gamma_k e^{-2kr}.

    Classical recursion obtained by inserting the series into the radial
    equation:  2k(k - i lam) Gamma_k = sum_{j=1..k} c_j (rho + 2(k-j) - i lam) Gamma_{k-j},
    c_j = (m1 + m2) + m2 (-1)^j.  Running sums make it O(K).
    """
    lam = np.asarray(lam, complex)
    p = 2 * jac.a + 1           # m1 + m2
    q = 2 * jac.b + 1           # m2
    il = 1j * lam
    G = np.empty(lam.shape + (K + 1,), dtype=complex)
    G[..., 0] = 1.0
    P = np.zeros(lam.shape, complex)
    Q = np.zeros(lam.shape, complex)
    for k in range(1, K + 1):
        E = (jac.rho - il + 2 * (k - 1)) * G[..., k - 1]
        P = P + E
        Q = Q + (-1) ** (k - 1) * E
        S = p * P + q * (-1) ** k * Q
        G[..., k] = S / (2 * k * (k - il))
    return G


def hc_series_rank1(jac: JacobiParams, lam, x, K):
    """sum_{k<=K} Gamma_k(lam) x^k, same recursion without storing the coefficients.

    Returns the sum and the modulus of the last term (a truncation proxy).
    """
    lam = np.asarray(lam, complex)
    p = 2 * jac.a + 1
    q = 2 * jac.b + 1
    il = 1j * lam
    g = np.ones(np.broadcast(lam, x).shape, complex)
    total = g.copy()
    P = np.zeros_like(g)
    Q = np.zeros_like(g)
    xk = np.ones_like(g)
    for k in range(1, K + 1):
        E = (jac.rho - il + 2 * (k - 1)) * g
        P = P + E
        Q = Q + (-1) ** (k - 1) * E
        g = (p * P + q * (-1) ** k * Q) / (2 * k * (k - il))
        xk = xk * x
        total = total + g * xk
    return total, np.abs(g * xk)


def _positive_roots_in_simple_coords(space):
    full, m = space.datum.all_positive_roots()
    coords = np.linalg.lstsq(space.datum.simple.T, full.T, rcond=None)[0].T
    return full, m, np.rint(coords).astype(int)


@dataclass
class SeriesCoefficients:
    """gamma_q(lam) for q = 2 sum k_i alpha_i, generated level by level.

    ``coeffs[k]`` holds gamma at the multi-index k (tuple); ``levels`` is the
    highest level computed; ``tail`` the size of the last level at the
    evaluation point used for truncation.
    """

    space: SpaceSpec
    lam: np.ndarray
    coeffs: dict
    levels: int = 0
    tail: float = float("nan")

    @classmethod
    def start(cls, space, lam):
        lam = np.asarray(lam, complex)
        return cls(space=space, lam=lam, coeffs={(0,) * space.rank: np.ones(lam.shape[:-1], complex)})

    def grow(self, level):
        """Compute all coefficients at the given level from the lower ones."""
        space = self.space
        full, mult, coords = _positive_roots_in_simple_coords(space)
        simple = space.datum.simple
        rho = space.rho
        lam = self.lam
        out = {}
        for k in _multi_indices(space.rank, level):
            kv = np.array(k)
            mu = 2 * kv @ simple
            lhs = mu @ mu - 2j * (lam @ mu)
            acc = np.zeros(lam.shape[:-1], complex)
            for beta, mb, bc in zip(full, mult, coords):
                j = 1
                while True:
                    prev = kv - j * bc
                    if np.any(prev < 0):
                        break
                    g = self.coeffs.get(tuple(prev))
                    if g is not None:
                        acc = acc + mb * g * ((mu + rho - 2 * j * beta) @ beta - 1j * (lam @ beta))
                    j += 1
            out[k] = 2 * acc / lhs
        self.coeffs.update(out)
        self.levels = level
        return out


def _multi_indices(rank, level):
    if rank == 1:
        return [(level,)]
    if rank == 2:
        return [(i, level - i) for i in range(level + 1)]
    out = []
    for first in range(level + 1):
        out += [(first,) + rest for rest in _multi_indices(rank - 1, level - first)]
    return out


def Phi_series(space: SpaceSpec, lam, H, tol=1e-10, max_levels=200, min_levels=3):
    """Phi_lam(H) = e^{<i lam - rho, H>} sum_q gamma_q(lam) e^{-<q,H>}.

    Returns (value, SeriesCoefficients).
    """
    lam = np.atleast_1d(np.asarray(lam, complex))
    H = np.atleast_1d(np.asarray(H, float))
    sc = SeriesCoefficients.start(space, lam)
    simple = space.datum.simple
    total = 1.0 + 0j
    small_run = 0
    for level in range(1, max_levels + 1):
        new = sc.grow(level)
        part = 0j
        for k, g in new.items():
            q = 2 * np.array(k) @ simple
            part += g * np.exp(-(q @ H))
        total += part
        sc.tail = abs(part)
        small_run = small_run + 1 if abs(part) < tol * abs(total) else 0
        if level >= min_levels and small_run >= 2:
            break
    else:
        raise SphericalError(f"Harish-Chandra series did not converge within {max_levels} "
                             f"levels at mu(H) = {float(mu_min(space, H)):.3g}")
    return np.exp((1j * lam - space.rho) @ H) * total, sc


def _richardson_zero(f, h0, npts=4):
    """Extrapolate f(h) to h = 0 from h = h0, 2h0, ..., npts*h0 (polynomial)."""
    hs = h0 * np.arange(1, npts + 1)
    vals = [f(h) for h in hs]
    w = np.array([np.prod([-hs[m] / (hs[j] - hs[m]) for m in range(npts) if m != j])
                  for j in range(npts)])
    return sum(wj * v for wj, v in zip(w, vals))


def _is_regular(space, lam):
    return np.min(np.abs(np.atleast_1d(lam) @ space.datum.roots.T)) >= REGULAR_TOL


def phi_series_hc(space: SpaceSpec, lam, H, mu_floor=1.0, tol=1e-10):
    """phi_lam(exp H) = sum_w c(w lam) Phi_{w lam}(H) for real lam, mu(H) >= mu_floor.

    The value is real when -1 lies in the Weyl group (rank one, for
    instance); otherwise phi_lam(exp H) is complex for real lam and the
    complex value is returned.

    Near-singular lam are handled by Richardson extrapolation from four
    regular neighbours along rho.
    """
    H = np.atleast_1d(np.asarray(H, float))
    lam = np.atleast_1d(np.asarray(lam, float))
    if float(mu_min(space, H)) < mu_floor:
        raise SphericalError(f"mu(H) = {float(mu_min(space, H)):.3g} below {mu_floor}")
    if not _is_regular(space, lam):
        step = 2 * REGULAR_TOL / float(np.min(space.datum.roots @ rho_unit(space)))
        return _richardson_zero(lambda h: phi_series_hc(space, lam + h * rho_unit(space), H,
                                                          mu_floor, tol), step)
    total = 0j
    for w in space.datum.weyl:
        wl = w @ lam
        val, _ = Phi_series(space, wl, H, tol=tol * 1e-2)
        total += val / complex(c_inv(space, wl))
    if _has_minus_one(space):
        return total.real
    return total


def _has_minus_one(space):
    return any(np.allclose(w, -np.eye(space.rank)) for w in space.datum.weyl)


def _complex_const(space):
    """pi(rho) * sum_w det(w) <w rho, rho>^N / (N! pi(rho)^2): the phi_0 normalisation."""
    N = space.n_reduced
    dets = weyl_dets(space)
    rho = space.rho
    s = sum(d * float((w @ rho) @ rho) ** N for d, w in zip(dets, space.datum.weyl))
    pr = float(pi_prod(space, rho))
    return s / (math.factorial(N) * pr)


def _complex_numerator(space, lam, H, series):
    """sum_w det(w) e^{i<w lam, H>}, by direct sum or dropping the vanishing low orders."""
    dets = weyl_dets(space)
    W = np.array(space.datum.weyl)
    wl = np.einsum("wij,...j->...wi", W, lam)           # (..., |W|, l)
    x = 1j * np.einsum("...wi,...i->...w", wl, H)
    if not series:
        return np.einsum("w,...w->...", dets, np.exp(x))
    N = space.n_reduced
    total = 0
    term = np.ones_like(x)
    for k in range(1, 200):
        term = term * x / k
        if k >= N:
            part = np.einsum("w,...w->...", dets, term)
            total = total + part
            if k > N + 4 and np.all(np.abs(term).max(axis=-1) < 1e-18 * np.maximum(np.abs(total), 1e-300)):
                break
    return total


def complex_case_phi(space: SpaceSpec, lam, H):
    """Elementary spherical function of a complex-type space.

    phi_lam(exp H) = pi(rho)/pi(i lam) * sum_w det(w) e^{i<w lam, H>} / prod_alpha 2 sinh<alpha, H>

    lam may be complex (regular); H in the closed chamber (walls and the
    origin handled by a limiting procedure).
    """
    if not space.is_complex_type:
        raise SpaceError("complex_case_phi needs all multiplicities equal to 2")
    lam = _as_lambda(space, lam)
    H = space.as_H(H)
    if np.min(np.abs(lam @ space.datum.roots.T)) < REGULAR_TOL:
        raise SphericalError("lam is singular")
    lam, H = np.broadcast_arrays(lam, H.astype(complex))
    H = H.real
    out = np.empty(lam.shape[:-1], dtype=complex)
    pr = float(pi_prod(space, space.rho))
    x = H @ space.datum.roots.T
    size = np.linalg.norm(H, axis=-1) * np.linalg.norm(lam, axis=-1)
    near0 = size < 3.0
    wall = (~near0) & (x.min(axis=-1) < 1e-3)
    far = ~(near0 | wall)

    def direct(l, h, series):
        num = _complex_numerator(space, l, h, series)
        den = np.prod(2 * np.sinh(h @ space.datum.roots.T), axis=-1)
        if series:
            # numerator and denominator both vanish to order N at H = 0:
            # divide each by pi(H) first
            ph = pi_prod(space, h)
            return pr / pi_prod(space, 1j * l) * (num / ph) / (den / ph)
        return pr / pi_prod(space, 1j * l) * num / den

    if np.any(far):
        out[far] = direct(lam[far], H[far], False)
    if np.any(near0):
        l0, h0 = lam[near0], H[near0]
        ok = (h0 @ space.datum.roots.T).min(axis=-1) > 1e-6 * np.maximum(np.linalg.norm(h0, axis=-1), 1e-300)
        res = np.empty(l0.shape[:-1], complex)
        if np.any(ok):
            res[ok] = direct(l0[ok], h0[ok], True)
        if np.any(~ok):
            u = rho_unit(space)
            res[~ok] = _richardson_zero(lambda h: direct(l0[~ok], h0[~ok] + h * u, True), 0.01, npts=8)
        out[near0] = res
    if np.any(wall):
        u = rho_unit(space)
        out[wall] = _richardson_zero(lambda h: direct(lam[wall], H[wall] + h * u, False), 5e-3, npts=6)
    return out


# ---------------------------------------------------------------------------
# ground spherical function

@functools.lru_cache(maxsize=64)
def _phi0_table(m1, m2, rmax):
    jac = JacobiParams.from_multiplicities(m1, m2)
    r_start = 2.0
    u, du = phi_hypergeometric(jac, 0.0, r_start, derivative=True)
    u, du = float(u.real), float(du.real)
    rho = jac.rho
    e = math.exp(rho * r_start)
    y0 = [e * u, e * (du + rho * u)]

    def rhs(r, y):
        A = jac.drift(r)
        return [y[1], -(A - 2 * rho) * y[1] - (2 * rho ** 2 - rho * A) * y[0]]

    sol = integrate.solve_ivp(rhs, (r_start, rmax), y0, method="DOP853",
                              rtol=1e-13, atol=1e-14, dense_output=True)
    if sol.status != 0:
        raise SphericalError(f"phi_0 integration failed: {sol.message}")
    return sol


def log_phi0_rank1(jac: JacobiParams, r):
    """log phi_0(r) for rank one (series below r = 2, cached ODE table beyond)."""
    r = np.asarray(r, float)
    out = np.empty(r.shape)
    low = r <= 2.0
    if np.any(low):
        out[low] = np.log(phi_hypergeometric(jac, 0.0, r[low]).real)
    if np.any(~low):
        rb = r[~low]
        rmax = 64.0
        while rmax < rb.max():
            rmax *= 2
        sol = _phi0_table(jac.m1, jac.m2, rmax)
        out[~low] = np.log(sol.sol(rb)[0]) - jac.rho * rb
    return out


def log_phi0(space: SpaceSpec, H):
    """log phi_0(exp H) for H in the closed chamber."""
    if space.rank == 1:
        Hs = space.as_H(H)[..., 0]
        return log_phi0_rank1(space.jacobi(), Hs)
    if space.is_complex_type:
        x = root_pairings(space, H)
        with np.errstate(invalid="ignore", divide="ignore"):
            # x / (2 sinh x) -> 1/2 at the walls
            lx = np.where(x > 1e-6, np.log(x) - (x + np.log1p(-np.exp(-2 * x))),
                          -math.log(2.0) - x * x / 6)
        return math.log(_complex_const(space)) + lx.sum(axis=-1)
    raise SpaceError("phi_0 is available for rank one and complex-type spaces")


def phi0(space: SpaceSpec, H):
    return np.exp(log_phi0(space, H))


def log_phi0_envelope(space: SpaceSpec, H):
    """log of prod_{reduced alpha}(1 + <alpha,H>) e^{-<rho,H>}."""
    x = root_pairings(space, H)
    return np.log1p(x).sum(axis=-1) - space.as_H(H) @ space.rho


def phi0_envelope_check(space: SpaceSpec, H):
    """(phi_0(H), phi_0(H) / envelope(H))."""
    lp = log_phi0(space, H)
    return np.exp(lp), np.exp(lp - log_phi0_envelope(space, H))


def phi_rank1(jac: JacobiParams, lam, r):
    """Dispatching rank-one evaluator: Taylor series near 0, hypergeometric to r=2, ODE beyond."""
    r = np.atleast_1d(np.asarray(r, float))
    lam = complex(lam)
    out = np.empty(r.shape, dtype=complex)
    t = r < TAYLOR_R
    m = (~t) & (r <= 2.0)
    b = r > 2.0
    if np.any(t):
        out[t] = phi_taylor(jac, lam, r[t])
    if np.any(m):
        out[m] = phi_hypergeometric(jac, lam, r[m])
    if np.any(b):
        out[b] = phi_ode_many(jac, [lam], r[b])[0]
    return out
