"""Long-time behaviour of the Laplace-Beltrami heat flow u(t) = u0 * h_t.

Radial data are evolved spectrally: the deviation u(t) - M h_t is the
inverse transform of (Hu0(lam) - M) e^{-t(|lam|^2+|rho|^2)}, evaluated with
the same contour-shifted rules as the heat kernel, so no cancellation
between u and M h_t occurs.  Data recentred at a point y0 at distance c are
radial about y0; their evolution is u_rad(t, d(x, y0)) and every L^1 norm
reduces to a double integral in geodesic polar coordinates with

    cosh d(x, y0) = cosh r cosh c - sinh r sinh c cos(psi).

The space-side routines are written for real hyperbolic spaces H^n.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import special, stats
from scipy.interpolate import BarycentricInterpolator
from scipy.optimize import brentq

from .heatkern import (ConcentrationSpec, DomainError, HeatEngine, R_SWITCH,
                       heat_transform)
from .quadrature import gl_breaks, gl_panels
from .spacegeom import SpaceError, log_density
from .spherical import iwasawa_A_rank1, log_horo_factor, phi_hypergeometric, phi_ode_many


class CoverageError(ArithmeticError):
    """The integration grid misses a non-negligible part of the integrand."""


def worker_count(default=1):
    import os
    try:
        return max(1, int(os.environ.get("HEATLAB_THREADS", default)))
    except ValueError:
        return default


def ordered_map(fn, items, workers=None):
    """map() over a thread pool with results in input order."""
    items = list(items)
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def _require_real_hyperbolic(space):
    if space.rank != 1 or space.datum.mult[0, 1] != 0:
        raise SpaceError("this routine needs a real hyperbolic space H^n")


def sphere_area(k):
    """Area of the unit sphere S^k."""
    return 2 * math.pi ** ((k + 1) / 2) / math.gamma((k + 1) / 2)


def log_cosh_distance(r, c, psi):
    """log cosh d for cosh d = cosh r cosh c - sinh r sinh c cos psi."""
    return np.log(np.cosh(r) * np.cosh(c) - np.sinh(r) * np.sinh(c) * np.cos(psi))


def hyperbolic_distance(r, c, psi):
    """Distance between points at radii r, c separated by angle psi (law of cosines)."""
    r, c, psi = np.broadcast_arrays(*(np.asarray(v, float) for v in (r, c, psi)))
    # sinh^2(d/2) = sinh^2((r-c)/2) + sinh r sinh c sin^2(psi/2), no cancellation
    s2 = np.sinh((r - c) / 2) ** 2 + np.sinh(r) * np.sinh(c) * np.sin(psi / 2) ** 2
    return 2 * np.arcsinh(np.sqrt(s2))


# ---------------------------------------------------------------------------
# initial data

def bump_profile(xi):
    """exp(-1/(1 - (r/xi)^2)) on r < xi, zero beyond."""
    def f(r):
        r = np.asarray(r, float)
        q = 1 - (r / xi) ** 2
        with np.errstate(divide="ignore", over="ignore"):
            return np.where(q > 0, np.exp(-1 / np.where(q > 0, q, 1.0)), 0.0)
    return f


@dataclass(frozen=True)
class InitialDatum:
    """Initial value u0, radial about the origin or about a point at distance ``center``.

    Parameters
    ----------
    profile : callable
        r -> value, vanishing for r > xi.
    xi : float
        Support radius.
    center : float
        0 for bi-K-invariant data; otherwise the bump is radial about a point
        at this distance from the origin.
    transform : callable, optional
        Exact spherical transform lam -> Hu0(lam) of the radial profile.
    """

    profile: Callable
    xi: float
    center: float = 0.0
    transform: Optional[Callable] = None
    label: str = "datum"

    def __post_init__(self):
        if not self.xi > 0:
            raise ValueError("support radius must be positive")
        if self.center < 0:
            raise ValueError("center distance must be nonnegative")

    @property
    def radial(self) -> bool:
        return self.center == 0.0

    @classmethod
    def bump(cls, xi=1.0, amplitude=1.0, center=0.0):
        f = bump_profile(xi)
        return cls(lambda r: amplitude * f(r), xi, center,
                   label=f"bump(xi={xi:g},a={amplitude:g},c={center:g})")

    @classmethod
    def heat(cls, engine: HeatEngine, s, mass=1.0):
        """u0 = mass * h_s, with its exact transform (not compactly supported)."""
        sp = engine.space
        R = engine.h_max(s)
        prof = engine.profile(s, r_max=R, step=0.02)

        def f(r):
            r = np.asarray(r, float)
            return mass * np.where(r <= R, np.exp(prof(np.minimum(r, R))), 0.0)

        def tr(lam):
            lam = np.asarray(lam, complex)
            return mass * np.exp(-s * (lam * lam + sp.rho_norm2))

        return cls(f, R, 0.0, tr, label=f"heat(s={s:g})")

    def recentred(self, center):
        return InitialDatum(self.profile, self.xi, center, self.transform, self.label + f"@{center:g}")


def _datum_rule(datum: InitialDatum, n=16):
    # the bump is flat to all orders at its edge; panels keep Gauss-Legendre effective
    return gl_panels(0.0, datum.xi, datum.xi / 12, n)


def mass(engine: HeatEngine, datum: InitialDatum) -> float:
    """M = int u0 (isometry invariant, so the centre does not matter)."""
    if datum.transform is not None:
        return float(datum.transform(-1j * engine.space.rho[0]).real)
    r, w = _datum_rule(datum)
    return engine.c_meas * float(np.sum(w * np.exp(log_density(engine.space, r)) * datum.profile(r)))


def l1_norm_datum(engine: HeatEngine, datum: InitialDatum) -> float:
    r, w = _datum_rule(datum)
    return engine.c_meas * float(np.sum(w * np.exp(log_density(engine.space, r)) * np.abs(datum.profile(r))))


# ---------------------------------------------------------------------------
# spherical transform

class SphericalTransform:
    """lam -> Hu0(lam) = c_meas int delta(r) u0(r) phi_{-lam}(r) dr for radial u0 (rank one).

    Real spectral parameters use the radial ODE (no cancellation at large
    lam); complex ones the hypergeometric series, which is accurate while
    |lam| xi stays moderate.  ``grid`` evaluates on lam = s + i beta tensor
    grids by exact evaluation at Chebyshev nodes in beta and barycentric
    interpolation, which is exact to rounding for this entire function.
    """

    def __init__(self, engine: HeatEngine, datum: InitialDatum, subtract=0.0):
        if engine.space.rank != 1:
            raise SpaceError("spherical_transform is implemented in rank one")
        self.engine = engine
        self.datum = datum
        self.subtract = subtract
        self.jac = engine.space.jacobi()
        r, w = _datum_rule(datum)
        self._r = r
        self._wf = engine.c_meas * w * np.exp(log_density(engine.space, r)) * datum.profile(r)
        self._cache = {}

    def _exact(self, lam):
        lam = np.asarray(lam, complex)
        if self.datum.transform is not None:
            return self.datum.transform(lam) - self.subtract
        flat = lam.ravel()
        out = np.empty(flat.shape, complex)
        real = np.abs(flat.imag) == 0
        if np.any(real):
            lr = flat[real].real
            uniq, inv = np.unique(np.abs(lr), return_inverse=True)
            phi = phi_ode_many(self.jac, uniq, self._r)
            out[real] = (phi @ self._wf)[inv]
        if np.any(~real):
            lc = flat[~real]
            if np.max(np.abs(lc)) * self.datum.xi > 30:
                raise DomainError("complex spectral parameter too large for the series engine")
            step = max(1, 200000 // len(self._r))
            vals = np.empty(lc.shape, complex)
            for i in range(0, len(lc), step):
                ph = phi_hypergeometric(self.jac, lc[i:i + step, None], self._r[None, :])
                vals[i:i + step] = np.einsum("ij,j->i", ph, self._wf)
            out[~real] = vals
        return out.reshape(lam.shape) - self.subtract

    def __call__(self, lam):
        return self._exact(lam)

    def grid(self, s, beta):
        """Values at s[None, :] + i beta[:, None].

        Hu0 is entire, so a tensor Chebyshev table over a rectangle holding
        the grid reproduces it to rounding.  The rectangle depends only on
        power-of-two bounds of the requested ranges, never on call history.
        """
        s = np.asarray(s, float)
        beta = np.asarray(beta, float)
        if self.datum.transform is not None:
            return self._exact(s[None, :] + 1j * beta[:, None])
        if s.min() < 0 or beta.min() < 0:
            raise DomainError("grid expects nonnegative real and imaginary parts")

        def pow2(x):
            return 2.0 ** max(0, math.ceil(math.log2(max(x, 1e-300))))

        key = (pow2(float(s.max())), pow2(float(beta.max())))
        table = self._cache.get(key)
        if table is None:
            S, B = key
            xs = _cheb_nodes(S, max(24, int(math.ceil(2 * self.datum.xi * S)) + 20))
            xb = _cheb_nodes(B, max(24, int(math.ceil(2 * self.datum.xi * B)) + 20))
            vals = self._exact(xs[None, :] + 1j * xb[:, None])
            table = (xs, xb, vals)
            self._cache[key] = table
        xs, xb, vals = table
        # explicit weights: scipy would otherwise permute the nodes at random
        along_s = BarycentricInterpolator(xs, vals, axis=1, wi=_cheb_weights(len(xs)))(s)
        return BarycentricInterpolator(xb, along_s, axis=0, wi=_cheb_weights(len(xb)))(beta)


def _cheb_nodes(L, n):
    k = np.arange(n)
    return 0.5 * L + 0.5 * L * np.cos(np.pi * (2 * k + 1) / (2 * n))


def _cheb_weights(n):
    """Barycentric weights for first-kind Chebyshev nodes (up to a common factor)."""
    k = np.arange(n)
    return (-1.0) ** k * np.sin(np.pi * (2 * k + 1) / (2 * n))


def spherical_transform(engine: HeatEngine, datum: InitialDatum):
    if not datum.radial:
        raise SpaceError("the spherical transform is defined for radial data")
    return SphericalTransform(engine, datum)


# ---------------------------------------------------------------------------
# evolution

def evolve(engine: HeatEngine, datum: InitialDatum, t, r):
    """u(t, r) for radial u0 via the inverse spherical transform."""
    if not datum.radial:
        raise SpaceError("evolve takes radial data; use offset_evolution for recentred data")
    sign, lg = engine.log_kernel(t, r, multiplier=SphericalTransform(engine, datum))
    return sign * np.exp(lg)


def deviation(engine: HeatEngine, datum: InitialDatum, t, r, M=None):
    """(sign, log|u(t,r) - M h_t(r)|) for radial u0."""
    M = mass(engine, datum) if M is None else M
    return engine.log_kernel(t, r, multiplier=SphericalTransform(engine, datum, subtract=M))


def evolve_direct(engine: HeatEngine, datum: InitialDatum, t, r, n_psi=96):
    """u(t, r) by space-side convolution with the kernel profile (H^n only)."""
    sp = engine.space
    _require_real_hyperbolic(sp)
    n = sp.n
    r = np.atleast_1d(np.asarray(r, float))
    rho_, wr = _datum_rule(datum)
    psi, wp = gl_panels(0.0, math.pi, math.pi / 8, n_psi // 8)
    wp = wp * np.sin(psi) ** (n - 2) * sphere_area(n - 2)
    prof = engine.profile(t, r_max=float(r.max()) + datum.xi + 1, step=0.02)
    wy = wr * np.exp(log_density(sp, rho_)) * datum.profile(rho_)
    out = np.empty(r.shape)
    for i, x in enumerate(r):
        d = hyperbolic_distance(x, rho_[:, None], psi[None, :])
        out[i] = np.einsum("i,ij,j->", wy, np.exp(prof(d)), wp)
    return out


# ---------------------------------------------------------------------------
# deviations

def _coverage_rule(engine, t, extra=0.0):
    rho = float(engine.space.rho[0])
    hi = 2 * t * rho + 14 * math.sqrt(t) + 6 + extra
    return hi


def _abs_integral(engine, t, signed_log, hi, p=None):
    """c_meas int_0^hi delta |f|^(1 or p), with panel breaks at the sign changes of f."""
    sp = engine.space
    width = min(1.0, max(0.1, math.sqrt(t) / 2))
    breaks = [0.0, hi] if hi <= R_SWITCH else [0.0, R_SWITCH, hi]
    r, _ = gl_breaks(breaks, width, engine.quad.radial_order)
    sg, lg = signed_log(r)
    flips = np.flatnonzero(sg[:-1] * sg[1:] < 0)
    roots = []
    for i in flips:
        a, b = r[i], r[i + 1]
        ref = 0.5 * (lg[i] + lg[i + 1])

        def f(x):
            s_, l_ = signed_log(np.array([x, x]))
            return float(s_[0] * math.exp(min(l_[0] - ref, 700.0)))
        roots.append(brentq(f, a, b, xtol=1e-13, rtol=1e-13))
    bk = sorted(set(breaks) | set(roots))
    r, w = gl_breaks(bk, width, engine.quad.radial_order)
    sg, lg = signed_log(r)
    ld = log_density(sp, r)
    with np.errstate(divide="ignore"):
        l1 = engine.c_meas * float(np.sum(w * np.exp(ld + lg)))
        lp = None
        if p is not None:
            lp = (engine.c_meas * float(np.sum(w * np.exp(ld + p * lg)))) ** (1.0 / p)
    # tail: the integrand at the outer end relative to the integral
    tail = math.exp(ld[-1] + lg[-1]) * width
    if l1 > 0 and tail > 0.01 * l1:
        raise CoverageError(f"outer boundary carries {tail / l1:.1%} of the L1 value")
    return l1, lp, (r, sg * np.exp(lg))


def linf_grid(engine, t, spec: ConcentrationSpec = ConcentrationSpec()):
    """Search grid for sup norms: Omega_t densely, the segment to 2t rho + 2r(t), a far tail."""
    rho = float(engine.space.rho[0])
    c, rt = 2 * t * rho, float(spec.radius(t))
    dense = np.linspace(max(0.0, c - rt), c + rt, 401)
    seg = np.linspace(0.0, c + 2 * rt, 401)
    far = np.linspace(c + 2 * rt, c + 4 * rt + 10, 41)
    near0 = np.linspace(0.0, 3.0, 61)
    return np.unique(np.concatenate([near0, dense, seg, far]))


def l1_deviation(engine: HeatEngine, datum: InitialDatum, t):
    return _deviation_norms(engine, datum, t)[0]


def linf_deviation(engine: HeatEngine, datum: InitialDatum, t):
    return _deviation_norms(engine, datum, t)[1]


def lp_deviation(engine: HeatEngine, datum: InitialDatum, t, p):
    return _deviation_norms(engine, datum, t, p)[2]


def _deviation_norms(engine, datum, t, p=None, spec=ConcentrationSpec()):
    """(L1, Linf, Lp) norms of u(t) - M h_t."""
    if not datum.radial:
        return _offset_norms(engine, datum, t, p)
    M = mass(engine, datum)
    mult = SphericalTransform(engine, datum, subtract=M)

    def signed_log(r):
        return engine.log_kernel(t, r, multiplier=mult)

    hi = _coverage_rule(engine, t, datum.xi)
    l1, lp, (rq, vals) = _abs_integral(engine, t, signed_log, hi, p)
    g = linf_grid(engine, t, spec)
    sg, lg = signed_log(g)
    linf = max(float(np.exp(lg).max()), float(np.abs(vals).max()))
    return l1, linf, lp


# -- recentred data -----------------------------------------------------------

def _polar_rule(engine, t, hi, n_psi=128):
    sp = engine.space
    n = sp.n
    width = min(1.0, max(0.1, math.sqrt(t) / 2))
    r, wr = gl_breaks([0.0, hi], width, engine.quad.radial_order)
    psi, wp = gl_panels(0.0, math.pi, math.pi / (n_psi // 16), 16)
    wp = wp * np.sin(psi) ** (n - 2) * sphere_area(n - 2)
    return r, wr * np.exp(log_density(sp, r)), psi, wp


def _offset_norms(engine, datum, t, p=None):
    sp = engine.space
    _require_real_hyperbolic(sp)
    c = datum.center
    base = InitialDatum(datum.profile, datum.xi, 0.0, datum.transform, datum.label)
    M = mass(engine, base)
    hi = _coverage_rule(engine, t, datum.xi + c)
    R = hi + c + 1
    grid_r = np.linspace(0.0, R, int(R / 0.02) + 1)
    u_log = _log_profile(engine, t, base, grid_r)
    prof_h = engine.profile(t, r_max=R, step=0.02)
    r, wr, psi, wp = _polar_rule(engine, t, hi)
    d = hyperbolic_distance(r[:, None], c, psi[None, :])
    dev = np.exp(u_log(d)) - M * np.exp(prof_h(r))[:, None]
    a = np.abs(dev)
    l1 = float(np.einsum("i,ij,j->", wr, a, wp))
    lp = None if p is None else float(np.einsum("i,ij,j->", wr, a ** p, wp)) ** (1 / p)
    return l1, float(a.max()), lp


def _log_profile(engine, t, datum, grid_r):
    """Cubic spline of log u(t, r) for nonnegative radial data."""
    from scipy.interpolate import CubicSpline
    sign, lg = engine.log_kernel(t, grid_r, multiplier=SphericalTransform(engine, datum))
    if np.any(sign <= 0):
        raise ArithmeticError("evolved nonnegative datum is not positive on the grid")
    return CubicSpline(grid_r, lg, bc_type=((1, 0.0), "not-a-knot"))


def offset_evolution(engine: HeatEngine, datum: InitialDatum, t, r, psi):
    """u(t, x) for x at radius r and angle psi from the direction of the datum's centre."""
    base = InitialDatum(datum.profile, datum.xi, 0.0, datum.transform, datum.label)
    d = hyperbolic_distance(r, datum.center, psi)
    return evolve(engine, base, t, np.ravel(d)).reshape(np.shape(d))


# ---------------------------------------------------------------------------
# reports

@dataclass
class ConvergenceReport:
    """Deviation norms on a time grid with a log-log fit of the L^1 rate."""

    times: np.ndarray
    l1_dev: np.ndarray
    linf_dev: np.ndarray
    lp_dev: dict = field(default_factory=dict)
    linf_norm: Optional[np.ndarray] = None
    fitted_slope: float = float("nan")
    slope_halfwidth: float = float("nan")
    fit_window: tuple = (10.0, 160.0)

    def rows(self):
        keys = sorted(self.lp_dev)
        for i, t in enumerate(self.times):
            yield [t, self.l1_dev[i], self.linf_dev[i], self.linf_norm[i]] + [self.lp_dev[p][i] for p in keys]


def loglog_fit(x, y):
    """OLS slope of log y on log x with a 95% half-width."""
    x, y = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    res = stats.linregress(x, y)
    if len(x) > 2:
        hw = float(stats.t.ppf(0.975, len(x) - 2) * res.stderr)
    else:
        hw = float("nan")
    return float(res.slope), hw


def convergence_report(engine: HeatEngine, datum: InitialDatum, times, p=3.0,
                       fit_window=(10.0, 160.0), workers=None) -> ConvergenceReport:
    times = np.asarray(times, float)
    rows = ordered_map(lambda t: _deviation_norms(engine, datum, t, p), times, workers)
    l1 = np.array([r[0] for r in rows])
    linf = np.array([r[1] for r in rows])
    lp = np.array([r[2] for r in rows])
    sp = engine.space
    norm = times ** (sp.nu / 2) * np.exp(sp.rho_norm2 * times) * linf
    win = (times >= fit_window[0]) & (times <= fit_window[1])
    slope, hw = loglog_fit(times[win], l1[win]) if win.sum() >= 2 else (float("nan"),) * 2
    return ConvergenceReport(times, l1, linf, {p: lp}, norm, slope, hw, tuple(fit_window))


def lp_interpolation_check(report: ConvergenceReport, p) -> bool:
    """||.||_p <= ||.||_1^{1/p} ||.||_inf^{1-1/p} for every row."""
    lp = report.lp_dev[p]
    bound = report.l1_dev ** (1 / p) * report.linf_dev ** (1 - 1 / p)
    return bool(np.all(lp <= bound * (1 + 1e-12)))


# ---------------------------------------------------------------------------
# point-mass counterexample

def k_integral_limit(space, s, n_theta=4000, signed=False):
    """Normalised int_K |e^{2 rho A(k^{-1} y)} - 1| dk for |y| = s (H^n)."""
    _require_real_hyperbolic(space)
    n = space.n
    rho = float(space.rho[0])
    if s == 0:
        return 0.0
    # the integrand changes sign where cosh s - sinh s cos(theta) = 1
    kink = math.acos(math.tanh(s / 2))
    th, w = gl_breaks([0.0, kink, math.pi], math.pi / (n_theta // 20), 20)
    w = w * np.sin(th) ** (n - 2) * sphere_area(n - 2) / sphere_area(n - 1)
    v = np.exp(2 * rho * iwasawa_A_rank1(th, s)) - 1.0
    return float(np.sum(w * (v if signed else np.abs(v))))


def _pair_l1(engine, t, log_a, log_b, hi, n_psi=128):
    """int |exp(log_a(r, psi)) - exp(log_b(r))| over H^n in polar coordinates."""
    r, wr, psi, wp = _polar_rule(engine, t, hi, n_psi)
    a = np.exp(log_a(r[:, None], psi[None, :]))
    b = np.exp(log_b(r))[:, None]
    return float(np.einsum("i,ij,j->", wr, np.abs(a - b), wp))


def dirac_l1_gap(engine: HeatEngine, s, t):
    """|| h_t(., y) - h_t(., o) ||_1 with d(o, y) = s."""
    sp = engine.space
    _require_real_hyperbolic(sp)
    if t < 5:
        raise DomainError("dirac_l1_gap needs t >= 5")
    if s == 0:
        return 0.0
    hi = _coverage_rule(engine, t, s)
    prof = engine.profile(t, r_max=hi + s + 1, step=0.02)
    # tail estimate: kernel mass beyond hi
    tail = 1.0 - engine.integrate(t, lambda H: engine.log_kernel(t, H), engine.radial_rule(t, 0.0, hi))
    if tail > 0.005:
        raise CoverageError(f"truncation leaves {tail:.2%} of the kernel mass")
    return _pair_l1(engine, t, lambda r, psi: prof(hyperbolic_distance(r, s, psi)), prof, hi)


def kernel_quotient(engine: HeatEngine, t, r, s, theta):
    """h_t(d(x, y)) / h_t(d(x, o)) for x at radius r, y at distance s, angle theta between them."""
    sp = engine.space
    _require_real_hyperbolic(sp)
    r, theta = np.broadcast_arrays(np.asarray(r, float), np.asarray(theta, float))
    d = hyperbolic_distance(r, s, theta)
    return np.exp(engine.log_kernel(t, d) - engine.log_kernel(t, r))


def quotient_limit(space, s, theta):
    """e^{2 rho A(k^{-1} y)}."""
    return np.exp(2 * float(space.rho[0]) * iwasawa_A_rank1(theta, s))


def quotient_error_fit(engine: HeatEngine, s, times=(10, 20, 40, 80, 160),
                       spec=ConcentrationSpec(), thetas=(0.0, math.pi / 2, math.pi)):
    """Worst |quotient - limit| over Omega_t, fitted against r(t)/t in log-log.

    Returns (slope, halfwidth, errors, r(t)/t).
    """
    rho = float(engine.space.rho[0])
    errs, scale = [], []
    for t in times:
        rt = float(spec.radius(t))
        rs = 2 * t * rho + rt * np.array([-1.0, -0.5, 0.0, 0.5, 1.0])
        rs = rs[rs > 0]
        e = 0.0
        for th in thetas:
            q = kernel_quotient(engine, t, rs, s, th)
            e = max(e, float(np.max(np.abs(q - quotient_limit(engine.space, s, th)))))
        errs.append(e)
        scale.append(rt / t)
    slope, hw = loglog_fit(scale, errs)
    return slope, hw, np.array(errs), np.array(scale)


def busemann(theta, s, r):
    """d(gamma(r), y) - r for the unit-speed ray gamma at angle theta from y, |y| = s."""
    r = np.asarray(r, float)
    e = np.exp(-2 * r)
    # cosh d e^{-r} written without cancellation
    a = 0.5 * (1 + e) * math.cosh(s) - 0.5 * (1 - e) * math.sinh(s) * np.cos(theta)
    return np.log(a + np.sqrt(np.maximum(a * a - e, 0.0)))


def busemann_limit(theta, s):
    return -iwasawa_A_rank1(theta, s)


# ---------------------------------------------------------------------------
# boundary transform

def boundary_transform(engine: HeatEngine, datum: InitialDatum, theta, sign=+1, n_psi=256):
    """Hu0(sign * i rho, k_theta M) = int u0(x) e^{(1 + sign) rho A(k_theta^{-1} x)} dx.

    Direct space-side quadrature; for sign = -1 the exponent vanishes and the
    value is the mass.
    """
    sp = engine.space
    _require_real_hyperbolic(sp)
    n = sp.n
    rho = float(sp.rho[0])
    c, xi = datum.center, datum.xi
    theta = np.atleast_1d(np.asarray(theta, float))
    lo, hi = max(0.0, c - xi), c + xi
    r, wr = gl_panels(lo, hi, (hi - lo) / 12, 16)
    wr = wr * np.exp(log_density(sp, r))
    if n == 2:
        # x = (r, phi); bump centred at angle 0
        phi, wp = gl_panels(-math.pi, math.pi, math.pi / 16, 16)
        u = datum.profile(hyperbolic_distance(r[:, None], c, phi[None, :]))
        out = []
        for th in theta:
            e = np.exp(-(1 + sign) * rho * log_horo_factor(r[:, None], phi[None, :] - th))
            out.append(float(np.einsum("i,ij,j->", wr, u * e, wp)))
        return np.array(out)
    # H^n: spherical coordinates about the axis of the centre; the boundary
    # point lies in a plane through that axis at angle theta
    a, wa = gl_panels(0.0, math.pi, math.pi / 16, 16)          # polar angle from the centre axis
    b, wb = gl_panels(0.0, math.pi, math.pi / 16, 16)          # azimuth (the remaining sphere)
    wa = wa * np.sin(a) ** (n - 2)
    wb = wb * np.sin(b) ** (n - 3) * sphere_area(n - 3)
    u = datum.profile(hyperbolic_distance(r[:, None], c, a[None, :]))
    out = []
    for th in theta:
        cosang = np.cos(a)[:, None] * math.cos(th) + np.sin(a)[:, None] * np.cos(b)[None, :] * math.sin(th)
        ang = np.arccos(np.clip(cosang, -1, 1))
        e = np.exp(-(1 + sign) * rho * log_horo_factor(r[:, None, None], ang[None]))
        out.append(float(np.einsum("i,ij,ijk,j,k->", wr, u, e, wa, wb)))
    return np.array(out)


def boundary_transform_translated(engine: HeatEngine, datum: InitialDatum, theta):
    """Hu0(i rho, k_theta M) through the translation law of the Iwasawa projection.

    For data radial about y0 the value is M * e^{2 rho A(k_theta^{-1} y0)}.
    """
    sp = engine.space
    base = InitialDatum(datum.profile, datum.xi, 0.0, datum.transform)
    M = mass(engine, base)
    return M * np.exp(2 * float(sp.rho[0]) * iwasawa_A_rank1(np.asarray(theta, float), datum.center))


def boundary_limit(engine: HeatEngine, datum: InitialDatum, route="direct", n_theta=128):
    """int_K |Hu0(i rho, kM) - M| dk (normalised dk)."""
    sp = engine.space
    _require_real_hyperbolic(sp)
    n = sp.n
    th, w = gl_panels(0.0, math.pi, math.pi / (n_theta // 16), 16)
    w = w * np.sin(th) ** (n - 2) * sphere_area(n - 2) / sphere_area(n - 1)
    M = mass(engine, InitialDatum(datum.profile, datum.xi, 0.0, datum.transform))
    if route == "direct":
        vals = boundary_transform(engine, datum, th, +1)
    else:
        vals = boundary_transform_translated(engine, datum, th)
    return float(np.sum(w * np.abs(vals - M)))


# ---------------------------------------------------------------------------
# Euclidean reference

def euclidean_evolve(datum: InitialDatum, n, t, r):
    """(u0 * G_t)(r) in R^n for radial u0, with the Bessel form of the angular integral."""
    r = np.atleast_1d(np.asarray(r, float))
    y, w = _datum_rule(datum)
    nu = (n - 2) / 2
    z = r[:, None] * y[None, :] / (2 * t)
    # int_0^pi e^{z cos psi} sin^{2nu} psi dpsi = sqrt(pi) Gamma(nu+1/2) (2/z)^nu I_nu(z)
    with np.errstate(divide="ignore", invalid="ignore"):
        ang = np.where(z > 1e-8,
                       math.sqrt(math.pi) * math.gamma(nu + 0.5) * (2 / z) ** nu * special.ive(nu, z),
                       math.sqrt(math.pi) * math.gamma(nu + 0.5) / math.gamma(nu + 1))
    area = sphere_area(n - 2) if n > 2 else 2.0
    g = np.exp(-((r[:, None] - y[None, :]) ** 2) / (4 * t))
    kern = (4 * math.pi * t) ** (-n / 2) * g * ang * area
    return kern @ (w * y ** (n - 1) * datum.profile(y))


def euclidean_baseline(datum: InitialDatum, n, times):
    """t^{n/2} sup |u(t) - M G_t| in R^n; tends to zero (strong L^inf convergence)."""
    y, w = _datum_rule(datum)
    M = sphere_area(n - 1) * float(np.sum(w * y ** (n - 1) * datum.profile(y)))
    out = []
    for t in times:
        r = np.linspace(0.0, 12 * math.sqrt(t) + datum.xi, 600)
        G = (4 * math.pi * t) ** (-n / 2) * np.exp(-r * r / (4 * t))
        out.append(t ** (n / 2) * float(np.max(np.abs(euclidean_evolve(datum, n, t, r) - M * G))))
    return np.array(out)


def triangle_gap(engine, u0: InitialDatum, v0: InitialDatum, t):
    """Right side minus left side of ||u-M h|| <= ||u0-v0|| + ||v-M_v h|| + |M-M_v| (radial data)."""
    diff = InitialDatum(lambda r: u0.profile(r) - v0.profile(r), max(u0.xi, v0.xi))
    lhs = l1_deviation(engine, u0, t)
    rhs = l1_norm_datum(engine, diff) + l1_deviation(engine, v0, t) + abs(mass(engine, u0) - mass(engine, v0))
    return rhs - lhs


__all__ = [
    "InitialDatum", "ConvergenceReport", "SphericalTransform", "spherical_transform",
    "evolve", "evolve_direct", "deviation", "l1_deviation", "linf_deviation", "lp_deviation",
    "convergence_report", "lp_interpolation_check", "dirac_l1_gap", "k_integral_limit",
    "kernel_quotient", "quotient_limit", "quotient_error_fit", "busemann", "busemann_limit",
    "boundary_transform", "boundary_transform_translated", "boundary_limit",
    "euclidean_evolve", "euclidean_baseline", "mass", "hyperbolic_distance", "heat_transform",
]
