"""Heat flow of the distinguished Laplacian on the solvable group S = N exp(a).

The distinguished Laplacian is conjugate to Delta + |rho|^2 by the square
root of the modular function,

    mod(g) = e^{-2<rho, A(g)>},   htil_t = mod^{1/2} e^{|rho|^2 t} h_t,

and right Haar measure is d_r g = e^{2<rho, A(g)>} dg.  Integrals against
d_r of radial profiles reduce to c_meas int delta(H) phi_0(H) F(H) dH,
because the K-average of e^{<rho, A(kg)>} is phi_0.

Non-radial computations use the upper half-space model of H^n, where a
point is (x, h) with x in R^{n-1}, h > 0, A = log h and

    cosh d((x, h), o) = 1 + (|x|^2 + (h - 1)^2) / (2h),   o = (0, 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline

from .convlab import (InitialDatum, SphericalTransform, _datum_rule, hyperbolic_distance,
                      linf_grid, loglog_fit, mass, ordered_map, sphere_area, _log_profile,
                      _require_real_hyperbolic)
from .heatkern import ConcentrationSpec, DomainError, HeatEngine, R_SWITCH
from .harish import b_at_zero
from .quadrature import gl_breaks, gl_panels
from .spacegeom import SpaceError, log_density, mu_min, pi_prod, root_pairings
from .spherical import log_phi0


class DivergentWeightError(ValueError):
    """The weighted integral defining the admissible data class diverges."""


# ---------------------------------------------------------------------------
# points and measures

@dataclass(frozen=True)
class SolvablePoint:
    """Point (x, h) of the half-space model; A = log h."""

    x: np.ndarray
    h: float

    def __post_init__(self):
        x = np.atleast_1d(np.asarray(self.x, float))
        if not self.h > 0:
            raise ValueError("height must be positive")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "h", float(self.h))

    @property
    def A(self) -> float:
        return math.log(self.h)

    def distance(self) -> float:
        """Geodesic distance to o = (0, 1)."""
        return float(half_space_distance(self.x, self.h))

    @classmethod
    def from_polar(cls, r, theta, n=2):
        """Point at distance r from o, at angle theta from the upward vertical (in the x1-h plane)."""
        den = math.cosh(r) - math.sinh(r) * math.cos(theta)
        h = 1.0 / den
        x = np.zeros(n - 1)
        x[0] = math.sinh(r) * math.sin(theta) / den
        return cls(x, h)


def half_space_distance(x, h):
    """d((x, h), o) from cosh d = 1 + (|x|^2 + (h-1)^2)/(2h)."""
    x = np.atleast_1d(np.asarray(x, float))
    h = np.asarray(h, float)
    x2 = np.sum(x * x, axis=-1)
    # sinh^2(d/2) = (|x|^2 + (h-1)^2) / (4h)
    return 2 * np.arcsinh(np.sqrt((x2 + (h - 1) ** 2) / (4 * h)))


def log_height_polar(r, theta):
    """A = log h of the point at distance r, angle theta from the vertical: -log(cosh r - sinh r cos theta)."""
    r = np.asarray(r, float)
    theta = np.asarray(theta, float)
    with np.errstate(divide="ignore"):
        a = r + 2 * np.log(np.abs(np.sin(theta / 2)))
        b = -r + 2 * np.log(np.abs(np.cos(theta / 2)))
    return -np.logaddexp(a, b)


def modular(space, point: SolvablePoint) -> float:
    """e^{-2<rho, A>}."""
    return math.exp(-2 * float(space.rho[0]) * point.A)


def h_tilde(engine: HeatEngine, t, point: SolvablePoint) -> float:
    """mod^{1/2} e^{|rho|^2 t} h_t at a half-space point."""
    sp = engine.space
    _require_real_hyperbolic(sp)
    d = point.distance()
    lg = float(engine.log_kernel(t, np.array([d, d]))[0])
    return math.exp(-float(sp.rho[0]) * point.A + sp.rho_norm2 * t + lg)


def right_haar_radial_integral(engine: HeatEngine, log_F: Callable, rule=None, t=1.0):
    """int_G e^{<rho, A(g)>} F(g) dg = c_meas int delta phi_0 F for radial F (given as log F)."""
    return engine.integrate(t, lambda H: log_phi0(engine.space, H) + log_F(H), rule)


def htilde_total_mass(engine: HeatEngine, t):
    """int_S d_r htil_t."""
    sp = engine.space
    return right_haar_radial_integral(engine, lambda H: sp.rho_norm2 * t + engine.log_kernel(t, H), t=t)


# ---------------------------------------------------------------------------
# Abel transform

def abel_check(engine: HeatEngine, t, A, order=16):
    """int_N htil_t(n exp A) dn compared with (4 pi t)^{-1/2} e^{-A^2/4t}.

    Returns (value, gaussian).  The N-integral is taken over x in R^{n-1}
    after the substitution d = |A| + w^2, which absorbs the square-root
    behaviour at x = 0:  |x| d|x| = h sinh d dd  with |x|^2 = 2h(cosh d - cosh A).
    """
    sp = engine.space
    _require_real_hyperbolic(sp)
    if abs(A) > 4 * math.sqrt(t) + 1e-12:
        raise DomainError("abel_check needs |A| <= 4 sqrt(t)")
    n = sp.n
    rho = float(sp.rho[0])
    h = math.exp(A)
    a = abs(A)
    d_max = 2 * t * rho + 20 * math.sqrt(t) + 10 + a
    W = math.sqrt(d_max - a)
    w, ww = gl_panels(0.0, W, min(0.25, W / 8), order)
    d = a + w * w
    # cosh d - cosh A, without cancellation
    gap = 2 * np.sinh((d + a) / 2) * np.sinh((d - a) / 2)
    x = np.sqrt(2 * h * gap)
    lk = engine.log_kernel(t, d)
    with np.errstate(divide="ignore"):
        lx = (n - 3) * np.log(x)
    integrand = np.exp(lk + lx + math.log(h) + np.log(np.sinh(np.maximum(d, 1e-300)))) * 2 * w
    if n == 2:
        area = 2.0
    else:
        area = sphere_area(n - 2)
    # at w = 0 the factor x^{n-3} sinh(d) * 2w stays finite; Gauss nodes avoid the endpoint
    val = area * float(np.sum(ww * integrand)) * math.exp(sp.rho_norm2 * t - rho * A)
    tail = float(integrand[-1] * area * math.exp(sp.rho_norm2 * t - rho * A))
    if tail > 1e-8 * max(val, 1e-300):
        raise DomainError(f"N-integral truncated too early (tail {tail:.1e})")
    gauss = (4 * math.pi * t) ** -0.5 * math.exp(-A * A / (4 * t))
    return val, gauss


# ---------------------------------------------------------------------------
# concentration region on S

@dataclass(frozen=True)
class OmegaTilde:
    """eps sqrt(t) <= |H| <= sqrt(t)/eps and min <alpha, H> >= eps sqrt(t)."""

    t: float
    inner: float
    outer: float

    def contains(self, space, H):
        H = space.as_H(H)
        norm = np.linalg.norm(H, axis=-1)
        return (norm >= self.inner) & (norm <= self.outer) & (mu_min(space, H) >= self.inner)


def omega_tilde(spec: ConcentrationSpec, t) -> OmegaTilde:
    if t < 1:
        raise DomainError("omega_tilde needs t >= 1")
    e = float(spec.eps(t))
    return OmegaTilde(float(t), e * math.sqrt(t), math.sqrt(t) / e)


def _omega_rule(engine, region: OmegaTilde):
    sp = engine.space
    t = region.t
    w = min(1.0, max(0.1, math.sqrt(t) / 2))
    if sp.rank == 1:
        return gl_breaks([region.inner, region.outer], w, engine.quad.radial_order)
    if sp.rank != 2:
        raise SpaceError("omega_tilde rules exist in rank one and two")
    # polar rule: for each radius the angular interval where every simple root pairs >= inner
    R, wr = gl_panels(region.inner, region.outer, w, engine.quad.radial_order)
    simple = sp.datum.simple
    ang = np.arctan2(simple[:, 1], simple[:, 0])
    norms = np.linalg.norm(simple, axis=1)
    Hs, ws = [], []
    for Ri, wi in zip(R, wr):
        c = region.inner / (Ri * norms)
        if np.any(c > 1):
            continue
        half = np.arccos(c)
        # each constraint: |psi - ang_i| <= half_i (mod 2 pi); intersect the arcs
        lo, hi = -np.inf, np.inf
        for a, hw in zip(ang, half):
            lo = max(lo, a - hw)
            hi = min(hi, a + hw)
        if hi <= lo:
            continue
        psi, wp = gl_panels(lo, hi, 0.05, 12)
        Hs.append(np.stack([Ri * np.cos(psi), Ri * np.sin(psi)], -1))
        ws.append(wi * Ri * wp)
    return np.concatenate(Hs), np.concatenate(ws)


def _check_arcs(space):
    # the arc intersection above assumes the simple-root directions are less than pi apart
    simple = space.datum.simple
    ang = np.arctan2(simple[:, 1], simple[:, 0])
    return abs(ang[0] - ang[1]) < math.pi


def mass_outside_tilde(engine: HeatEngine, spec: ConcentrationSpec, t):
    """1 - int_{Omega~_t} d_r htil_t."""
    sp = engine.space
    if sp.rank == 2 and not _check_arcs(sp):
        raise SpaceError("unsupported chamber geometry")
    region = omega_tilde(spec, t)
    rule = _omega_rule(engine, region)
    inside = right_haar_radial_integral(
        engine, lambda H: sp.rho_norm2 * t + engine.log_kernel(t, H), rule, t)
    return 1.0 - inside


# ---------------------------------------------------------------------------
# refined asymptotics

def constants(engine: HeatEngine):
    """(C1, C2, C3) of the critical and refined asymptotics."""
    sp = engine.space
    p0 = float(pi_prod(sp, sp.rho0).real)
    c1 = engine.c1
    return c1, b_at_zero(sp) / p0, c1 / p0


def refined_asymptotics(engine: HeatEngine, t, H, spec=ConcentrationSpec()):
    """Scaled residuals ((h/model - C3) eps sqrt t, (phi_0/model - C2) mu(H)).

    Models: t^{-nu/2} e^{-|rho|^2 t} pi(H) e^{-<rho,H>} e^{-|H|^2/4t}  and  pi(H) e^{-<rho,H>}.
    """
    sp = engine.space
    H = sp.as_H(H)
    region = omega_tilde(spec, t)
    if not np.all(region.contains(sp, H)):
        raise DomainError("H must lie in the concentration region on S")
    _, C2, C3 = constants(engine)
    lpi = np.log(pi_prod(sp, H).real)
    rH = H @ sp.rho
    log_mphi = lpi - rH
    log_mh = -sp.nu / 2 * math.log(t) - sp.rho_norm2 * t + log_mphi - np.sum(H * H, axis=-1) / (4 * t)
    rh = np.exp(engine.log_kernel(t, H) - log_mh)
    rp = np.exp(log_phi0(sp, H) - log_mphi)
    e = float(spec.eps(t))
    return (rh - C3) * e * math.sqrt(t), (rp - C2) * mu_min(sp, H)


def refined_model(engine: HeatEngine, t, H):
    sp = engine.space
    H = sp.as_H(H)
    _, _, C3 = constants(engine)
    return C3 * np.exp(-sp.nu / 2 * math.log(t) - sp.rho_norm2 * t - H @ sp.rho
                       - np.sum(H * H, axis=-1) / (4 * t)) * pi_prod(sp, H).real


# ---------------------------------------------------------------------------
# mass function

class MassFunction:
    """g -> (v0 * phi_0)(g) / phi_0(g) for a datum radial about a point at distance ``center``.

    Evaluated by quadrature over the support of v0 (real hyperbolic spaces),
    or, for data radial about the origin on any catalog space, as the
    constant Hv0(0).
    """

    def __init__(self, engine: HeatEngine, datum: InitialDatum, n_psi=64):
        self.engine = engine
        self.datum = datum
        self.n_psi = n_psi
        base = InitialDatum(datum.profile, datum.xi, 0.0, datum.transform)
        self.hv0 = float(SphericalTransform(engine, base)(np.array([0.0]))[0].real) \
            if engine.space.rank == 1 else _hv0_general(engine, base)

    def __call__(self, r, psi=0.0):
        """M~ at the point at distance r from o, angle psi from the direction of the datum's centre."""
        sp = self.engine.space
        _require_real_hyperbolic(sp)
        n = sp.n
        d = self.datum
        r = np.atleast_1d(np.asarray(r, float))
        psi = np.broadcast_to(np.asarray(psi, float), r.shape)
        # y in geodesic polar coordinates about the datum centre y0
        rho_, wr = _datum_rule(d)
        wy = wr * np.exp(log_density(sp, rho_)) * d.profile(rho_)
        a, wa = gl_panels(0.0, math.pi, math.pi / (self.n_psi // 16), 16)
        wa = wa * np.sin(a) ** (n - 2) * sphere_area(n - 2)
        g0 = hyperbolic_distance(r, d.center, psi)          # d(g, y0)
        out = np.empty(r.shape)
        for i in range(r.size):
            dist = hyperbolic_distance(g0[i], rho_[:, None], a[None, :])
            val = np.einsum("i,ij,j->", wy, np.exp(log_phi0(sp, dist.ravel()).reshape(dist.shape)), wa)
            out[i] = val / math.exp(float(log_phi0(sp, np.array([r[i], r[i]]))[0]))
        return out

    def closed_form(self, r, psi=0.0):
        """Hv0(0) phi_0(d(g, y0)) / phi_0(g): the functional equation of phi_0."""
        sp = self.engine.space
        r = np.atleast_1d(np.asarray(r, float))
        g0 = hyperbolic_distance(r, self.datum.center, psi)
        return self.hv0 * np.exp(log_phi0(sp, g0) - log_phi0(sp, r))

    def harnack_bound(self, r_max=20.0):
        """int |v0| times the sup of phi_0(d(y, g))/phi_0(g) over y in the support, g in a sample."""
        sp = self.engine.space
        d = self.datum
        from .convlab import l1_norm_datum
        r = np.linspace(0.0, r_max, 81)
        reach = d.center + d.xi
        # worst case: y displaced by 'reach' towards the origin
        ratio = np.exp(log_phi0(sp, np.maximum(r - reach, 0.0)) - log_phi0(sp, r))
        base = InitialDatum(d.profile, d.xi, 0.0, d.transform)
        return l1_norm_datum(self.engine, base) * float(ratio.max())


def _hv0_general(engine, datum):
    sp = engine.space
    if sp.rank == 1:
        raise AssertionError
    # int v0 phi_0 over the chamber, for data given as a function of |H|
    H, w = engine.chamber_rule(1.0, radius=datum.xi)
    return engine.c_meas * float(np.sum(w * np.exp(log_density(sp, H) + log_phi0(sp, H))
                                        * datum.profile(np.linalg.norm(H, axis=-1))))


def mass_function(engine: HeatEngine, datum: InitialDatum, r, psi=0.0):
    return MassFunction(engine, datum)(r, psi)


def ratio_gap(engine: HeatEngine, t, r_g, s, theta=0.0, spec=ConcentrationSpec()):
    """h_t(d(g, y))/h_t(g) - phi_0(d(g, y))/phi_0(g) for |g| = r_g, |y| = s at angle theta."""
    sp = engine.space
    _require_real_hyperbolic(sp)
    region = omega_tilde(spec, t)
    r_g = np.atleast_1d(np.asarray(r_g, float))
    if not np.all(region.contains(sp, r_g)):
        raise DomainError("g must lie in the concentration region on S")
    if s == 0:
        return np.zeros(r_g.shape)
    d = hyperbolic_distance(r_g, s, theta)
    q_h = np.exp(engine.log_kernel(t, d) - engine.log_kernel(t, r_g))
    q_p = np.exp(log_phi0(sp, d) - log_phi0(sp, r_g))
    return q_h - q_p


def kostant_check(point: SolvablePoint, tol=1e-12) -> bool:
    """<rho, A(g)> <= <rho, g+>: in the half-space model |log h| <= d(g, o)."""
    return bool(abs(point.A) <= point.distance() + tol)


# ---------------------------------------------------------------------------
# sup norms

def _chamber_grid(space, t, n_r=300, n_psi=41):
    from .heatkern import chamber_angles
    p0, p1 = chamber_angles(space)
    psi = np.linspace(p0, p1, n_psi)
    R = np.linspace(0.0, 8 * math.sqrt(t) + 5, n_r)
    return np.stack([np.outer(R, np.cos(psi)), np.outer(R, np.sin(psi))], -1).reshape(-1, 2)


def log_htilde_orbit_max(engine: HeatEngine, t, H):
    """log of sup over the K-orbit of htil_t: |rho|^2 t + <rho, H> + log h_t(H)."""
    sp = engine.space
    H = sp.as_H(H)
    return sp.rho_norm2 * t + H @ sp.rho + engine.log_kernel(t, H)


def sup_norm_htilde(engine: HeatEngine, t, grid=None):
    """t^{(l + |Sigma_r+|)/2} || htil_t ||_inf, returned with the maximiser."""
    sp = engine.space
    if t < 1:
        raise DomainError("sup_norm_htilde needs t >= 1")
    if grid is None:
        grid = np.linspace(0.0, 8 * math.sqrt(t) + 5, 801) if sp.rank == 1 else _chamber_grid(sp, t)
    H = sp.as_H(grid)
    lv = log_htilde_orbit_max(engine, t, H)
    i = int(np.argmax(lv))
    if sp.rank == 1 and i == len(lv) - 1:
        raise DomainError("sup found on the edge of the search grid")
    return math.exp(sp.l_plus_sigma / 2 * math.log(t) + lv[i]), H[i]


def outside_sup_tilde(engine: HeatEngine, spec: ConcentrationSpec, t):
    """Normalised sup of htil_t over the complement of Omega~_t, split into the three regimes.

    Returns a dict with keys 'small' (|H| < inner), 'large' (|H| > outer),
    'wall' (mu(H) < inner, rank >= 2 only) and 'all'.
    """
    sp = engine.space
    region = omega_tilde(spec, t)
    if sp.rank == 1:
        H = np.linspace(0.0, 2 * t * float(sp.rho[0]) + 16 * math.sqrt(t), 1601)
    else:
        H = _chamber_grid(sp, t, 400, 61)
    Hh = sp.as_H(H)
    lv = log_htilde_orbit_max(engine, t, Hh) + sp.l_plus_sigma / 2 * math.log(t)
    norm = np.linalg.norm(Hh, axis=-1)
    mu = mu_min(sp, Hh)
    masks = {"small": norm < region.inner, "large": norm > region.outer}
    if sp.rank > 1:
        masks["wall"] = (mu < region.inner) & (norm >= region.inner) & (norm <= region.outer)
    out = {k: float(np.exp(lv[m].max())) if np.any(m) else 0.0 for k, m in masks.items()}
    out["all"] = max(out.values())
    return out


# ---------------------------------------------------------------------------
# deviations from the mass-weighted kernel on S

def _weighted_abs(engine, t, signed_log, hi, log_weight):
    """c_meas int delta w |f| with sign-change breaks (rank one)."""
    from .convlab import _abs_integral
    def sl(r):
        s, l = signed_log(r)
        return s, l + log_weight(r)
    l1, _, (r, vals) = _abs_integral(engine, t, sl, hi)
    return l1


def tilde_deviation_radial(engine: HeatEngine, datum: InitialDatum, t, spec=ConcentrationSpec()):
    """(L1, Linf) on S of v(t) - M~ htil_t for data radial about the origin (rank one).

    L1 = e^{|rho|^2 t} c_meas int delta phi_0 |u - M~ h_t|,
    Linf = e^{|rho|^2 t} max e^{rho r} |u - M~ h_t|, with u = v0 * h_t and M~ = Hv0(0).
    """
    sp = engine.space
    if sp.rank != 1:
        raise SpaceError("tilde_deviation_radial is implemented in rank one")
    hv0 = float(SphericalTransform(engine, datum)(np.array([0.0]))[0].real)
    mult = SphericalTransform(engine, datum, subtract=hv0)

    def signed_log(r):
        return engine.log_kernel(t, r, multiplier=mult)

    hi = 2 * t * float(sp.rho[0]) + 14 * math.sqrt(t) + 6 + datum.xi
    l1 = _weighted_abs(engine, t, signed_log, hi,
                       lambda r: sp.rho_norm2 * t + log_phi0(sp, r))
    g = linf_grid(engine, t, spec)
    s, lg = signed_log(g)
    linf = float(np.exp(lg + sp.rho_norm2 * t + float(sp.rho[0]) * g).max())
    return l1, linf


def tilde_deviation_offset(engine: HeatEngine, datum: InitialDatum, t, direction=math.pi / 3,
                           n_theta=256):
    """(L1, Linf) on S for a bump radial about y0 at distance ``datum.center`` (H^2).

    y0 lies at angle ``direction`` from the upward vertical.  v(t, g) is
    u_rad(t, d(g, y0)); M~(g) h_t(g) = Hv0(0) phi_0(d(g, y0)) h_t(g) / phi_0(g).
    """
    sp = engine.space
    _require_real_hyperbolic(sp)
    if sp.n != 2:
        raise SpaceError("the off-origin experiment is implemented on H^2")
    rho = float(sp.rho[0])
    c = datum.center
    base = InitialDatum(datum.profile, datum.xi, 0.0, datum.transform)
    hv0 = float(SphericalTransform(engine, base)(np.array([0.0]))[0].real)
    hi = 2 * t * rho + 14 * math.sqrt(t) + 6 + datum.xi + c
    R = hi + c + 1
    grid_r = np.linspace(0.0, R, int(R / 0.02) + 1)
    u_log = _log_profile(engine, t, base, grid_r)
    h_log = engine.profile(t, r_max=R, step=0.02)
    w = min(1.0, max(0.1, math.sqrt(t) / 2))
    r, wr = gl_breaks([0.0, R_SWITCH, hi], w, engine.quad.radial_order)
    wr = wr * np.exp(log_density(sp, r))
    phi, wp = gl_panels(-math.pi, math.pi, 2 * math.pi / (n_theta // 16), 16)
    psi = phi[None, :] - direction
    d = hyperbolic_distance(r[:, None], c, psi)
    A = log_height_polar(r[:, None], phi[None, :])
    log_ref = math.log(hv0) + log_phi0(sp, d.ravel()).reshape(d.shape) + h_log(r)[:, None] \
        - log_phi0(sp, r)[:, None]
    rel = np.expm1(u_log(d) - log_ref)                        # (u - M~ h) / (M~ h)
    base_l1 = log_ref + sp.rho_norm2 * t + rho * A
    l1 = float(np.einsum("i,ij,j->", wr, np.exp(base_l1) * np.abs(rel), wp))
    # sup over the same polar grid
    linf = float(np.max(np.exp(log_ref + sp.rho_norm2 * t - rho * A) * np.abs(rel)))
    return l1, linf


@dataclass
class TildeDeviationReport:
    times: np.ndarray
    l1: np.ndarray
    linf: np.ndarray
    linf_norm: np.ndarray

    def decreasing(self) -> bool:
        return bool(np.all(np.diff(self.l1) < 0) and np.all(np.diff(self.linf_norm) < 0))

    def final_fraction(self):
        return float(self.l1[-1] / self.l1[0]), float(self.linf_norm[-1] / self.linf_norm[0])


def tilde_deviation_report(engine: HeatEngine, datum: InitialDatum, times, workers=None,
                           **kw) -> TildeDeviationReport:
    sp = engine.space
    times = np.asarray(times, float)
    fn = (lambda t: tilde_deviation_radial(engine, datum, t)) if datum.radial else \
        (lambda t: tilde_deviation_offset(engine, datum, t, **kw))
    rows = ordered_map(fn, times, workers)
    l1 = np.array([a for a, _ in rows])
    linf = np.array([b for _, b in rows])
    return TildeDeviationReport(times, l1, linf, times ** (sp.l_plus_sigma / 2) * linf)


def _tilde_pair(engine, datum, t, **kw):
    if datum.radial:
        return tilde_deviation_radial(engine, datum, t)
    return tilde_deviation_offset(engine, datum, t, **kw)


def thm15_l1(engine, datum, t, **kw):
    """|| v(t) - M~ htil_t ||_{L1(S)}."""
    return _tilde_pair(engine, datum, t, **kw)[0]


def thm15_linf(engine, datum, t, normalized=True, **kw):
    """|| v(t) - M~ htil_t ||_{Linf(S)}, times t^{(l + |Sigma_r+|)/2} when ``normalized``."""
    v = _tilde_pair(engine, datum, t, **kw)[1]
    return v * t ** (engine.space.l_plus_sigma / 2) if normalized else v


# ---------------------------------------------------------------------------
# weighted data class

def weighted_integral(engine: HeatEngine, profile: Callable, R):
    """c_meas int_0^R delta(r) |v0(r)| e^{rho r} dr (rank one)."""
    sp = engine.space
    r, w = gl_panels(0.0, R, 0.5, 16)
    lg = log_density(sp, r) + float(sp.rho[0]) * r
    return engine.c_meas * float(np.sum(w * np.exp(lg) * np.abs(profile(r))))


def weighted_class_check(engine: HeatEngine, profile: Callable, R0=20.0, doublings=3, tol=1e-6):
    """Accept v0 when int |v0| e^{<rho, g+>} converges numerically.

    The truncated integral is evaluated on [0, R0 2^k]; the datum is
    accepted when the last increments fall below ``tol`` relative and keep
    shrinking.  Returns (accepted, values).
    """
    vals = [weighted_integral(engine, profile, R0 * 2 ** k) for k in range(doublings + 1)]
    inc = np.abs(np.diff(vals))
    ok = bool(np.all(np.isfinite(vals)) and inc[-1] <= tol * abs(vals[-1])
              and np.all(np.diff(inc) <= 0))
    return ok, vals


def weighted_deviation_trend(engine: HeatEngine, profile: Callable, times=(5.0, 10.0, 20.0), R=None):
    """L1(S) deviations of an exponentially decaying admissible datum via space-side convolution.

    Raises DivergentWeightError for data outside the weighted class.
    """
    from .convlab import evolve_direct
    ok, vals = weighted_class_check(engine, profile)
    if not ok:
        raise DivergentWeightError(f"weighted integral does not settle: {vals}")
    sp = engine.space
    _require_real_hyperbolic(sp)
    if R is None:
        # truncate where the weighted tail is below 1e-12 of the total
        R = 10.0
        while weighted_integral(engine, profile, 2 * R) - weighted_integral(engine, profile, R) > 1e-12 * vals[-1]:
            R *= 1.5
    datum = InitialDatum(profile, R)
    r0, w0 = _datum_rule(datum, 16)
    hv0 = engine.c_meas * float(np.sum(w0 * np.exp(log_density(sp, r0) + log_phi0(sp, r0)) * profile(r0)))
    out = []
    for t in times:
        hi = 2 * t * float(sp.rho[0]) + 14 * math.sqrt(t) + 6 + R
        r, w = gl_breaks([0.0, R_SWITCH, hi], min(1.0, math.sqrt(t) / 2), 16)
        u = evolve_direct(engine, datum, t, r)
        h = np.exp(engine.log_kernel(t, r))
        wt = np.exp(log_density(sp, r) + log_phi0(sp, r) + sp.rho_norm2 * t)
        out.append(engine.c_meas * float(np.sum(w * wt * np.abs(u - hv0 * h))))
    return np.array(out)


__all__ = [
    "SolvablePoint", "MassFunction", "OmegaTilde", "modular", "h_tilde", "right_haar_radial_integral",
    "htilde_total_mass", "abel_check", "omega_tilde", "mass_outside_tilde", "refined_asymptotics",
    "refined_model", "constants", "mass_function", "ratio_gap", "kostant_check", "sup_norm_htilde",
    "outside_sup_tilde", "tilde_deviation_radial", "tilde_deviation_offset", "tilde_deviation_report", "thm15_l1", "thm15_linf",
    "weighted_class_check", "weighted_deviation_trend", "half_space_distance", "log_height_polar",
]
