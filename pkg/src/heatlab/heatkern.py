"""Heat kernel of the Laplace-Beltrami operator via the inverse spherical transform.

The kernel is

    h_t(H) = C0 * int_a |c(lam)|^{-2} phi_lam(H) e^{-t(|lam|^2 + |rho|^2)} dlam,

evaluated in the log domain.  Rank one uses two regimes.  For r >= R_SWITCH
the Harish-Chandra expansion splits the integrand into c(-lam)^{-1} Phi_lam,
and the contour is moved to Im lam = r/2t, where the phase e^{i lam r} and the
Gaussian combine into the non-oscillating factor e^{-t s^2 - r^2/4t}.  Near the
origin the integral is taken on the real line with phi_lam from the radial ODE.
For complex-type spaces Phi_lam is elementary and, after the same shift, the
remaining integrand is a polynomial in s, so Gauss-Hermite is exact.

Radial integrals over the space are c_meas * int_{a+} delta(H) f(H) dH with a
fixed measure convention c_meas; the constant C0 is calibrated once so that
the kernel has unit mass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline

from .harish import b_at_zero, b_function, c_inv
from .quadrature import gauss_hermite, gl_breaks, gl_panels, trapezoid_periodic
from .spacegeom import (SpaceError, SpaceSpec, log_density, mu_min, pi_prod,
                        root_pairings, rho_unit)
from .spherical import (_richardson_zero, hc_series_rank1, log_phi0,
                        phi_ode_many)

T_MIN = 0.05
R_SWITCH = 0.5
QUAD_TOL = 1e-6
T_SHIFT_MULT = 2.0


class QuadratureError(ArithmeticError):
    """Quadrature did not reach the requested accuracy; ``estimate`` holds what it did reach."""

    def __init__(self, msg, estimate):
        super().__init__(f"{msg} (estimated relative error {estimate:.2e})")
        self.estimate = estimate


class DomainError(ValueError):
    """Arguments outside the region where an approximation is defined."""


def heat_transform(space: SpaceSpec, lam, t):
    """e^{-t(|lam|^2 + |rho|^2)}, the spherical transform of h_t."""
    if t <= 0:
        raise DomainError("t must be positive")
    lam = np.asarray(lam, float)
    if space.rank == 1 and (lam.ndim == 0 or lam.shape[-1] != 1):
        lam = lam[..., None]
    return np.exp(-t * (np.sum(lam * lam, axis=-1) + space.rho_norm2))


def measure_convention(space: SpaceSpec) -> float:
    """Volume of K/M used in polar coordinates.

    For the real hyperbolic space H^n this is the unit sphere S^{n-1}, which
    makes the kernel the Riemannian one.  For the other spaces the volume is
    set to one; C0 absorbs the difference.
    """
    if space.name.startswith("Hr:"):
        n = space.n
        return 2 * math.pi ** (n / 2) / math.gamma(n / 2)
    return 1.0


def inversion_constant(space: SpaceSpec, volume: float = 1.0) -> float:
    """2^{n-l} / ((2 pi)^l * volume * |W|)."""
    l = space.rank
    return 2.0 ** (space.n - l) / ((2 * math.pi) ** l * volume * space.weyl_order)


# ---------------------------------------------------------------------------
# chamber geometry in rank two

def chamber_angles(space: SpaceSpec):
    """Angular range [psi0, psi1] of the positive chamber of a rank-two space."""
    if space.rank != 2:
        raise SpaceError("chamber_angles is for rank two")
    rot = np.array([[0.0, -1.0], [1.0, 0.0]])
    edges = []
    for a in space.datum.simple:
        for sgn in (1, -1):
            v = sgn * (rot @ a)
            if space.in_chamber(v, tol=1e-10):
                edges.append(math.atan2(v[1], v[0]))
    psi = sorted(edges)
    return psi[0], psi[-1]


# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadSpec:
    """Node counts and cutoffs of the spectral and radial rules."""

    order: int = 12            # Gauss-Legendre nodes per spectral panel
    check_order: int = 8       # embedded coarser rule for error estimates
    gauss_width: float = 14.0  # spectral cutoff in units of 1/sqrt(t)
    radial_order: int = 16
    gh_order: int = 6

    def cutoff(self, t):
        # e^{-t lam^2} < e^{-196} beyond; never more than max(40/sqrt t, 10)
        return min(max(40 / math.sqrt(t), 10.0), self.gauss_width / math.sqrt(t))

    def panel(self, t):
        return min(0.25, 0.75 / math.sqrt(t))


class HeatEngine:
    """Heat kernel evaluator with calibrated normalisation.

    Parameters
    ----------
    space : SpaceSpec
        Rank one, or a complex-type space of rank two.
    t_ref : float
        Calibration time.
    quad : QuadSpec, optional
    calibrate : bool
        When False, C0 takes the closed-form value instead of being fitted.

    Attributes
    ----------
    c_meas : float
        Measure convention: integrals over the space are c_meas * int delta f.
    c0 : float
        Calibrated inversion constant.
    calibration_residual : float
        |c_meas int delta h_{t_ref} - 1| after calibration.
    """

    def __init__(self, space: SpaceSpec, t_ref=1.0, quad: Optional[QuadSpec] = None,
                 calibrate=True, t_min=T_MIN):
        if space.rank > 2 or (space.rank == 2 and not space.is_complex_type):
            raise SpaceError("heat kernels are implemented for rank one and complex-type rank two")
        self.space = space
        self.quad = quad or QuadSpec()
        self.t_min = float(t_min)
        self.t_ref = float(t_ref)
        self.c_meas = measure_convention(space)
        self.c0 = inversion_constant(space, self.c_meas)
        self.c0_theory = self.c0
        if calibrate:
            # the mass is linear in C0, so one evaluation fixes it
            mass = self.total_mass(self.t_ref)
            self.c0 = self.c0 / mass
        self.calibration_residual = abs(self.total_mass(self.t_ref) - 1.0)
        self._frozen = True

    def __setattr__(self, key, value):
        if getattr(self, "_frozen", False):
            raise AttributeError("HeatEngine is immutable after calibration")
        object.__setattr__(self, key, value)

    def settings(self) -> dict:
        q = self.quad
        return {"space": self.space.name, "t_ref": self.t_ref, "c_meas": self.c_meas,
                "c0": self.c0, "order": q.order, "radial_order": q.radial_order,
                "gauss_width": q.gauss_width, "gh_order": q.gh_order}

    # -- constants ---------------------------------------------------------

    @property
    def c1(self) -> float:
        """Constant of the critical-region asymptotics."""
        sp = self.space
        N = sp.n_reduced
        return (self.c0 * 2.0 ** (-N) * sp.weyl_order * math.pi ** (sp.rank / 2)
                * float(pi_prod(sp, sp.rho0).real) / b_at_zero(sp))

    def h_max(self, t):
        """Largest |H| at which the quadrature is trusted."""
        return 2 * math.sqrt(self.space.rho_norm2) * t + 40 * math.sqrt(t) + 40

    def _check_t(self, t):
        if not t >= self.t_min:
            raise DomainError(f"t = {t} is below t_min = {self.t_min}")

    # -- rank one ----------------------------------------------------------

    def _shifted(self, t, r, mult, order):
        """Re int_0^S e^{-t s^2} c(-lam)^{-1} (sum_k Gamma_k e^{-2kr}) m(lam) ds, lam = s + i r/2t."""
        sp = self.space
        jac = sp.jacobi()
        s, w = gl_panels(0.0, self.quad.gauss_width / math.sqrt(t), self.quad.panel(t), order)
        gauss = w * np.exp(-t * s * s)
        out = np.empty(r.shape)
        # group radii by the number of series terms they need
        K_of = np.minimum(2 ** np.ceil(np.log2(40.0 / r + 4)).astype(int), 512)
        for K in np.unique(K_of):
            idx = np.flatnonzero(K_of == K)
            step = max(1, int(2e6 // (len(s) * 4)))
            for i in range(0, len(idx), step):
                sel = idx[i:i + step]
                rr = r[sel]
                lam = s[None, :] + 1j * (rr / (2 * t))[:, None]
                ser, _ = hc_series_rank1(jac, lam, np.exp(-2 * rr)[:, None], int(K))
                val = c_inv(sp, -lam) * ser
                if mult is not None:
                    grid = getattr(mult, "grid", None)
                    val = val * (grid(s, rr / (2 * t)) if grid else mult(lam))
                out[sel] = np.einsum("ij,j->i", val.real, gauss)
        return out

    def _direct(self, t, r, mult, order):
        """int_0^Lam |c|^{-2} phi_lam(r) m(lam) e^{-t lam^2} dlam on the real line."""
        sp = self.space
        lam, w = gl_panels(0.0, self.quad.cutoff(t), self.quad.panel(t), order)
        dens = (c_inv(sp, lam) * c_inv(sp, -lam)).real
        f = w * dens * np.exp(-t * lam * lam)
        if mult is not None:
            f = f * np.real(mult(lam.astype(complex)))
        phi = phi_ode_many(sp.jacobi(), lam, r).real       # (nlam, nr)
        return np.einsum("i,ij->j", f, phi)

    def _rank1_raw(self, t, r, mult, order):
        """(log-prefactor, integral) with h = C0 * exp(log-prefactor) * integral."""
        rho = float(self.space.rho[0])
        big = r >= R_SWITCH
        if mult is not None and t < T_SHIFT_MULT:
            # multipliers are only trusted near the real axis at small t
            big = np.zeros(r.shape, bool)
        logpre = np.full(r.shape, -t * rho * rho + math.log(2.0))
        val = np.empty(r.shape)
        if np.any(big):
            rb = r[big]
            logpre[big] += math.log(2.0) - rho * rb - rb * rb / (4 * t)
            val[big] = self._shifted(t, rb, mult, order)
        if np.any(~big):
            val[~big] = self._direct(t, r[~big], mult, order)
        return logpre, val

    # -- complex type, rank two ----------------------------------------------

    def _complex_raw(self, t, H):
        sp = self.space
        x1, w1 = gauss_hermite(self.quad.gh_order, 1 / math.sqrt(t))
        S = np.stack(np.meshgrid(x1, x1, indexing="ij"), -1).reshape(-1, 2)
        W = np.outer(w1, w1).ravel()
        out = np.empty(H.shape[:-1])
        step = 4096
        for i in range(0, len(H), step):
            Hc = H[i:i + step]
            lam = S[None, :, :] + 1j * Hc[:, None, :] / (2 * t)
            out[i:i + step] = np.einsum("ij,j->i", c_inv(sp, -lam).real, W)
        return out

    def _complex_log(self, t, H):
        sp = self.space
        x = root_pairings(sp, H)
        J = self._complex_raw(t, H)
        with np.errstate(divide="ignore", invalid="ignore"):
            lp = np.log(-np.expm1(-2 * x)).sum(axis=-1)
            return (math.log(self.c0 * sp.weyl_order) - t * sp.rho_norm2 - H @ sp.rho
                    - np.sum(H * H, axis=-1) / (4 * t) + np.log(J) - lp)

    def _complex_log_safe(self, t, H):
        sp = self.space
        scale = 1 + np.linalg.norm(H, axis=-1)
        wall = mu_min(sp, H) < 1e-6 * scale
        out = np.empty(H.shape[:-1])
        if np.any(~wall):
            out[~wall] = self._complex_log(t, H[~wall])
        if np.any(wall):
            u = rho_unit(sp)
            Hw = H[wall]
            # log h_t is smooth across the walls; extrapolate along rho
            val = _richardson_zero(lambda h: self._complex_log(t, Hw + h * u), 1e-3, npts=5)
            out[wall] = np.real(val)
        return out

    # -- public evaluation ---------------------------------------------------

    def _prep(self, H):
        H = self.space.as_H(H)
        if not np.all(self.space.in_chamber(H, tol=1e-9)):
            raise DomainError("H must lie in the closed positive chamber")
        return H

    def log_kernel(self, t, H, multiplier: Optional[Callable] = None, estimate=False):
        """log h_t(H) (or log |h_t^m| with a spectral multiplier), no range checks.

        With ``multiplier`` the integrand gains an even entire factor m(lam)
        and the result is returned as (sign, log|value|).  With ``estimate``
        an error estimate from an embedded coarser rule is returned as well.
        """
        self._check_t(t)
        H = self._prep(H)
        shape = H.shape[:-1]
        Hf = H.reshape(-1, self.space.rank)
        sp = self.space
        if sp.rank == 1:
            r = Hf[:, 0]
            logpre, val = self._rank1_raw(t, r, multiplier, self.quad.order)
            err = None
            if estimate:
                _, val2 = self._rank1_raw(t, r, multiplier, self.quad.check_order)
                err = np.abs(val2 - val) / np.maximum(np.abs(val), 1e-300)
            with np.errstate(divide="ignore"):
                logv = math.log(self.c0) + logpre + np.log(np.abs(val))
            sign = np.sign(val)
        else:
            if multiplier is not None:
                raise SpaceError("spectral multipliers are implemented in rank one")
            logv = self._complex_log_safe(t, Hf)
            sign = np.ones(len(Hf))
            err = np.zeros(len(Hf)) if estimate else None
        logv, sign = logv.reshape(shape), sign.reshape(shape)
        res = (sign, logv) if multiplier is not None else logv
        if estimate:
            return res, err.reshape(shape)
        return res

    def heat_kernel(self, t, H, log=False, return_flag=False):
        """h_t(H) with an error check; beyond h_max(t) the envelope is returned and flagged.

        Raises
        ------
        QuadratureError
            If the embedded error estimate exceeds 1e-6 relative.
        DomainError
            For t < t_min or H outside the closed chamber.
        """
        self._check_t(t)
        H = self._prep(H)
        norm = np.linalg.norm(H, axis=-1)
        far = norm > self.h_max(t)
        out = np.empty(H.shape[:-1])
        if np.any(~far):
            val, err = self.log_kernel(t, H[~far], estimate=True)
            worst = float(np.max(err)) if err.size else 0.0
            if worst > QUAD_TOL or not np.all(np.isfinite(val)):
                raise QuadratureError("heat kernel quadrature failed", worst)
            out[~far] = val
        if np.any(far):
            out[far] = log_heat_envelope(self, t, H[far])
        res = out if log else np.exp(out)
        return (res, far) if return_flag else res

    # -- radial integrals ----------------------------------------------------

    def radial_rule(self, t, lo=0.0, hi=None):
        """Nodes and weights in r (rank one) covering the mass of h_t."""
        rho = float(np.sqrt(self.space.rho_norm2))
        if hi is None:
            hi = 2 * t * rho + 14 * math.sqrt(t) + 4
        w = min(1.0, max(0.1, math.sqrt(t) / 2))
        breaks = [lo, hi]
        if lo < R_SWITCH < hi:
            breaks = [lo, R_SWITCH, hi]
        return gl_breaks(breaks, w, self.quad.radial_order)

    def chamber_rule(self, t, radius=None):
        """Polar rule (H, weight) over the chamber of a rank-two space."""
        sp = self.space
        rho = math.sqrt(sp.rho_norm2)
        if radius is None:
            radius = 2 * t * rho + 14 * math.sqrt(t) + 4
        psi0, psi1 = chamber_angles(sp)
        wpsi = min(0.1, 0.5 * math.sqrt(t) / (2 * t * rho + 1))
        psi, wp = gl_panels(psi0, psi1, wpsi, 12)
        R, wr = gl_panels(0.0, radius, min(1.0, max(0.1, math.sqrt(t) / 2)), self.quad.radial_order)
        H = np.stack([np.outer(R, np.cos(psi)), np.outer(R, np.sin(psi))], -1).reshape(-1, 2)
        w = np.outer(wr * R, wp).ravel()
        return H, w

    def ball_rule(self, center, radius, t):
        """Polar rule over the disc B(center, radius) clipped to the chamber (rank two)."""
        sp = self.space
        th, wt = trapezoid_periodic(256)
        R, wr = gl_panels(0.0, radius, min(1.0, max(0.1, math.sqrt(t) / 2)), self.quad.radial_order)
        H = center[None, None, :] + np.stack([np.outer(R, np.cos(th)), np.outer(R, np.sin(th))], -1)
        H = H.reshape(-1, 2)
        w = np.outer(wr * R, wt).ravel()
        inside = sp.in_chamber(H, tol=0.0)
        return H[inside], w[inside]

    def integrate(self, t, log_f, rule=None):
        """c_meas * int delta(H) exp(log_f(H)) dH over a rule (default: the whole chamber)."""
        if rule is None:
            rule = self._full_rule(t)
        H, w = rule
        H = self.space.as_H(H)
        with np.errstate(divide="ignore", invalid="ignore"):
            lg = log_density(self.space, H) + log_f(H)
        lg = np.where(np.isfinite(lg), lg, -np.inf)
        return self.c_meas * float(np.sum(w * np.exp(lg)))

    def _full_rule(self, t):
        if self.space.rank == 1:
            return self.radial_rule(t)
        return self.chamber_rule(t)

    def total_mass(self, t):
        """c_meas * int delta h_t."""
        return self.integrate(t, lambda H: self.log_kernel(t, H))

    def round_trip(self, t, lam):
        """c_meas * int delta h_t phi_{-lam}, which should equal e^{-t(|lam|^2+|rho|^2)}."""
        sp = self.space
        H, w = self._full_rule(t)
        H = sp.as_H(H)
        logh = self.log_kernel(t, H)
        lam = np.atleast_1d(np.asarray(lam, float))
        if sp.rank == 1:
            r = H[:, 0]
            phi = np.empty((len(lam), len(r)))
            for j, l in enumerate(lam):
                phi[j] = phi_ode_many(sp.jacobi(), [l], r)[0].real
            vals = phi
        else:
            from .spherical import complex_case_phi
            lam = lam.reshape(-1, 2)
            vals = np.stack([complex_case_phi(sp, -l, H).real for l in lam])
        with np.errstate(divide="ignore"):
            g = np.exp(log_density(sp, H) + logh)
        g = np.where(np.isfinite(g), g, 0.0)
        return self.c_meas * np.einsum("j,ij->i", w * g, vals)

    # -- rank-one profile ----------------------------------------------------

    def profile(self, t, r_max=None, step=0.05):
        """Cubic spline of r -> log h_t(r) on [0, r_max] (rank one)."""
        if self.space.rank != 1:
            raise SpaceError("profile is for rank one")
        if r_max is None:
            r_max = 2 * t * float(self.space.rho[0]) + 14 * math.sqrt(t) + 4
        n = int(math.ceil(r_max / step)) + 1
        r = np.linspace(0.0, r_max, n)
        return CubicSpline(r, self.log_kernel(t, r), bc_type=((1, 0.0), "not-a-knot"))


# ---------------------------------------------------------------------------
# envelopes and asymptotics

def log_heat_envelope(engine: HeatEngine, t, H):
    """log of t^{-n/2} prod (1+t+<alpha,H>)^{(m_a+m_2a)/2-1} phi_0(H) e^{-|rho|^2 t - |H|^2/4t}."""
    sp = engine.space
    H = sp.as_H(H)
    x = root_pairings(sp, H)
    m = sp.datum.mult
    expo = (m[:, 0] + m[:, 1]) / 2.0 - 1.0
    poly = (expo * np.log1p(t + x)).sum(axis=-1)
    return (-sp.n / 2 * math.log(t) + poly + log_phi0(sp, H) - sp.rho_norm2 * t
            - np.sum(H * H, axis=-1) / (4 * t))


def heat_envelope(engine: HeatEngine, t, H):
    if t <= 0:
        raise DomainError("t must be positive")
    return np.exp(log_heat_envelope(engine, t, H))


def log_critical_asymptote(engine: HeatEngine, t, H, check=True):
    sp = engine.space
    H = sp.as_H(H)
    if check:
        if t < 5:
            raise DomainError("critical asymptotics need t >= 5")
        if np.any(mu_min(sp, H) < 5):
            raise DomainError("H is too close to the chamber walls (need min <alpha,H> >= 5)")
    binv = b_function(sp, 1j * H / (2 * t), inverse=True)
    return (math.log(engine.c1) - sp.nu / 2 * math.log(t) + np.log(np.abs(binv))
            + log_phi0(sp, H) - sp.rho_norm2 * t - np.sum(H * H, axis=-1) / (4 * t))


def critical_asymptote(engine: HeatEngine, t, H, check=True):
    """C1 t^{-nu/2} b(-iH/2t)^{-1} phi_0(H) e^{-|rho|^2 t - |H|^2/4t}."""
    return np.exp(log_critical_asymptote(engine, t, H, check))


# ---------------------------------------------------------------------------
# concentration

@dataclass(frozen=True)
class ConcentrationSpec:
    """eps(t) = scale * t^{-exponent}; r(t) = sqrt(t)/eps(t).

    The concentration region is the ball of radius r(t) about 2 t rho
    intersected with the chamber.
    """

    exponent: float = 0.25
    scale: float = 1.0

    def __post_init__(self):
        if not (0 < self.exponent < 0.5) or self.scale <= 0:
            raise ValueError("need 0 < exponent < 1/2 so that eps -> 0 and sqrt(t) eps -> oo")

    def eps(self, t):
        return self.scale * np.asarray(t, float) ** (-self.exponent)

    def radius(self, t):
        return np.sqrt(t) / self.eps(t)

    def admissible(self, ts) -> bool:
        """Numerical check that eps decreases and sqrt(t) eps increases on ts."""
        ts = np.sort(np.asarray(ts, float))
        e = self.eps(ts)
        return bool(np.all(np.diff(e) < 0) and np.all(np.diff(np.sqrt(ts) * e) > 0))


def mass_outside(engine: HeatEngine, spec: ConcentrationSpec, t, radius=None):
    """1 - c_meas * int_{Omega_t} delta h_t."""
    if t < 1:
        raise DomainError("mass_outside needs t >= 1")
    sp = engine.space
    rad = float(spec.radius(t)) if radius is None else float(radius)
    centre = 2 * t * sp.rho
    if sp.rank == 1:
        c = float(centre[0])
        lo, hi = max(0.0, c - rad), c + rad
        breaks = [lo, hi] if not (lo < R_SWITCH < hi) else [lo, R_SWITCH, hi]
        w = min(1.0, max(0.1, math.sqrt(t) / 2))
        rule = gl_breaks(breaks, w, engine.quad.radial_order)
    else:
        rule = engine.ball_rule(centre, rad, t)
    inside = engine.integrate(t, lambda H: engine.log_kernel(t, H), rule)
    return 1.0 - inside


def delayed_kernel_gap(engine: HeatEngine, t, t_delay):
    """t^{nu/2} e^{|rho|^2 t} (h_t(0) - h_{t+t'}(0))."""
    if t <= 0 or t_delay < 0:
        raise DomainError("need t > 0 and t' >= 0")
    if t_delay == 0:
        return 0.0
    sp = engine.space
    zero = np.zeros(sp.rank)
    a = float(engine.log_kernel(t, zero))
    b = float(engine.log_kernel(t + t_delay, zero))
    return float(math.exp(sp.nu / 2 * math.log(t) + sp.rho_norm2 * t + a) * -math.expm1(b - a))
