"""Root data, Weyl groups and radial geometry of symmetric spaces.

A space is described by its restricted root system: the positive reduced
roots alpha (vectors in R^l) with multiplicity pairs (m_alpha, m_2alpha).
Everything else (rho, dimensions, Weyl group, radial density) is derived.

Catalog tags
------------
"Hr:n"  real hyperbolic space H^n(R), n >= 2
"Hc:n"  complex hyperbolic space of complex dimension n >= 2 (real dim 2n)
"Hq:n"  quaternionic hyperbolic space of quaternionic dimension n >= 2
"A2c"   SL(3,C)/SU(3), root system A2 with all multiplicities 2
"abstract"  user supplied datum, see `load_abstract`
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

WALL_TOL = 1e-12


class SpaceError(ValueError):
    """Invalid root datum or catalog entry."""


def _reflect(alpha):
    a = np.asarray(alpha, dtype=float)
    return np.eye(len(a)) - 2.0 * np.outer(a, a) / (a @ a)


def _simple_roots(roots):
    """Positive roots that are not a sum of two positive roots."""
    roots = [np.asarray(r, float) for r in roots]
    simple = []
    for i, r in enumerate(roots):
        decomposable = False
        for j, a in enumerate(roots):
            for k, b in enumerate(roots):
                if j != i and k != i and np.allclose(a + b, r, atol=1e-9):
                    decomposable = True
        if not decomposable:
            simple.append(r)
    return np.array(simple)


def _close_group(gens, cap):
    dim = gens[0].shape[0]
    elems = [np.eye(dim)]
    frontier = [np.eye(dim)]
    while frontier:
        new = []
        for g in frontier:
            for s in gens:
                h = s @ g
                if not any(np.allclose(h, e, atol=1e-9) for e in elems):
                    elems.append(h)
                    new.append(h)
                    if len(elems) > cap:
                        raise SpaceError(f"Weyl group closure exceeded {cap} elements")
        frontier = new
    return elems


@dataclass(frozen=True, eq=False)
class RootDatum:
    """Positive reduced roots with multiplicities and the generated Weyl group.

    Parameters
    ----------
    roots : (N, l) array
        Positive reduced roots.
    mult : (N, 2) integer array
        ``mult[i] = (m_alpha, m_2alpha)`` for ``roots[i]``.
    """

    roots: np.ndarray
    mult: np.ndarray
    simple: np.ndarray = field(default=None)
    weyl: tuple = field(default=None)
    weyl_cap: int = 1000

    def __post_init__(self):
        roots = np.atleast_2d(np.asarray(self.roots, dtype=float))
        mult = np.atleast_2d(np.asarray(self.mult, dtype=int))
        if roots.shape[0] != mult.shape[0] or mult.shape[1] != 2:
            raise SpaceError("need one (m_alpha, m_2alpha) pair per root")
        if np.any(mult < 0):
            raise SpaceError("multiplicities must be nonnegative")
        if np.any(mult[:, 0] == 0):
            raise SpaceError("m_alpha must be positive (m_2alpha > 0 requires m_alpha > 0)")
        norms = np.linalg.norm(roots, axis=1)
        if np.any(norms == 0):
            raise SpaceError("roots must be nonzero")
        for i in range(len(roots)):
            for j in range(i + 1, len(roots)):
                c = roots[i] @ roots[j] / (norms[i] * norms[j])
                if abs(abs(c) - 1.0) < 1e-12:
                    raise SpaceError("two reduced roots are proportional")
        object.__setattr__(self, "roots", roots)
        object.__setattr__(self, "mult", mult)
        simple = self.simple
        if simple is None:
            simple = _simple_roots(roots)
        simple = np.atleast_2d(np.asarray(simple, float))
        object.__setattr__(self, "simple", simple)
        if self.weyl is None:
            gens = [_reflect(a) for a in simple]
            object.__setattr__(self, "weyl", tuple(_close_group(gens, self.weyl_cap)))
        self._check_root_invariance()

    @property
    def rank(self) -> int:
        return self.roots.shape[1]

    def all_positive_roots(self):
        """Positive roots with multiplicity, including 2*alpha when present."""
        out_r, out_m = [], []
        for a, (m1, m2) in zip(self.roots, self.mult):
            out_r.append(a)
            out_m.append(m1)
            if m2 > 0:
                out_r.append(2 * a)
                out_m.append(m2)
        return np.array(out_r), np.array(out_m)

    def _check_root_invariance(self):
        full, _ = self.all_positive_roots()
        full = np.vstack([full, -full])
        for w in self.weyl:
            img = full @ w.T
            for v in img:
                if not np.any(np.all(np.abs(full - v) < 1e-8, axis=1)):
                    raise SpaceError("root set is not Weyl invariant")


@dataclass(frozen=True, eq=False)
class SpaceSpec:
    """A symmetric space of noncompact type through its root datum."""

    name: str
    datum: RootDatum
    n: int
    nu: int
    rho: np.ndarray
    rho0: np.ndarray

    @property
    def rank(self) -> int:
        return self.datum.rank

    @property
    def n_reduced(self) -> int:
        return len(self.datum.roots)

    @property
    def l_plus_sigma(self) -> int:
        return self.rank + self.n_reduced

    @property
    def weyl_order(self) -> int:
        return len(self.datum.weyl)

    @property
    def rho_norm2(self) -> float:
        return float(self.rho @ self.rho)

    @property
    def is_complex_type(self) -> bool:
        """All multiplicities equal to 2 and reduced: spherical functions are elementary."""
        return bool(np.all(self.datum.mult[:, 0] == 2) and np.all(self.datum.mult[:, 1] == 0))

    def jacobi(self):
        from .spherical import JacobiParams
        if self.rank != 1:
            raise SpaceError("Jacobi parameters exist for rank one only")
        m1, m2 = self.datum.mult[0]
        return JacobiParams.from_multiplicities(int(m1), int(m2))

    def in_chamber(self, H, tol=WALL_TOL):
        H = np.asarray(H, float)
        return np.all(H @ self.datum.simple.T >= -tol, axis=-1)

    def as_H(self, H):
        """Coerce radii (rank one) or vectors to an (..., l) array."""
        H = np.asarray(H, dtype=float)
        if self.rank == 1 and (H.ndim == 0 or H.shape[-1] != 1):
            H = H[..., None]
        return H

    def __repr__(self):
        return f"SpaceSpec({self.name!r}, rank={self.rank}, n={self.n}, nu={self.nu})"


@dataclass(frozen=True, eq=False)
class ChamberPoint:
    """A point of the closed positive Weyl chamber."""

    space: SpaceSpec
    H: np.ndarray

    def __post_init__(self):
        H = np.atleast_1d(np.asarray(self.H, dtype=float))
        if H.shape != (self.space.rank,):
            raise SpaceError("H has the wrong dimension")
        if not self.space.in_chamber(H):
            raise SpaceError(f"{H} is outside the closed positive chamber")
        object.__setattr__(self, "H", H)


def _from_datum(name, datum):
    full, m = datum.all_positive_roots()
    rho = 0.5 * (m[:, None] * full).sum(axis=0)
    rho0 = 0.5 * datum.roots.sum(axis=0)
    if np.any(datum.simple @ rho <= 0) or np.any(datum.simple @ rho0 <= 0):
        raise SpaceError("rho is not in the open positive chamber")
    ell = datum.rank
    n = ell + int(m.sum())
    nu = ell + 2 * len(datum.roots)
    return SpaceSpec(name=name, datum=datum, n=n, nu=nu, rho=rho, rho0=rho0)


def _rank_one(name, m1, m2):
    return _from_datum(name, RootDatum(roots=[[1.0]], mult=[[m1, m2]], simple=[[1.0]]))


def a2_roots():
    """Positive roots of A2 realised isometrically in R^2 (|alpha|^2 = 2)."""
    a1 = np.array([np.sqrt(2.0), 0.0])
    a2 = np.array([-1.0 / np.sqrt(2.0), np.sqrt(1.5)])
    return np.array([a1, a2, a1 + a2]), np.array([a1, a2])


def build_space(name: str, params=None) -> SpaceSpec:
    """Build a space from a catalog tag.

    Examples
    --------
    >>> build_space("Hr:3").rho
    array([1.])
    >>> build_space("A2c").nu
    8
    """
    tag, _, arg = name.partition(":")
    if tag in ("Hr", "Hc", "Hq"):
        try:
            k = int(arg if arg else params)
        except (TypeError, ValueError):
            raise SpaceError(f"bad dimension in {name!r}") from None
        if tag == "Hr":
            if k < 2:
                raise SpaceError("Hr:n needs n >= 2")
            return _rank_one(f"Hr:{k}", k - 1, 0)
        if k < 2:
            raise SpaceError(f"{tag}:n needs n >= 2")
        if tag == "Hc":
            return _rank_one(f"Hc:{k}", 2 * (k - 1), 1)
        return _rank_one(f"Hq:{k}", 4 * (k - 1), 3)
    if tag == "A2c":
        roots, simple = a2_roots()
        return _from_datum("A2c", RootDatum(roots=roots, mult=[[2, 0]] * 3, simple=simple))
    if tag == "abstract":
        if params is None:
            raise SpaceError("abstract space needs a datum")
        if isinstance(params, RootDatum):
            return _from_datum("abstract", params)
        return load_abstract(params)
    raise SpaceError(f"unknown space tag {name!r}")


def load_abstract(doc) -> SpaceSpec:
    """Build a space from ``{rank, roots: [[...]], mult: [[m1, m2]]}`` (dict, JSON text or path)."""
    if isinstance(doc, str):
        doc = doc.strip()
        if doc.startswith("{"):
            doc = json.loads(doc)
        else:
            with open(doc) as fh:
                doc = json.load(fh)
    try:
        roots = np.asarray(doc["roots"], float)
        mult = np.asarray(doc["mult"], int)
        rank = int(doc["rank"])
    except (KeyError, TypeError) as exc:
        raise SpaceError(f"malformed abstract datum: {exc}") from None
    if roots.ndim != 2 or roots.shape[1] != rank:
        raise SpaceError("roots must be a list of rank-length vectors")
    return _from_datum("abstract", RootDatum(roots=roots, mult=mult))


# ---------------------------------------------------------------------------
# radial geometry

def _log_sinh(x):
    x = np.asarray(x, float)
    with np.errstate(divide="ignore"):
        return np.where(x > 0, x + np.log(-np.expm1(-2.0 * np.maximum(x, 1e-300))) - np.log(2.0), -np.inf)


def root_pairings(space: SpaceSpec, H):
    """<alpha, H> for each positive reduced root, shape (..., N)."""
    return space.as_H(H) @ space.datum.roots.T


def log_density(space: SpaceSpec, H):
    """log delta(H), -inf on the walls."""
    x = root_pairings(space, H)
    m = space.datum.mult
    with np.errstate(invalid="ignore"):
        term = m[:, 0] * _log_sinh(x) + np.where(m[:, 1] > 0, m[:, 1] * _log_sinh(2 * x), 0.0)
    return term.sum(axis=-1)


def density_delta(space: SpaceSpec, H):
    """Radial density prod_{alpha in Sigma+} sinh(<alpha,H>)^{m_alpha}."""
    return np.exp(log_density(space, H))


def log_density_envelope(space: SpaceSpec, H):
    """log of prod (x/(1+x))^{m_alpha} e^{2<rho,H>}, the two-sided model of delta."""
    x = root_pairings(space, H)
    m = space.datum.mult
    with np.errstate(divide="ignore"):
        lx = np.log(x) - np.log1p(x)
        lx2 = np.log(2 * x) - np.log1p(2 * x)
    term = m[:, 0] * lx + np.where(m[:, 1] > 0, m[:, 1] * lx2, 0.0)
    return term.sum(axis=-1) + 2.0 * (space.as_H(H) @ space.rho)


def mu_min(space: SpaceSpec, H):
    """min over positive roots of <alpha, H>."""
    return root_pairings(space, H).min(axis=-1)


def pi_prod(space: SpaceSpec, H):
    """prod over positive reduced roots of <alpha, H> (complex input allowed)."""
    Hc = np.asarray(H)
    if space.rank == 1 and (Hc.ndim == 0 or Hc.shape[-1] != 1):
        Hc = Hc[..., None]
    return np.prod(Hc @ space.datum.roots.T, axis=-1)


def cartan_distance(H1, H2):
    """Distance between K exp(H1) K and K exp(H2) K: |H1 - H2|."""
    d = np.asarray(H1, float) - np.asarray(H2, float)
    return np.sqrt(np.sum(np.atleast_1d(d) ** 2, axis=-1)) if np.ndim(d) else abs(float(d))


def weyl_orbit(space: SpaceSpec, lam) -> list:
    """Distinct images w.lam, w in W."""
    v = np.atleast_1d(np.asarray(lam))
    out = []
    for w in space.datum.weyl:
        u = w @ v
        if not any(np.allclose(u, o, atol=1e-12) for o in out):
            out.append(u)
    return out


def weyl_dets(space: SpaceSpec):
    return np.array([round(np.linalg.det(w)) for w in space.datum.weyl])


def longest_element(space: SpaceSpec) -> np.ndarray:
    """The element of W mapping the positive chamber onto the negative one."""
    probe = space.rho
    for w in space.datum.weyl:
        if np.all(space.datum.simple @ (w @ probe) < 0):
            return w
    raise SpaceError("no longest element found")  # pragma: no cover


def to_chamber(space: SpaceSpec, H):
    """Representative of the W-orbit of H inside the closed positive chamber."""
    H = np.atleast_1d(np.asarray(H, float))
    best = None
    for w in space.datum.weyl:
        u = w @ H
        if space.in_chamber(u, tol=1e-9):
            return u
        score = (space.datum.simple @ u).min()
        if best is None or score > best[0]:
            best = (score, u)
    return best[1]


def rho_unit(space: SpaceSpec):
    return space.rho / np.linalg.norm(space.rho)
