"""Composite Gauss rules used by the spectral and radial integrals."""

import functools

import numpy as np


@functools.lru_cache(maxsize=32)
def _leggauss(order):
    return np.polynomial.legendre.leggauss(order)


@functools.lru_cache(maxsize=32)
def _hermgauss(order):
    return np.polynomial.hermite.hermgauss(order)


def gl_panels(a, b, width, order=12):
    """Nodes and weights of composite Gauss-Legendre on [a, b] with panels <= width."""
    a, b = float(a), float(b)
    if b <= a:
        return np.empty(0), np.empty(0)
    npan = max(1, int(np.ceil((b - a) / width - 1e-12)))
    edges = np.linspace(a, b, npan + 1)
    x, w = _leggauss(order)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def gl_breaks(breaks, width, order=12):
    """Composite rule over consecutive intervals given by `breaks`."""
    ns, ws = [], []
    for a, b in zip(breaks[:-1], breaks[1:]):
        n, w = gl_panels(a, b, width, order)
        ns.append(n)
        ws.append(w)
    return np.concatenate(ns), np.concatenate(ws)


def gauss_hermite(order, scale=1.0):
    """Nodes/weights for int exp(-(x/scale)^2) f(x) dx."""
    x, w = _hermgauss(order)
    return x * scale, w * scale


def trapezoid_periodic(n, a=0.0, b=2 * np.pi):
    nodes = a + (b - a) * np.arange(n) / n
    return nodes, np.full(n, (b - a) / n)


def logsumexp_weighted(logf, w, axis=-1):
    """log sum w * exp(logf) for positive weights."""
    logf = np.asarray(logf, float)
    m = np.max(logf, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    s = np.sum(w * np.exp(logf - m), axis=axis)
    with np.errstate(divide="ignore"):
        return np.log(s) + np.squeeze(m, axis=axis)
