"""Complex Gamma function via the Lanczos approximation.

All routines are vectorised over numpy arrays.  Quotients are formed in the
log domain so that arguments with modulus up to ~1e4 do not overflow.
"""

import numpy as np

# g = 7, n = 9 coefficient set; relative accuracy ~1e-15 for Re z >= 1/2
_G = 7.0
_P = np.array([
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
])
_HALF_LOG_2PI = 0.5 * np.log(2.0 * np.pi)

POLE_TOL = 1e-8


class GammaPoleError(ArithmeticError):
    """Raised when a Gamma factor is evaluated too close to one of its poles."""


def _pole_distance(z):
    z = np.asarray(z, dtype=complex)
    k = np.minimum(np.round(z.real), 0.0)
    return np.abs(z - k)


def near_pole(z, tol=POLE_TOL):
    """Boolean mask of points within `tol` of a nonpositive integer."""
    return _pole_distance(z) < tol


def _lanczos_log(z):
    # valid for Re z >= 1/2
    z = z - 1.0
    x = np.full(z.shape, _P[0], dtype=complex)
    for i in range(1, len(_P)):
        x = x + _P[i] / (z + i)
    t = z + _G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * np.log(t) - t + np.log(x)


def log_sin_pi(z):
    """log(sin(pi z)) without overflow for large |Im z| (branch unspecified)."""
    z = np.asarray(z, dtype=complex)
    upper = z.imag >= 0
    w = np.where(upper, z, np.conj(z))
    u = np.exp(2j * np.pi * w)
    out = -1j * np.pi * w + np.log1p(-u) + np.log(0.5j)
    return np.where(upper, out, np.conj(out))


def loggamma(z, name="Gamma"):
    """log Gamma(z) for complex arrays.

    The branch is not the principal one; only exp of sums and differences of
    these values is meaningful.

    Raises
    ------
    GammaPoleError
        If any z lies within POLE_TOL of a pole.
    """
    z = np.asarray(z, dtype=complex)
    if np.any(near_pole(z)):
        bad = z[near_pole(z)].ravel()[0]
        raise GammaPoleError(f"{name}: argument {bad} is within {POLE_TOL:g} of a pole")
    out = np.empty(z.shape, dtype=complex)
    right = z.real >= 0.5
    if np.any(right):
        out[right] = _lanczos_log(z[right])
    left = ~right
    if np.any(left):
        zl = z[left]
        out[left] = np.log(np.pi) - log_sin_pi(zl) - _lanczos_log(1.0 - zl)
    return out


def gamma(z):
    return np.exp(loggamma(z))


def rgamma(z):
    """Reciprocal Gamma function, entire; exactly zero at the poles of Gamma."""
    z = np.asarray(z, dtype=complex)
    out = np.zeros(z.shape, dtype=complex)
    close = _pole_distance(z) < 1e-6
    far = ~close
    if np.any(far):
        out[far] = np.exp(-loggamma(z[far]))
    if np.any(close):
        zc = z[close]
        # 1/Gamma(z) = sin(pi z) Gamma(1-z) / pi, regular near the poles
        out[close] = _sinpi(zc) * np.exp(_lanczos_log(1.0 - zc)) / np.pi
    return out


def _sinpi(z):
    """sin(pi z) with the argument reduced first, exactly zero at integers."""
    k = np.round(z.real)
    sign = np.where(k % 2 == 0, 1.0, -1.0)
    return sign * np.sin(np.pi * (z - k))


def gamma_ratio(w, shift, name="Gamma"):
    """Gamma(w + shift) / Gamma(w) for a real scalar shift.

    Integer shifts are evaluated as Pochhammer products, which keeps the
    quotient finite where both factors have cancelling poles.  Otherwise the
    quotient is formed in the log domain; a pole of the numerator raises
    GammaPoleError naming `name`, a pole of the denominator gives zero.
    """
    w = np.asarray(w, dtype=complex)
    s = float(shift)
    if s == round(s) and 0 <= s <= 64:
        out = np.ones(w.shape, dtype=complex)
        for j in range(int(s)):
            out = out * (w + j)
        return out
    num = w + s
    if np.any(near_pole(num)):
        bad = num[near_pole(num)].ravel()[0]
        raise GammaPoleError(f"{name}: argument {bad} is within {POLE_TOL:g} of a pole")
    out = np.zeros(w.shape, dtype=complex)
    den_pole = _pole_distance(w) < 1e-6
    ok = ~den_pole
    if np.any(ok):
        out[ok] = np.exp(loggamma(num[ok]) - loggamma(w[ok]))
    if np.any(den_pole):
        out[den_pole] = np.exp(loggamma(num[den_pole])) * rgamma(w[den_pole])
    return out
