"""Gamma function of a complex argument.

Lanczos approximation (g = 7) in logarithmic form on ``Re z >= 1/2`` and the
reflection formula elsewhere.  Working with ``log Gamma`` keeps ratios of
large and small Gamma values finite, which the chirped-pulse propagator
relies on.
"""
import numpy as np

from .errors import DomainError

LANCZOS_G = 7.0
LANCZOS_COEFFS = np.array([
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
POLE_TOL = 1e-12
_HALF_LOG_2PI = 0.5 * np.log(2.0 * np.pi)


def _lanczos_log(z):
    # valid for Re z >= 1/2
    w = z - 1.0
    series = np.full_like(w, LANCZOS_COEFFS[0])
    for k in range(1, len(LANCZOS_COEFFS)):
        series = series + LANCZOS_COEFFS[k] / (w + k)
    t = w + LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (w + 0.5) * np.log(t) - t + np.log(series)


def _log_sin_pi(z):
    """``log(sin(pi z))`` without overflow for large ``|Im z|``."""
    # reduce Re z modulo 2 exactly; sin(pi z) is 2-periodic
    z = np.fmod(z.real, 2.0) + 1j * z.imag
    flip = z.imag < 0
    zz = np.where(flip, np.conj(z), z)
    # sin(pi z) = exp(-i pi z) (exp(2 i pi z) - 1) / (2i), |exp(2 i pi z)| <= 1
    out = -1j * np.pi * zz + np.log((np.exp(2j * np.pi * zz) - 1.0) / 2j)
    return np.where(flip, np.conj(out), out)


def complex_loggamma(z):
    """A logarithm of ``Gamma(z)`` (not necessarily the principal branch).

    ``exp(complex_loggamma(z)) == Gamma(z)``; the imaginary part may differ
    from the principal log-gamma by multiples of ``2 pi``.
    """
    z = np.asarray(z, dtype=complex)
    nearest = np.round(z.real)
    at_pole = (nearest <= 0) & (np.abs(z - nearest) < POLE_TOL)
    if np.any(at_pole):
        raise DomainError(f"Gamma has a pole at {z[at_pole] if z.ndim else z}")
    left = z.real < 0.5
    z_right = np.where(left, 1.0 - z, z)
    out = np.atleast_1d(_lanczos_log(z_right))
    left = np.atleast_1d(left)
    if np.any(left):
        zl = np.atleast_1d(z)[left]
        out[left] = np.log(np.pi) - _log_sin_pi(zl) - out[left]
    return out.reshape(z.shape) if z.ndim else complex(out[0])


def complex_gamma(z):
    """``Gamma(z)`` for complex ``z``; raises :class:`DomainError` at poles."""
    out = np.exp(complex_loggamma(z))
    return out if np.ndim(out) else complex(out)
