"""Closed-form light-storage efficiencies.

Each phase-averaged efficiency of a catalogued sequence has the form
``<c(eps)>^2`` with a polynomial ``c``.  The tabulated polynomials for the
two ten-pulse sequences built from five-pulse blocks stop at ``eps^5``;
the complete degree-10 polynomials are also available (``exact=True``).
"""
import numpy as np

from .. import sequences
from ..errors import ConfigError, DomainError
from .core import EfficiencyResult, weighted_mean

S3 = np.sqrt(3.0)
S5 = np.sqrt(5.0)

# ascending coefficients of c(eps)
TABLE_POLYNOMIALS = {
    "CPMG": (1, -2, 1),
    "XY4": (1, 0, -4, 4, -1),
    "UR4": (1, 0, -4, 4, -1),
    "UR6": (1, 0, 0, -2, -4, 8, -3),
    "XY8": (1, 0, 0, -8, 4, 0, 48, -80, 35),
    "UR8": (1, 0, 0, 0, -4, 8, -16, 16, -5),
    "U5a2": (1, 0, 0, -2 * (11 - 6 * S3), 4 * (11 - 6 * S3), -12 * (2 - S3)),
    "KDD2": (1, 0, 0, -2 * (11 + 6 * S3), 4 * (11 + 6 * S3), -12 * (2 + S3)),
    "UR10": (1, 0, 0, 0, 0, -2, -2 * (3 - S5), 8 * (2 - S5), -2 * (11 - 5 * S5), 4 * (5 - S5), -7),
}


def _block_squared(sign):
    # full expansion of the ten-pulse polynomial; sign=-1 for U5a, +1 for KDD
    s = sign * S3
    return (1, 0, 0, -22 - 12 * s, 44 + 24 * s, -24 - 12 * s, 629 + 370 * s, -2688 - 1594 * s,
            4334 + 2598 * s, -3120 - 1894 * s, 846 + 520 * s)


EXACT_POLYNOMIALS = dict(TABLE_POLYNOMIALS, U5a2=_block_squared(-1), KDD2=_block_squared(+1))


def _eps(epsilon):
    eps = np.asarray(epsilon, dtype=float)
    if np.any(eps < 0) or np.any(eps > 1):
        raise DomainError("epsilon must lie in [0, 1]")
    return eps


def table_polynomial(name, epsilon, exact=False):
    """``c(eps)`` for a tabulated sequence (efficiency is ``<c>^2``)."""
    name = sequences.canonical_name(name)
    table = EXACT_POLYNOMIALS if exact else TABLE_POLYNOMIALS
    if name == "CPMG2":
        name = "CPMG"
    if name not in table:
        raise ConfigError(f"no tabulated polynomial for {name}")
    return np.polynomial.polynomial.polyval(_eps(epsilon), table[name])


def eit_cpmg(epsilon, weights=None):
    """``[pi(0) - pi(phi2)]``: ``<(1 - eps)^2>^2`` for every ``phi2``."""
    return float(weighted_mean((1 - _eps(epsilon)) ** 2, weights) ** 2)


def eit_triple(epsilon, phi2, weights=None):
    """``[pi(0) - pi(phi2) - pi(0)]``: ``<4 eps (1 - eps)^2 cos phi2>^2``."""
    eps = _eps(epsilon)
    return float(weighted_mean(4 * eps * (1 - eps) ** 2 * np.cos(phi2), weights) ** 2)


def eit_double_cpmg(epsilon, phi2, weights=None):
    """``[pi(0) - pi(phi2)]^2`` with equal gaps and equal errors."""
    eps = _eps(epsilon)
    e2 = np.exp(2j * phi2)
    terms = (1 - eps) ** 2 * (e2**2 * (1 - eps) ** 2 + 6 * eps**2 + 4 * e2 * eps * (2 * eps - 1))
    return float(abs(weighted_mean(terms, weights)) ** 2)


def eit_cpmg_repeated(epsilon, weights=None):
    """Many-repetition ``[pi(0) - pi(0)]^N``: ``<(1 - eps/sqrt(2)) / 2>^2``."""
    return float(weighted_mean((1 - _eps(epsilon) / np.sqrt(2)) / 2, weights) ** 2)


def eit_closed_form(name, epsilon, phi2=0.0, repetitions=1, weights=None, exact=False):
    """Closed-form phase-averaged efficiency of a named sequence.

    Supported: ``Hahn`` (zero in the phase-averaged limit), ``CPMG`` with
    ``repetitions`` 1, 2 or ``inf`` (many-repetition limit), ``CPMG2``,
    ``triple`` and every tabulated sequence with ``repetitions == 1``.
    Per-atom ``epsilon`` with ``weights`` averages the full polynomial.
    """
    name = sequences.canonical_name(name)
    meta = {"sequence": name, "phi2": phi2, "repetitions": repetitions, "exact": exact}
    if name == "Hahn" and repetitions == 1:
        value = 0.0
    elif name in ("CPMG", "CPMG2"):
        phi2 = np.pi if name == "CPMG2" else phi2
        if repetitions == 1:
            value = eit_cpmg(epsilon, weights)
        elif repetitions == 2:
            value = eit_double_cpmg(epsilon, phi2, weights)
        elif np.isinf(repetitions) and np.cos(phi2) == 1:
            value = eit_cpmg_repeated(epsilon, weights)
        else:
            raise ConfigError(f"no closed form for CPMG repeated {repetitions} times with phi2={phi2}")
    elif name == "triple" and repetitions == 1:
        value = eit_triple(epsilon, phi2, weights)
    elif name in TABLE_POLYNOMIALS and repetitions == 1:
        value = float(weighted_mean(table_polynomial(name, epsilon, exact), weights) ** 2)
    else:
        raise ConfigError(f"no closed form for {name} repeated {repetitions} times")
    return EfficiencyResult(value, "analytic", meta)
