"""Spin-echo efficiency: the coherence phase is fixed relative to the pulses.

The efficiency is ``|<rho12(T_st)> / rho12(0)|`` for an initial state with
``rho12 = exp(i xi0) / 2`` (the state left by a perfect ``pi/2(phi0)`` write
pulse from ``|1>`` has ``xi0 = phi0 + pi/2``).
"""
import numpy as np

from ..errors import DomainError
from .core import (EfficiencyResult, averaged_coherence, ensemble_gates, initial_state,
                   method_tag, weighted_mean)

SPIN_LOCK_CLASS_TOL = 1e-9


def write_phase_to_xi(phi0):
    """Coherence phase after a perfect ``pi/2(phi0)`` pulse on ``|1>``."""
    return np.asarray(phi0, dtype=float) + np.pi / 2


def spin_echo_sweep(seq, xi0, grid=None, n_dephase=None):
    """Brute-force ``|<rho12'> / rho12|`` for every initial phase in ``xi0``."""
    gates, weights = ensemble_gates(seq, grid, n_dephase)
    xi0 = np.asarray(xi0, dtype=float)
    rho = initial_state(xi0)
    out = averaged_coherence(gates, weights, rho)
    return np.abs(out / rho[..., 0, 1])


def spin_echo_bruteforce(seq, grid=None, xi0=0.0, n_dephase=None):
    """Spin-echo efficiency by propagating every atom of the ensemble."""
    value = float(spin_echo_sweep(seq, xi0, grid, n_dephase))
    return EfficiencyResult(value, method_tag(grid, n_dephase),
                            {"phases": seq.phases, "repetitions": seq.repetitions, "xi0": float(xi0)})


def _cpmg_bracket(eps, phi0, phi2):
    return (1 - eps) * (1 + eps - 2 * eps * (1 + np.exp(-1j * (2 * phi0 + phi2))))


def spin_echo_cpmg_analytic(epsilon, phi0, phi2=0.0, weights=None, simplified=False):
    """CPMG ``pi(0) - pi(phi2)`` after a ``pi/2(phi0)`` write pulse.

    ``|<(1-eps)(1 + eps - 2 eps (1 + exp(-i(2 phi0 + phi2))))>|``.  With
    per-atom ``epsilon`` and ``weights`` the full expression is averaged;
    ``simplified=True`` instead substitutes the mean error into it.
    """
    eps = np.asarray(epsilon, dtype=float)
    if simplified and weights is not None:
        eps, weights = weighted_mean(eps, weights), None
    value = abs(weighted_mean(_cpmg_bracket(eps, phi0, phi2), weights))
    return EfficiencyResult(float(value), "analytic",
                            {"sequence": "CPMG", "phi0": phi0, "phi2": phi2, "simplified": simplified})


def spin_echo_hahn_analytic(epsilon, beta=-np.pi / 2, weights=None):
    """Single-pulse echo ``|<(1 - eps) exp(2 i beta)>|``."""
    terms = (1 - np.asarray(epsilon, dtype=float)) * np.exp(2j * np.asarray(beta, dtype=float))
    if weights is None and terms.ndim:
        raise DomainError("per-atom values need weights")
    value = abs(weighted_mean(terms, weights))
    return EfficiencyResult(float(value), "analytic", {"sequence": "Hahn"})


def spin_echo_cpmg_repeated_asymptotic(epsilon, xi0, weights=None):
    """Many-repetition limit of ``[pi(0) - pi(0)]^N``.

    Zero for ``xi0 = pi/2 (mod pi)`` and ``1 - <eps>/sqrt(2)`` for
    ``xi0 = 0 (mod pi)``; other phases have no closed form here.
    """
    eps = np.asarray(epsilon, dtype=float)
    if np.any(eps <= 0) or np.any(eps > 0.5):
        raise DomainError("the asymptotic form needs 0 < epsilon <= 0.5")
    offset = np.mod(float(xi0), np.pi)
    if min(offset, np.pi - offset) < SPIN_LOCK_CLASS_TOL:
        value = 1 - weighted_mean(eps, weights) / np.sqrt(2)
    elif abs(offset - np.pi / 2) < SPIN_LOCK_CLASS_TOL:
        value = 0.0
    else:
        raise DomainError("only xi0 = 0 or pi/2 (mod pi) have an asymptotic form; use brute force")
    return EfficiencyResult(float(value), "analytic", {"sequence": "CPMG", "repetitions": np.inf, "xi0": xi0})


def cpmg_spin_lock_limit(epsilon, weights=None):
    """Exact dephased ``N -> infinity`` limits of ``[pi(0) - pi(0)]^N``.

    Returns ``(good, eit)``: the spin-echo efficiency for ``xi0 = 0`` is
    ``<sqrt(1 - eps)>`` and the phase-averaged light-storage efficiency is
    ``<sqrt(1 - eps)>^2 / 4``.  The spin-echo value for ``xi0 = pi/2``
    tends to zero.
    """
    root = weighted_mean(np.sqrt(1 - np.asarray(epsilon, dtype=float)), weights)
    return float(root), float(root**2 / 4)
