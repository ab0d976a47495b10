"""Light-storage (EIT) efficiency: the stored coherence phase is retarded.

After the write step the coherence is ``rho12(z, 0) = |rho12(z)| exp(-i dk z)``.
The read-out efficiency compares the phase-matched integrals
``int <rho12(z, T_st)> exp(i dk z) dz`` after and before storage.
"""
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .. import su2
from ..errors import DomainError, ValidationError
from .core import (DEFAULT_PHASE_POINTS, EfficiencyResult, averaged_coherence, ensemble_gates,
                   initial_state, method_tag, phase_grid, weighted_mean)

DEFAULT_Z_NODES = 4096
MIN_NODES_PER_TURN = 32
DEFAULT_ENVELOPE = 0.25


@dataclass(frozen=True)
class CoherenceField:
    """Coherence sampled on ``z_nodes`` spanning ``[0, length]``."""

    z_nodes: np.ndarray
    rho12: np.ndarray
    delta_k: float
    length: float

    def __post_init__(self):
        z = np.asarray(self.z_nodes, dtype=float)
        rho12 = np.asarray(self.rho12, dtype=complex)
        if z.ndim != 1 or z.shape != rho12.shape or z.size < 2:
            raise ValidationError("z_nodes and rho12 must be matching 1-d arrays")
        if np.any(np.diff(z) <= 0):
            raise ValidationError("z_nodes must be strictly increasing")
        if abs(z[0]) > 1e-12 * self.length or abs(z[-1] - self.length) > 1e-12 * self.length:
            raise ValidationError("z_nodes must span [0, length]")
        if np.any(np.abs(rho12) > 0.5 + 1e-12):
            raise ValidationError("|rho12| cannot exceed 1/2")
        object.__setattr__(self, "z_nodes", z)
        object.__setattr__(self, "rho12", rho12)

    @property
    def magnitude(self):
        return np.abs(self.rho12)

    @property
    def phase(self):
        return np.angle(self.rho12)

    def with_coherence(self, rho12):
        return CoherenceField(self.z_nodes, rho12, self.delta_k, self.length)


def gaussian_envelope(z, length, peak=DEFAULT_ENVELOPE, width=None):
    """Gaussian ``|rho12(z)|`` centred in the medium (width defaults to ``length/4``)."""
    width = length / 4 if width is None else width
    return peak * np.exp(-0.5 * ((np.asarray(z) - length / 2) / width) ** 2)


def eit_write(envelope=DEFAULT_ENVELOPE, delta_k=10 * np.pi, length=1.0, n_nodes=DEFAULT_Z_NODES):
    """Stored coherence ``envelope(z) exp(-i delta_k z)`` on a uniform grid.

    ``envelope`` is a constant, an array of ``n_nodes`` values or a callable
    of ``z``.  At least 32 nodes per ``2 pi`` of phase winding are required.
    """
    if not length > 0:
        raise DomainError("medium length must be positive")
    turns = abs(delta_k) * length / (2 * np.pi)
    if n_nodes - 1 < MIN_NODES_PER_TURN * turns or n_nodes < 2:
        raise ValidationError(f"{n_nodes} z nodes under-resolve {turns:g} phase turns")
    z = np.linspace(0.0, length, int(n_nodes))
    env = envelope(z) if callable(envelope) else np.broadcast_to(np.asarray(envelope, dtype=float), z.shape)
    if np.any(env < 0) or np.any(env > 0.5):
        raise DomainError("envelope must lie in [0, 1/2]")
    return CoherenceField(z, env * np.exp(-1j * delta_k * z), delta_k, length)


def _matched_integral(field):
    return integrate.trapezoid(field.rho12 * np.exp(1j * field.delta_k * field.z_nodes), field.z_nodes)


def eit_efficiency_general(field_out, field_in, method="analytic", metadata=None):
    """Ratio of squared phase-matched integrals, by the trapezoidal rule."""
    if field_out.z_nodes.shape != field_in.z_nodes.shape or np.any(field_out.z_nodes != field_in.z_nodes):
        raise ValidationError("input and output fields must share the z grid")
    if field_out.delta_k != field_in.delta_k:
        raise ValidationError("input and output fields must share delta_k")
    denominator = abs(_matched_integral(field_in)) ** 2
    if denominator == 0:
        raise DomainError("the input field has no phase-matched component")
    value = abs(_matched_integral(field_out)) ** 2 / denominator
    return EfficiencyResult(float(value), method, dict(metadata or {}))


def eit_efficiency_phase_averaged(ratios, method="analytic", metadata=None):
    """``|mean(ratios)|^2`` for ratios sampled on a uniform initial-phase grid."""
    ratios = np.asarray(ratios, dtype=complex)
    if ratios.ndim != 1 or ratios.size == 0:
        raise ValidationError("ratios must be a non-empty 1-d array")
    return EfficiencyResult(float(abs(ratios.mean()) ** 2), method, dict(metadata or {}))


def coherence_ratios(seq, xi0, grid=None, n_dephase=None, magnitude=DEFAULT_ENVELOPE):
    """Complex ``<rho12(T_st)> / rho12(0)`` for initial phases ``xi0``."""
    gates, weights = ensemble_gates(seq, grid, n_dephase)
    rho = initial_state(xi0, magnitude)
    return averaged_coherence(gates, weights, rho) / rho[..., 0, 1]


def eit_phase_averaged_bruteforce(seq, grid=None, n_dephase=None, n_phase=DEFAULT_PHASE_POINTS,
                                  magnitude=DEFAULT_ENVELOPE):
    """Phase-averaged light-storage efficiency from brute-force propagation."""
    ratios = coherence_ratios(seq, phase_grid(n_phase), grid, n_dephase, magnitude)
    return eit_efficiency_phase_averaged(
        ratios, method_tag(grid, n_dephase),
        {"phases": seq.phases, "repetitions": seq.repetitions, "n_phase": n_phase, "n_dephase": n_dephase},
    )


def field_profile_after(seq, field_in, grid=None, n_dephase=None, chunk=512):
    """Ensemble-averaged coherence along the medium after the sequence."""
    gates, weights = ensemble_gates(seq, grid, n_dephase)
    out = np.empty_like(field_in.rho12)
    for start in range(0, out.size, chunk):
        # population mostly in |1>, as after writing a weak probe
        rho = su2.pure_state_with_coherence(field_in.rho12[start:start + chunk])
        out[start:start + chunk] = averaged_coherence(gates, weights, rho)
    return field_in.with_coherence(out)


def eit_bruteforce(seq, field_in, grid=None, n_dephase=None):
    """Light-storage efficiency from the propagated coherence profile."""
    field_out = field_profile_after(seq, field_in, grid, n_dephase)
    return eit_efficiency_general(
        field_out, field_in, method_tag(grid, n_dephase),
        {"phases": seq.phases, "repetitions": seq.repetitions, "delta_k_L": field_in.delta_k * field_in.length},
    )


def eit_hahn_analytic(epsilon, delta_k_l, weights=None):
    """Single-pulse storage ``<1-eps>^2 |(exp(2 i dkL) - 1) / (2 dkL)|^2``."""
    mean = weighted_mean(1 - np.asarray(epsilon, dtype=float), weights)
    if delta_k_l == 0:
        return EfficiencyResult(float(mean**2), "analytic", {"sequence": "Hahn", "delta_k_L": 0.0})
    if not delta_k_l > 0:
        raise DomainError("delta_k L must be non-negative")
    # |exp(2ix) - 1| / (2x) = |sin x| / x
    factor = np.sin(delta_k_l) / delta_k_l
    return EfficiencyResult(float(mean**2 * factor**2), "analytic", {"sequence": "Hahn", "delta_k_L": delta_k_l})
