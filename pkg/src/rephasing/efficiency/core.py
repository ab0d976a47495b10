"""Shared machinery: results, error models and ensemble propagation.

Two ways of building the set of atoms are supported.  A physical ensemble
uses an :class:`~rephasing.ensemble.EnsembleGrid` of detunings (and Rabi
factors).  The dephasing oracle adds a uniform comb of ``n_dephase`` extra
per-cycle phases ``delta_j = 2 pi j / n_dephase``; averaging over it removes
every ``exp(i m delta)`` term with ``0 < |m| < n_dephase`` exactly, which is
the regime where inter-pulse dephasing is complete.
"""
from dataclasses import dataclass, field

import numpy as np

from .. import pulses, sequences, su2
from ..errors import DomainError

DEFAULT_DEPHASE_POINTS = 256
DEFAULT_PHASE_POINTS = 256
EFFICIENCY_TOL = 1e-9


@dataclass(frozen=True)
class EfficiencyResult:
    """An efficiency value with the method that produced it."""

    value: float
    method: str
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in ("analytic", "bruteforce", "dephased_oracle"):
            raise ValueError(f"unknown method {self.method!r}")
        if not self.value >= -1e-12:
            raise DomainError(f"negative efficiency {self.value}")

    def __float__(self):
        return float(self.value)


def fixed_error_pulse(epsilon, duration=1.0):
    """Resonant pulse with transition probability ``1 - epsilon``.

    Its propagator has ``alpha = 0`` and ``beta = -pi/2``; atomic detuning
    only acts during the gaps.
    """
    epsilon = np.asarray(epsilon, dtype=float)
    if np.any(epsilon < 0) or np.any(epsilon > 1):
        raise DomainError(f"epsilon must lie in [0, 1], got {epsilon}")
    area = 2.0 * np.arcsin(np.sqrt(1.0 - epsilon))
    return pulses.ResonantPulse(float(area) if area.ndim == 0 else area, duration)


def fixed_error_sequence(name, epsilon, phi2=0.0, repetitions=1, gap=1.0):
    """Catalogued sequence built from :func:`fixed_error_pulse`."""
    return sequences.named(name, phi2, fixed_error_pulse(epsilon), gap, repetitions)


def resolve_dephase(grid=None, n_dephase=None):
    """Comb size actually used: the default comb when neither is given.

    A grid alone means a physical ensemble; ``n_dephase=0`` disables the
    comb explicitly.
    """
    if n_dephase is None:
        return DEFAULT_DEPHASE_POINTS if grid is None else 0
    if int(n_dephase) != n_dephase or n_dephase < 0:
        raise DomainError(f"n_dephase must be a non-negative integer, got {n_dephase}")
    return int(n_dephase)


def atoms(grid=None, n_dephase=None):
    """Per-atom ``(detuning, rabi_factor, cycle_phase, weight)`` arrays.

    ``grid=None`` means a single resonant atom; the atoms are repeated over
    the uniform cycle-phase comb chosen by :func:`resolve_dephase`.
    """
    n_dephase = resolve_dephase(grid, n_dephase)
    if grid is None:
        det, fac, w = np.zeros(1), np.ones(1), np.ones(1)
    else:
        det, fac, w = grid.flat()
    if not n_dephase:
        return det, fac, np.zeros_like(det), w
    comb = 2.0 * np.pi * np.arange(n_dephase) / n_dephase
    return (np.tile(det, n_dephase), np.tile(fac, n_dephase),
            np.repeat(comb, len(det)), np.tile(w, n_dephase) / n_dephase)


def ensemble_gates(seq, grid=None, n_dephase=None):
    """Sequence propagators and weights for every atom of the ensemble."""
    det, fac, phase, w = atoms(grid, n_dephase)
    return sequences.sequence_propagator(seq, det, fac, phase), w


def method_tag(grid=None, n_dephase=None):
    return "dephased_oracle" if resolve_dephase(grid, n_dephase) else "bruteforce"


def averaged_coherence(gates, weights, rho):
    """Ensemble average of the output coherence for each input state.

    ``rho`` has shape ``(..., 2, 2)``; each state is propagated through every
    atom's gate as ``U rho U^dagger`` and the ``rho12`` entries are averaged.
    """
    rho = np.asarray(rho, dtype=complex)
    top = gates[:, 0, :]
    bottom = np.conj(gates[:, 1, :])
    return np.einsum("ak,...kl,al,a->...", top, rho, bottom, weights, optimize=True)


def coherence_map(gates, weights):
    """Coefficients ``(a11, c, d, a22)`` of the averaged linear map.

    ``<rho12'> = a11 rho11 + c rho12 + d rho21 + a22 rho22``.
    """
    u = np.asarray(gates)
    terms = (u[:, 0, 0] * np.conj(u[:, 1, 0]), u[:, 0, 0] * np.conj(u[:, 1, 1]),
             u[:, 0, 1] * np.conj(u[:, 1, 0]), u[:, 0, 1] * np.conj(u[:, 1, 1]))
    return tuple(complex(np.dot(weights, t)) for t in terms)


def weighted_mean(values, weights=None):
    """Mean over atoms; ``weights=None`` means a single (scalar) value."""
    values = np.asarray(values)
    if weights is None:
        if values.ndim:
            raise DomainError("per-atom values need weights")
        return values[()]
    weights = np.asarray(weights, dtype=float)
    if values.shape != weights.shape:
        raise DomainError("values and weights differ in shape")
    return np.dot(weights, values)


def initial_state(xi0, magnitude=0.5):
    """Pure state with ``rho12 = magnitude exp(i xi0)``."""
    return su2.pure_state_with_coherence(magnitude * np.exp(1j * np.asarray(xi0, dtype=float)))


def phase_grid(n=DEFAULT_PHASE_POINTS):
    """Uniform grid of ``n`` phases on ``[0, 2 pi)``."""
    return 2.0 * np.pi * np.arange(int(n)) / int(n)


def grid_epsilon(pulse, grid):
    """Per-node ``(epsilon, beta)`` of ``pulse`` over ``grid`` (phase 0)."""
    det, fac, _ = grid.flat()
    spec = pulse.scaled(fac) if not np.all(fac == 1.0) else pulse
    gate = np.broadcast_to(pulses.propagator(spec, 0.0, det), det.shape + (2, 2))
    angles = su2.extract_angles(gate)
    return angles.epsilon, angles.beta

