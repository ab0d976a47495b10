r"""Two-level propagators, density matrices and Bloch vectors.

Gates and density matrices are plain complex numpy arrays with trailing
shape ``(2, 2)``; every function broadcasts over leading axes so that a whole
ensemble of atoms can be handled in one call.

A pulse propagator is described by three real numbers,

.. math::

    U(p, \alpha, \beta; \phi) =
    \begin{pmatrix}
        \sqrt{1-p}\,e^{i\alpha} & \sqrt{p}\,e^{i(\beta+\phi)} \\
        -\sqrt{p}\,e^{-i(\beta+\phi)} & \sqrt{1-p}\,e^{-i\alpha}
    \end{pmatrix},

where ``p`` is the transition probability and ``phi`` the pulse phase.
Equivalently ``U(phi) = Z(phi) U(0) Z(-phi)`` with
``Z(phi) = diag(exp(i phi/2), exp(-i phi/2))``.

Bloch convention: ``x = 2 Re rho12``, ``y = 2 Im rho12``,
``z = rho11 - rho22``.  A pulse with ``phi = 0`` rotates about ``x``.
"""
from typing import NamedTuple

import numpy as np

from .errors import DomainError, ValidationError

ALGEBRAIC_TOL = 1e-12
VALIDATION_TOL = 1e-9
# amplitudes below this are treated as exactly zero when reading off phases
_GAUGE_TOL = 1e-14


class PulseAngles(NamedTuple):
    """Transition probability and the two propagator phases (radians)."""

    p: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray

    @property
    def epsilon(self):
        """Error in the transition probability, ``1 - p``."""
        return 1.0 - np.asarray(self.p)


def wrap_phase(angle):
    """Reduce angles to the interval (-pi, pi]."""
    wrapped = np.pi - np.mod(np.pi - np.asarray(angle, dtype=float), 2 * np.pi)
    return wrapped if wrapped.ndim else float(wrapped)


def gate_from_angles(p, alpha, beta, phi=0.0):
    """Build the propagator for transition probability ``p`` and phases.

    All arguments broadcast; the result has shape ``broadcast + (2, 2)``.
    """
    p = np.asarray(p, dtype=float)
    if np.any(p < -VALIDATION_TOL) or np.any(p > 1 + VALIDATION_TOL):
        raise DomainError(f"transition probability outside [0, 1]: {p}")
    p, alpha, beta, phi = np.broadcast_arrays(
        np.clip(p, 0.0, 1.0), *(np.asarray(a, dtype=float) for a in (alpha, beta, phi))
    )
    diag = np.sqrt(1.0 - p) * np.exp(1j * alpha)
    off = np.sqrt(p) * np.exp(1j * (beta + phi))
    gate = np.empty(p.shape + (2, 2), dtype=complex)
    gate[..., 0, 0] = diag
    gate[..., 0, 1] = off
    gate[..., 1, 0] = -np.conj(off)
    gate[..., 1, 1] = np.conj(diag)
    return gate


def extract_angles(gate):
    """Read ``(p, alpha, beta)`` off a unitary of the parameterized form.

    The phases are gauge quantities at the ends of the range: ``alpha`` is
    set to 0 when ``p == 1`` (no diagonal amplitude) and ``beta`` to 0 when
    ``p == 0``.  Both are returned in (-pi, pi].
    """
    gate = np.asarray(gate, dtype=complex)
    check_unitary(gate)
    u11, u12 = gate[..., 0, 0], gate[..., 0, 1]
    p = np.clip(np.abs(u12) ** 2, 0.0, 1.0)
    alpha = np.where(np.abs(u11) < _GAUGE_TOL, 0.0, np.angle(u11))
    beta = np.where(np.abs(u12) < _GAUGE_TOL, 0.0, np.angle(u12))
    return PulseAngles(p, wrap_phase(alpha), wrap_phase(beta))


def dagger(gate):
    """Conjugate transpose over the last two axes."""
    return np.conj(np.swapaxes(gate, -1, -2))


def compose(later, earlier):
    """Product ``later @ earlier``: apply ``earlier`` first."""
    return np.matmul(later, earlier)


def identity(shape=()):
    """Identity gates with leading ``shape``."""
    return np.broadcast_to(np.eye(2, dtype=complex), tuple(shape) + (2, 2)).copy()


def phase_shift(gate, phi):
    """Rotate the pulse phase of ``gate`` by ``phi``: ``Z(phi) U Z(-phi)``."""
    gate = np.array(gate, dtype=complex)
    rot = np.exp(1j * np.asarray(phi, dtype=float))
    gate[..., 0, 1] *= rot
    gate[..., 1, 0] *= np.conj(rot)
    return gate


def free_evolution(detuning, duration):
    """Free precession ``diag(exp(i D t / 2), exp(-i D t / 2))``.

    With this sign the coherence evolves as ``rho12 -> exp(i D t) rho12``.
    """
    half = 0.5 * np.asarray(detuning, dtype=float) * np.asarray(duration, dtype=float)
    gate = np.zeros(np.shape(half) + (2, 2), dtype=complex)
    gate[..., 0, 0] = np.exp(1j * half)
    gate[..., 1, 1] = np.exp(-1j * half)
    return gate


def unitarity_residual(gate):
    """Largest componentwise deviation of ``U U^dagger`` from the identity."""
    gate = np.asarray(gate, dtype=complex)
    return float(np.max(np.abs(gate @ dagger(gate) - np.eye(2)), initial=0.0))


def su2_residual(gate):
    """Deviation from the ``u22 = conj(u11)``, ``u21 = -conj(u12)`` form."""
    gate = np.asarray(gate, dtype=complex)
    r1 = np.abs(gate[..., 1, 1] - np.conj(gate[..., 0, 0]))
    r2 = np.abs(gate[..., 1, 0] + np.conj(gate[..., 0, 1]))
    return float(np.max(np.maximum(r1, r2), initial=0.0))


def check_unitary(gate, tol=VALIDATION_TOL):
    """Raise :class:`ValidationError` unless ``gate`` is unitary within ``tol``."""
    gate = np.asarray(gate)
    if gate.shape[-2:] != (2, 2):
        raise ValidationError(f"expected trailing shape (2, 2), got {gate.shape}")
    residual = unitarity_residual(gate)
    if not residual <= tol:
        raise ValidationError(f"gate is not unitary (residual {residual:.3g})")
    return gate


# -- density matrices -------------------------------------------------------

def density_matrix(rho11, rho12):
    """Assemble ``[[rho11, rho12], [conj(rho12), 1 - rho11]]``."""
    rho11, rho12 = np.broadcast_arrays(np.asarray(rho11, dtype=float), np.asarray(rho12, dtype=complex))
    rho = np.empty(rho11.shape + (2, 2), dtype=complex)
    rho[..., 0, 0] = rho11
    rho[..., 0, 1] = rho12
    rho[..., 1, 0] = np.conj(rho12)
    rho[..., 1, 1] = 1.0 - rho11
    return rho


def pure_state_with_coherence(rho12):
    """Pure state with the given coherence, population mostly in ``|1>``.

    ``|rho12| = 1/2`` gives the equal superposition produced by a pi/2
    write pulse; small ``|rho12|`` models a weak stored probe.
    """
    rho12 = np.asarray(rho12, dtype=complex)
    mag2 = np.abs(rho12) ** 2
    if np.any(mag2 > 0.25 + ALGEBRAIC_TOL):
        raise DomainError("|rho12| of a density matrix cannot exceed 1/2")
    rho11 = 0.5 * (1.0 + np.sqrt(np.clip(1.0 - 4.0 * mag2, 0.0, None)))
    return density_matrix(rho11, rho12)


def apply(gate, rho):
    """Propagate ``rho -> U rho U^dagger``."""
    return gate @ rho @ dagger(gate)


def check_density(rho, tol=ALGEBRAIC_TOL):
    """Validate trace, hermiticity and positivity of density matrices."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape[-2:] != (2, 2):
        raise ValidationError(f"expected trailing shape (2, 2), got {rho.shape}")
    trace = rho[..., 0, 0] + rho[..., 1, 1]
    if np.any(np.abs(trace - 1.0) > tol):
        raise ValidationError("density matrix trace differs from 1")
    if np.any(np.abs(rho[..., 1, 0] - np.conj(rho[..., 0, 1])) > tol):
        raise ValidationError("density matrix is not Hermitian")
    pops = np.stack([rho[..., 0, 0].real, rho[..., 1, 1].real])
    if np.any(pops < -tol):
        raise ValidationError("negative population")
    if np.any(np.abs(rho[..., 0, 1]) ** 2 > pops[0] * pops[1] + tol):
        raise ValidationError("coherence violates positivity")
    return rho


# -- Bloch vectors ----------------------------------------------------------

def bloch_vector(rho):
    """Map density matrices to Bloch vectors ``(x, y, z)``."""
    rho = np.asarray(rho, dtype=complex)
    rho12 = rho[..., 0, 1]
    return np.stack(
        [2.0 * rho12.real, 2.0 * rho12.imag, (rho[..., 0, 0] - rho[..., 1, 1]).real], axis=-1
    )


def density_from_bloch(vector):
    """Inverse of :func:`bloch_vector`."""
    vector = np.asarray(vector, dtype=float)
    if np.any(np.linalg.norm(vector, axis=-1) > 1.0 + ALGEBRAIC_TOL):
        raise DomainError("Bloch vector longer than 1")
    x, y, z = vector[..., 0], vector[..., 1], vector[..., 2]
    return density_matrix(0.5 * (1.0 + z), 0.5 * (x + 1j * y))
