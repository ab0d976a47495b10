r"""Single-pulse propagators.

Three analytic families are provided (resonant, rectangular and the
Demkov-Kunike sech/tanh chirped pulse), together with two time-domain
integrators used as independent oracles: fixed-step RK4 on the propagator
and a product of exact piecewise-constant exponentials for sampled fields.

All integrators use the rotating-frame Hamiltonian

.. math::

    H(t) = \frac{1}{2}\begin{pmatrix}
        -\Delta(t) & \Omega(t) e^{i\phi} \\
        \Omega(t) e^{-i\phi} & \Delta(t)
    \end{pmatrix},

whose diagonal sign matches free evolution ``rho12 -> exp(i Delta t) rho12``.

Pulse parameters may be numpy arrays; every propagator broadcasts over them,
which is how parameter sweeps are vectorized.
"""
from dataclasses import dataclass, field, replace

import numpy as np

from . import su2
from .errors import ConvergenceError, DomainError, ValidationError
from .gamma import POLE_TOL, complex_loggamma

DEFAULT_STEPS_PER_WIDTH = 4096
# sech(t/T) at t = 25 T is 3e-11, so the truncated tails carry no area
DEFAULT_DK_TRUNCATION = 25.0
MIN_DK_TRUNCATION = 5.0
CONVERGENCE_TOL = 1e-8


def _positive(name, value):
    if not np.all(np.asarray(value) > 0):
        raise ValidationError(f"{name} must be positive, got {value}")


@dataclass(frozen=True)
class ResonantPulse:
    """Resonant pulse of area ``area``; only the area matters analytically.

    ``duration`` sets the time window of the smooth ``sin^2`` envelope used
    by the time-domain oracle.  The detuning of an atom is assumed not to
    affect the pulse itself and acts only during free evolution.
    """

    area: float
    duration: float = 1.0

    def __post_init__(self):
        if not np.all(np.asarray(self.area) >= 0):
            raise ValidationError(f"pulse area must be non-negative, got {self.area}")
        _positive("duration", self.duration)

    @property
    def width(self):
        return self.duration

    def window(self):
        return 0.0, self.duration

    def fields(self, t, detuning=0.0):
        env = 2.0 * np.asarray(self.area) / self.duration * np.sin(np.pi * t / self.duration) ** 2
        return env, np.zeros_like(env) + detuning

    def scaled(self, factor):
        return replace(self, area=self.area * _rabi_factor(factor))


@dataclass(frozen=True)
class RectangularPulse:
    """Constant Rabi frequency ``rabi`` and detuning over ``duration``."""

    rabi: float
    detuning: float
    duration: float

    def __post_init__(self):
        _positive("duration", self.duration)

    @property
    def width(self):
        return self.duration

    def window(self):
        return 0.0, self.duration

    def fields(self, t, detuning=0.0):
        rabi = np.asarray(self.rabi, dtype=float) + 0.0 * t
        return rabi, np.asarray(self.detuning, dtype=float) + detuning + 0.0 * t

    def scaled(self, factor):
        return replace(self, rabi=self.rabi * _rabi_factor(factor))


@dataclass(frozen=True)
class DemkovKunikePulse:
    """``Omega(t) = peak_rabi sech(t/width)``, ``Delta(t) = detuning + chirp tanh(t/width)``.

    The pulse runs over ``[-truncation, truncation]``; ``truncation``
    defaults to ``25 * width``.
    """

    peak_rabi: float
    chirp: float
    detuning: float
    width: float
    truncation: float = None

    def __post_init__(self):
        _positive("width", self.width)
        if self.truncation is None:
            object.__setattr__(self, "truncation", DEFAULT_DK_TRUNCATION * np.asarray(self.width))
        if not np.all(np.asarray(self.truncation) >= MIN_DK_TRUNCATION * np.asarray(self.width) - 1e-12):
            raise ValidationError("truncation must be at least 5 pulse widths")

    def window(self):
        return -self.truncation, self.truncation

    def fields(self, t, detuning=0.0):
        x = t / np.asarray(self.width)
        rabi = np.asarray(self.peak_rabi) / np.cosh(x)
        return rabi, np.asarray(self.detuning) + np.asarray(self.chirp) * np.tanh(x) + detuning

    def scaled(self, factor):
        return replace(self, peak_rabi=self.peak_rabi * _rabi_factor(factor))


@dataclass(frozen=True)
class SampledPulse:
    """Piecewise-constant fields ``rabi[k]``, ``detuning[k]`` on steps of ``dt``."""

    rabi: np.ndarray
    detuning: np.ndarray
    dt: float
    # cached float arrays; excluded from comparisons
    _rabi: np.ndarray = field(init=False, repr=False, compare=False)
    _detuning: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        _positive("dt", self.dt)
        rabi = np.asarray(self.rabi, dtype=float)
        detuning = np.broadcast_to(np.asarray(self.detuning, dtype=float), rabi.shape)
        if rabi.ndim != 1 or rabi.size == 0:
            raise ValidationError("sampled fields must be non-empty 1-d arrays")
        object.__setattr__(self, "_rabi", rabi)
        object.__setattr__(self, "_detuning", detuning)

    @property
    def width(self):
        return self.dt * len(self._rabi)

    @property
    def duration(self):
        return self.width

    def window(self):
        return 0.0, self.width

    def fields(self, t, detuning=0.0):
        k = np.clip(np.floor(np.asarray(t) / self.dt).astype(int), 0, len(self._rabi) - 1)
        return self._rabi[k], self._detuning[k] + detuning

    def scaled(self, factor):
        return replace(self, rabi=self._rabi * _rabi_factor(factor))


PulseSpec = (ResonantPulse, RectangularPulse, DemkovKunikePulse, SampledPulse)


def _rabi_factor(factor):
    if not np.all(np.asarray(factor) > 0):
        raise DomainError(f"Rabi scale factor must be positive, got {factor}")
    return factor


def pulse_duration(spec):
    """Time the pulse occupies in a sequence."""
    t0, t1 = spec.window()
    return float(np.max(np.asarray(t1) - np.asarray(t0)))


# -- analytic families ------------------------------------------------------

def _constant_field_gate(rabi, detuning, duration, phi=0.0):
    """``exp(-i H T)`` for constant fields."""
    rabi, detuning, duration, phi = np.broadcast_arrays(
        *(np.asarray(a, dtype=float) for a in (rabi, detuning, duration, phi))
    )
    eff = np.sqrt(rabi**2 + detuning**2)
    half = 0.5 * eff * duration
    # sin(half)/eff written via np.sinc so that eff == 0 is regular
    s_over = 0.5 * duration * np.sinc(half / np.pi)
    cos = np.cos(half)
    gate = np.empty(rabi.shape + (2, 2), dtype=complex)
    gate[..., 0, 0] = cos + 1j * detuning * s_over
    gate[..., 1, 1] = cos - 1j * detuning * s_over
    gate[..., 0, 1] = -1j * rabi * s_over * np.exp(1j * phi)
    gate[..., 1, 0] = -1j * rabi * s_over * np.exp(-1j * phi)
    return gate


def propagator_resonant(area, phi=0.0):
    """Resonant pulse of area ``area``: ``p = sin^2(area/2)``, ``beta = -pi/2``.

    Exact ``exp(-i area sigma_phi / 2)``, with the global sign chosen so that
    ``beta = -pi/2``; then ``alpha = 0`` for areas in ``[0, pi]``.
    """
    area = np.asarray(area, dtype=float)
    if np.any(area < 0):
        raise DomainError("pulse area must be non-negative")
    half = 0.5 * area
    sign = np.where(np.sin(half) < 0, -1.0, 1.0)
    gate = _constant_field_gate(1.0, 0.0, area, phi)
    return gate * sign[..., None, None]


def propagator_rectangular(rabi, detuning, duration, phi=0.0):
    """Rectangular pulse with constant ``rabi`` and ``detuning``.

    ``p = rabi^2 / (rabi^2 + detuning^2) sin^2(A_eff/2)`` with
    ``A_eff = duration * sqrt(rabi^2 + detuning^2)``; ``alpha`` is read off
    the exact propagator (global sign fixed so that ``beta = -pi/2``).
    ``rabi == detuning == 0`` gives the identity.
    """
    gate = _constant_field_gate(rabi, detuning, duration, phi)
    amp = np.asarray(rabi, dtype=float) * np.sin(0.5 * np.sqrt(np.asarray(rabi, dtype=float) ** 2
                                                             + np.asarray(detuning, dtype=float) ** 2)
                                                     * np.asarray(duration, dtype=float))
    sign = np.where(amp < 0, -1.0, 1.0)
    return gate * sign[..., None, None]


def rectangular_alpha_table(rabi, detuning, duration):
    """``alpha`` from the arctangent closed form, confined to ``[-pi/2, pi/2]``."""
    rabi, detuning = np.asarray(rabi, dtype=float), np.asarray(detuning, dtype=float)
    eff = np.sqrt(rabi**2 + detuning**2)
    return np.arctan(detuning / eff * np.tan(0.5 * eff * duration))


def dk_parameters(peak_rabi, chirp, detuning, width):
    """Dimensionless ``(A, B, D, lambda, mu, nu)`` of the chirped pulse."""
    a = 0.5 * np.asarray(peak_rabi, dtype=float) * width
    b = 0.5 * np.asarray(chirp, dtype=float) * width
    d = 0.5 * np.asarray(detuning, dtype=float) * width
    root = np.sqrt((a**2 - b**2).astype(complex))
    lam = root - 1j * b
    mu = -root - 1j * b
    nu = 0.5 + 1j * (d - b)
    return a, b, d, lam, mu, nu


def _log_gamma_denominator(z):
    """``log Gamma(z)`` for a denominator; ``+inf`` at poles where ``1/Gamma = 0``."""
    shape = np.shape(z)
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    nearest = np.round(z.real)
    pole = (nearest <= 0) & (np.abs(z - nearest) < POLE_TOL)
    out = np.full(z.shape, np.inf, dtype=complex)
    if np.any(~pole):
        out[~pole] = complex_loggamma(z[~pole])
    return out.reshape(shape)


def propagator_demkov_kunike(peak_rabi, chirp, detuning, width, truncation=None, phi=0.0):
    """Demkov-Kunike propagator from the Gamma-function solution.

    The transition probability does not depend on ``truncation``; the phases
    ``alpha`` and ``beta`` grow linearly with it through the asymptotic
    free-evolution factors.
    """
    width = np.asarray(width, dtype=float)
    if truncation is None:
        truncation = DEFAULT_DK_TRUNCATION * width
    a, b, d, lam, mu, nu = dk_parameters(peak_rabi, chirp, detuning, width)
    lg = complex_loggamma
    shared = lg(nu - lam - mu)
    log_u11 = lg(nu) + shared - _log_gamma_denominator(nu - lam) - _log_gamma_denominator(nu - mu)
    # Gamma(2 - nu) / (1 - nu) == Gamma(1 - nu)
    log_u12 = lg(1.0 - nu) + shared - _log_gamma_denominator(1.0 - lam) - _log_gamma_denominator(1.0 - mu)
    ratio = truncation / width
    u11 = np.exp(2j * d * ratio + log_u11)
    # no 2**(2iB) prefactor: direct integration shows the asymptotic
    # tanh phase is already carried by the Gamma ratio
    u12 = -1j * a * np.exp(2j * b * ratio + log_u12)
    u12 = u12 * np.exp(1j * np.asarray(phi, dtype=float))
    gate = np.empty(np.shape(u11) + (2, 2), dtype=complex)
    gate[..., 0, 0] = u11
    gate[..., 0, 1] = u12
    gate[..., 1, 0] = -np.conj(u12)
    gate[..., 1, 1] = np.conj(u11)
    return gate


def propagator(spec, phi=0.0, detuning=0.0):
    """Analytic (or exact-exponential) propagator for any pulse spec.

    ``detuning`` is the atom's offset from the ensemble center; it adds to the
    pulse's own detuning for rectangular, chirped and sampled pulses and is
    ignored for :class:`ResonantPulse`.
    """
    if isinstance(spec, ResonantPulse):
        gate = propagator_resonant(spec.area, phi)
        return np.broadcast_to(gate, np.shape(detuning) + gate.shape[-2:]).copy() if np.ndim(detuning) else gate
    if isinstance(spec, RectangularPulse):
        return propagator_rectangular(spec.rabi, np.asarray(spec.detuning) + detuning, spec.duration, phi)
    if isinstance(spec, DemkovKunikePulse):
        return propagator_demkov_kunike(spec.peak_rabi, spec.chirp, np.asarray(spec.detuning) + detuning,
                                        spec.width, spec.truncation, phi)
    if isinstance(spec, SampledPulse):
        return propagator_sampled(spec, phi, detuning)
    raise TypeError(f"unknown pulse spec {type(spec).__name__}")


# -- time-domain oracles ----------------------------------------------------

def _rk4(field_fn, phi, t0, t1, n_steps):
    """Classic RK4; ``field_fn(t, k)`` returns ``(rabi, detuning)`` in step ``k``."""
    ephi = np.exp(1j * np.asarray(phi, dtype=float))
    h = (t1 - t0) / n_steps
    probe = field_fn(t0, 0)
    shape = np.broadcast_shapes(np.shape(probe[0]), np.shape(probe[1]), np.shape(ephi), np.shape(h))
    # columns of U: (a, c) and (b, d) with U = [[a, b], [c, d]]
    a = np.ones(shape, complex)
    b = np.zeros(shape, complex)
    c = np.zeros(shape, complex)
    d = np.ones(shape, complex)

    def deriv(t, a, b, c, d):
        rabi, det = field_fn(t, k)
        up = 0.5 * rabi * ephi
        dn = 0.5 * rabi * np.conj(ephi)
        hd = 0.5 * det
        # dU/dt = -i H U
        return (-1j * (-hd * a + up * c), -1j * (-hd * b + up * d),
                -1j * (dn * a + hd * c), -1j * (dn * b + hd * d))

    for k in range(n_steps):
        t = t0 + k * h
        k1 = deriv(t, a, b, c, d)
        k2 = deriv(t + 0.5 * h, *(x + 0.5 * h * y for x, y in zip((a, b, c, d), k1)))
        k3 = deriv(t + 0.5 * h, *(x + 0.5 * h * y for x, y in zip((a, b, c, d), k2)))
        k4 = deriv(t + h, *(x + h * y for x, y in zip((a, b, c, d), k3)))
        a, b, c, d = (x + h / 6.0 * (y1 + 2 * y2 + 2 * y3 + y4)
                      for x, y1, y2, y3, y4 in zip((a, b, c, d), k1, k2, k3, k4))
    gate = np.empty(shape + (2, 2), dtype=complex)
    gate[..., 0, 0], gate[..., 0, 1], gate[..., 1, 0], gate[..., 1, 1] = a, b, c, d
    return gate


def propagator_numeric(spec, phi=0.0, extra_detuning=0.0, dt=None, check=False):
    """Integrate ``i dU/dt = H(t) U`` with fixed-step RK4.

    ``dt`` defaults to ``width / 4096``.  Unitarity is not re-imposed; its
    drift is the error signal.  With ``check=True`` the integration is
    repeated at ``dt / 2`` and :class:`ConvergenceError` is raised if the
    gates differ by more than ``1e-8`` or unitarity drifts beyond ``1e-8``.
    """
    t0, t1 = spec.window()
    t0, t1 = float(np.min(t0)), float(np.max(t1))
    if isinstance(spec, SampledPulse):
        # one RK4 step per sample keeps every stage inside its interval
        if dt is not None:
            raise ValidationError("sampled pulses are integrated on their own time grid")
        n_steps = len(spec._rabi)

        def field_fn(t, k):
            return spec._rabi[k], spec._detuning[k] + extra_detuning
    else:
        if not (np.ndim(spec.width) == 0 or np.ptp(np.asarray(spec.width)) == 0):
            raise ValidationError("vectorized numeric propagation needs a common time window")
        if dt is None:
            dt = float(np.max(spec.width)) / DEFAULT_STEPS_PER_WIDTH
        n_steps = max(1, int(np.ceil((t1 - t0) / dt - 1e-9)))

        def field_fn(t, k):
            return spec.fields(t, extra_detuning)
    gate = _rk4(field_fn, phi, t0, t1, n_steps)
    if check:
        if isinstance(spec, SampledPulse):
            raise ValidationError("step halving is not defined for sampled pulses")
        fine = _rk4(field_fn, phi, t0, t1, 2 * n_steps)
        diff = float(np.max(np.abs(fine - gate)))
        residual = su2.unitarity_residual(gate)
        if diff > CONVERGENCE_TOL or residual > CONVERGENCE_TOL:
            raise ConvergenceError(
                "RK4 propagator did not converge",
                {"dt": (t1 - t0) / n_steps, "n_steps": n_steps, "halving_change": diff,
                 "unitarity_residual": residual},
            )
    return gate


def step_propagators(rabi, detuning, dt, phi=0.0):
    """Exact ``exp(-i H_k dt)`` for each constant-field step ``k``."""
    return _constant_field_gate(rabi, detuning, dt, phi)


def propagator_sampled(spec, phi=0.0, detuning=0.0):
    """Ordered product of exact exponentials over the samples of ``spec``."""
    rabi = spec._rabi
    det = spec._detuning
    extra = np.asarray(detuning, dtype=float)
    gate = su2.identity(extra.shape)
    for k in range(len(rabi)):
        gate = step_propagators(rabi[k], det[k] + extra, spec.dt, phi) @ gate
    return gate
