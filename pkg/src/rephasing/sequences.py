"""Phased pulse sequences with equal free-evolution gaps.

Every pulse sits in a cycle ``[gap/2 - pulse(phi) - gap/2]`` so a sequence of
``n`` pulses repeated ``N`` times lasts ``N n (gap + T_pulse)``.  The cycle
propagator multiplies the diagonal of the pulse gate by
``exp(+-i Delta gap / 2)``, i.e. ``alpha -> delta = alpha + Delta gap / 2``,
and leaves the off-diagonal ``beta + phi`` untouched.
"""
from dataclasses import dataclass, replace

import numpy as np

from . import pulses, su2
from .errors import ConfigError, ValidationError

PI = np.pi

# phase patterns as (multiplier, unit)
_CATALOGUE = {
    "Hahn": ((0,), PI),
    "CPMG2": ((0, 1), PI),
    "XY4": ((0, 1, 0, 1), PI / 2),
    "UR4": ((0, 1, 1, 0), PI),
    "UR6": ((0, 2, 0, 0, 2, 0), PI / 3),
    "XY8": ((0, 1, 0, 1, 1, 0, 1, 0), PI / 2),
    "UR8": ((0, 1, 3, 2, 2, 3, 1, 0), PI / 2),
    "U5a2": ((0, 5, 2, 5, 0, 0, 5, 2, 5, 0), PI / 6),
    "KDD2": ((1, 0, 3, 0, 1, 1, 0, 3, 0, 1), PI / 6),
    "UR10": ((0, 4, 2, 4, 0, 0, 4, 2, 4, 0), PI / 5),
}
# patterns with a free phase phi2 on the marked slots
_FREE = {
    "CPMG": (0, None),
    "triple": (0, None, 0),
}
NAMES = ("Hahn", "CPMG", "CPMG2", "triple", "XY4", "UR4", "UR6", "XY8", "UR8", "U5a2", "KDD2", "UR10")
TABLE_NAMES = ("CPMG", "XY4", "UR4", "UR6", "XY8", "UR8", "U5a2", "KDD2", "UR10")
_ALIASES = {"U5a²": "U5a2", "KDD²": "KDD2", "[U5a]2": "U5a2", "[KDD]2": "KDD2", "CPMG-2": "CPMG2"}

PERFECT_PI = pulses.ResonantPulse(PI)


@dataclass(frozen=True)
class SequenceSpec:
    """Ordered ``(pulse, phase)`` elements, equal gap, repeated ``repetitions`` times."""

    elements: tuple
    gap: float = 0.0
    repetitions: int = 1

    def __post_init__(self):
        elements = tuple((pulse, float(phase)) for pulse, phase in self.elements)
        if not elements:
            raise ValidationError("a sequence needs at least one pulse")
        if not self.gap >= 0:
            raise ValidationError(f"gap must be non-negative, got {self.gap}")
        if int(self.repetitions) != self.repetitions or self.repetitions < 1:
            raise ValidationError(f"repetitions must be a positive integer, got {self.repetitions}")
        object.__setattr__(self, "elements", elements)
        object.__setattr__(self, "repetitions", int(self.repetitions))

    @property
    def phases(self):
        return tuple(phase for _, phase in self.elements)

    @property
    def n_pulses(self):
        return len(self.elements) * self.repetitions

    @property
    def duration(self):
        per_pulse = [self.gap + pulses.pulse_duration(p) for p, _ in self.elements]
        return self.repetitions * float(np.sum(per_pulse))

    def with_pulse(self, pulse):
        """Same phases with every pulse replaced by ``pulse``."""
        return replace(self, elements=tuple((pulse, phase) for _, phase in self.elements))

    def with_gap(self, gap):
        return replace(self, gap=gap)

    def repeated(self, repetitions):
        return replace(self, repetitions=repetitions)

    def unrolled(self):
        """Equivalent single-repetition spec with the element list repeated."""
        return replace(self, elements=self.elements * self.repetitions, repetitions=1)


def canonical_name(name):
    key = _ALIASES.get(name, name)
    lookup = {n.lower(): n for n in NAMES}
    if key.lower() not in lookup:
        raise ConfigError(f"unknown sequence {name!r}; known: {', '.join(NAMES)}")
    return lookup[key.lower()]


def named_phases(name, phi2=0.0):
    """Phase list (radians) of a catalogued sequence.

    ``CPMG`` is ``(0, phi2)`` and ``triple`` is ``(0, phi2, 0)``;
    ``CPMG2`` is CPMG with ``phi2 = pi``.  Other names ignore ``phi2``.
    """
    name = canonical_name(name)
    if name in _FREE:
        return tuple(float(phi2) if slot is None else float(slot) for slot in _FREE[name])
    mult, unit = _CATALOGUE[name]
    return tuple(m * unit for m in mult)


def named(name, phi2=0.0, pulse=PERFECT_PI, gap=0.0, repetitions=1):
    """:class:`SequenceSpec` for a catalogued sequence (perfect pi pulses by default)."""
    return SequenceSpec(tuple((pulse, phase) for phase in named_phases(name, phi2)), gap, repetitions)


def free_half_gap(detuning, gap, cycle_phase=0.0):
    """Free evolution over half a gap, plus half of an extra cycle phase.

    ``cycle_phase`` adds directly to ``delta``; it lets the dephasing limit be
    realized by averaging over a uniform grid of cycle phases.
    """
    half = 0.25 * np.asarray(detuning, dtype=float) * gap + 0.5 * np.asarray(cycle_phase, dtype=float)
    return su2.free_evolution(2.0 * half, 1.0)


def cycle_propagator(pulse_gate, detuning, gap, cycle_phase=0.0):
    """``F U F`` with ``F = diag(exp(i Delta gap/4), exp(-i Delta gap/4))``."""
    free = free_half_gap(detuning, gap, cycle_phase)
    return free @ np.asarray(pulse_gate) @ free


def sequence_propagator(seq, detuning=0.0, rabi_factor=1.0, cycle_phase=0.0):
    """Per-atom propagator of the whole sequence.

    ``detuning``, ``rabi_factor`` and ``cycle_phase`` broadcast against each
    other; the result has their broadcast shape plus ``(2, 2)``.
    """
    detuning, rabi_factor, cycle_phase = np.broadcast_arrays(
        *(np.asarray(a, dtype=float) for a in (detuning, rabi_factor, cycle_phase))
    )
    one = su2.identity(detuning.shape)
    scaled = not np.all(rabi_factor == 1.0)
    for pulse, phase in seq.elements:
        spec = pulse.scaled(rabi_factor) if scaled else pulse
        gate = pulses.propagator(spec, phase, detuning)
        gate = np.broadcast_to(gate, detuning.shape + (2, 2))
        one = cycle_propagator(gate, detuning, seq.gap, cycle_phase) @ one
    if seq.repetitions == 1:
        return one
    return np.linalg.matrix_power(one, seq.repetitions)


def gap_for_storage_time(storage_time, n_pulses, pulse_duration):
    """Gap that fits ``n_pulses`` cycles into ``storage_time``.

    ``gap = storage_time / n_pulses - pulse_duration``; raises
    :class:`ConfigError` naming the largest feasible count if negative.
    """
    if n_pulses < 1:
        raise ConfigError("need at least one pulse")
    gap = storage_time / n_pulses - pulse_duration
    if gap < 0:
        n_max = int(np.floor(storage_time / pulse_duration))
        raise ConfigError(
            f"{n_pulses} pulses of {pulse_duration:g} s do not fit in {storage_time:g} s; "
            f"at most {n_max} pulses fit"
        )
    return gap


def sequence_trajectory(seq, rho0, detuning=0.0, dt=None):
    """Time-resolved density matrices through a sequence.

    Pulses are sampled on steps of ``dt`` with exact constant-field
    exponentials (fields evaluated at step midpoints); gaps use exact free
    evolution.  ``detuning`` may be an array of atoms.  Returns ``(times,
    rhos)`` with ``rhos`` of shape ``(len(times),) + detuning.shape + (2, 2)``.
    """
    detuning = np.asarray(detuning, dtype=float)
    rho = np.broadcast_to(np.asarray(rho0, dtype=complex), detuning.shape + (2, 2)).copy()
    if dt is None:
        dt = min(pulses.pulse_duration(p) for p, _ in seq.elements) / 64
    times, states = [0.0], [rho]
    t = 0.0

    def free(duration):
        nonlocal rho, t
        steps = max(1, int(np.ceil(duration / dt - 1e-9)))
        h = duration / steps
        gate = su2.free_evolution(detuning, h)
        for _ in range(steps):
            rho = su2.apply(gate, rho)
            t += h
            times.append(t)
            states.append(rho)

    for _ in range(seq.repetitions):
        for pulse, phase in seq.elements:
            if seq.gap > 0:
                free(0.5 * seq.gap)
            t0, t1 = pulse.window()
            t0, t1 = float(t0), float(t1)
            steps = max(1, int(np.ceil((t1 - t0) / dt - 1e-9)))
            h = (t1 - t0) / steps
            for k in range(steps):
                rabi, det = pulse.fields(t0 + (k + 0.5) * h, detuning)
                gate = pulses.step_propagators(rabi, det, h, phase)
                rho = su2.apply(gate, rho)
                t += h
                times.append(t)
                states.append(rho)
            if seq.gap > 0:
                free(0.5 * seq.gap)
    return np.array(times), np.stack(states)
