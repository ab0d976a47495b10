"""Command-line front end: configuration-driven sweeps written as CSV or JSON.

Configs are JSON documents (see ``configs/``).  Any value can be overridden
on the command line as ``--section.key=value``; the value is parsed as JSON
when possible and kept as a string otherwise.  Angles in configs and output
are degrees; rates are rad/s and times are seconds.
"""
import argparse
import copy
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import ensemble, pulses, sequences, su2
from . import efficiency as eff
from .errors import ConfigError, RephasingError

SCHEMA_VERSION = 1
EXPERIMENTS = ("sweep-phase", "sweep-write-phase", "sweep-count", "field-profile", "bloch-traj", "table", "check")
TWO_PI = 2 * math.pi

DEFAULTS = {
    "experiment": None,
    "regime": "spin-echo",
    "sequence": {"name": "CPMG", "phi2_deg": 0.0, "repetitions": 1},
    "error_model": {
        "kind": "fixed-epsilon",
        "epsilon": 0.1,
        "pulse_duration": 3.2e-6,
        "rabi": TWO_PI * 156e3,
        "detuning": 0.0,
        "peak_rabi": None,
        "chirp": 0.0,
        "width": None,
    },
    "ensemble": {
        "mode": "dephased",
        "n_dephase": 256,
        "distribution": "gaussian",
        "width": None,
        "dephasing_time": 10e-6,
        "n_points": ensemble.DEFAULT_PHYSICAL_POINTS,
        "rabi_spread": 0.0,
        "n_rabi": 9,
    },
    "eit": {"method": "phase-averaged", "delta_k_L_turns": 5.0, "z_nodes": 4096,
            "envelope": "uniform", "n_phase": 256},
    "storage_time": 600e-6,
    "sweep": {"start_deg": 0.0, "stop_deg": 360.0, "points": 73, "phi0_deg": 0.0, "normalize": False},
    "count": {"max_pulses": 20},
    "profile": {"stages": ["write", "hahn", "cpmg"]},
    "table": {"sequences": list(sequences.TABLE_NAMES), "epsilons": [0.05, 0.1, 0.2, 0.3], "exact": False},
    "bloch": {"cycle_time": 30e-6, "n_pulses": 10, "bandwidth": TWO_PI * 40e3, "n_atoms": 41,
              "n_ring": 12, "dt": 0.1e-6, "per_atom": False},
    "check": {"tolerance": 1e-3},
}

REGIMES = ("spin-echo", "eit")


# -- configuration ----------------------------------------------------------

def _merge(base, update, path=""):
    for key, value in update.items():
        where = f"{path}{key}"
        if key not in base:
            raise ConfigError(f"unknown config field {where!r}")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"config field {where!r} must be a section")
            _merge(base[key], value, where + ".")
        else:
            base[key] = value
    return base


def _parse_value(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def parse_overrides(args):
    """Turn ``--a.b=value`` arguments into a nested dict."""
    nested = {}
    for arg in args:
        if not arg.startswith("--") or "=" not in arg:
            raise ConfigError(f"unrecognized argument {arg!r}; overrides look like --section.key=value")
        key, text = arg[2:].split("=", 1)
        parts = key.split(".")
        node = nested
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = _parse_value(text)
    return nested


def load_config(path=None, overrides=None, experiment=None):
    """Defaults, then the config file, then overrides; validated."""
    config = copy.deepcopy(DEFAULTS)
    if path:
        try:
            with open(path) as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        _merge(config, data)
    _merge(config, overrides or {})
    if experiment:
        config["experiment"] = experiment
    validate(config)
    return config


def _require(cond, field, message):
    if not cond:
        raise ConfigError(f"{field}: {message}")


def _number(config, section, key, positive=False, allow_none=False):
    value = config[section][key] if section else config[key]
    field = f"{section}.{key}" if section else key
    if value is None and allow_none:
        return None
    _require(isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value),
             field, f"expected a number, got {value!r}")
    if positive:
        _require(value > 0, field, f"must be positive, got {value}")
    return value


def validate(config):
    _require(config["experiment"] in EXPERIMENTS, "experiment", f"must be one of {EXPERIMENTS}")
    _require(config["regime"] in REGIMES, "regime", f"must be one of {REGIMES}")
    try:
        sequences.canonical_name(config["sequence"]["name"])
    except ConfigError as exc:
        raise ConfigError(f"sequence.name: {exc}") from exc
    reps = config["sequence"]["repetitions"]
    _require(isinstance(reps, int) and reps >= 1, "sequence.repetitions", "must be a positive integer")
    _number(config, "sequence", "phi2_deg")
    model = config["error_model"]
    _require(model["kind"] in ("fixed-epsilon", "rectangular", "demkov-kunike"), "error_model.kind",
             "must be fixed-epsilon, rectangular or demkov-kunike")
    eps = _number(config, "error_model", "epsilon")
    _require(0 <= eps <= 1, "error_model.epsilon", "must lie in [0, 1]")
    _number(config, "error_model", "pulse_duration", positive=True)
    if model["kind"] == "demkov-kunike":
        _number(config, "error_model", "peak_rabi", positive=True)
        _number(config, "error_model", "width", positive=True)
    ens = config["ensemble"]
    _require(ens["mode"] in ("dephased", "physical"), "ensemble.mode", "must be dephased or physical")
    _require(isinstance(ens["n_dephase"], int) and 1 <= ens["n_dephase"] <= 1 << 16,
             "ensemble.n_dephase", "must be an integer in [1, 65536]")
    _require(isinstance(ens["n_points"], int) and 1 <= ens["n_points"] <= 1 << 16,
             "ensemble.n_points", "must be an integer in [1, 65536]")
    _require(ens["distribution"] in ("gaussian", "lorentzian", "uniform"), "ensemble.distribution",
             "must be gaussian, lorentzian or uniform")
    _number(config, "ensemble", "width", positive=True, allow_none=True)
    _number(config, "ensemble", "dephasing_time", positive=True)
    _require(0 <= _number(config, "ensemble", "rabi_spread") < 1, "ensemble.rabi_spread", "must lie in [0, 1)")
    eit = config["eit"]
    _require(eit["method"] in ("phase-averaged", "field"), "eit.method", "must be phase-averaged or field")
    _require(eit["envelope"] in ("uniform", "gaussian"), "eit.envelope", "must be uniform or gaussian")
    _require(isinstance(eit["z_nodes"], int) and 2 <= eit["z_nodes"] <= 1 << 20, "eit.z_nodes",
             "must be an integer in [2, 1048576]")
    _require(isinstance(eit["n_phase"], int) and 1 <= eit["n_phase"] <= 1 << 16, "eit.n_phase",
             "must be an integer in [1, 65536]")
    _number(config, "eit", "delta_k_L_turns")
    _number(config, None, "storage_time", positive=True)
    sweep = config["sweep"]
    _require(isinstance(sweep["points"], int) and 1 <= sweep["points"] <= 100000, "sweep.points",
             "must be an integer in [1, 100000]")
    _require(isinstance(config["count"]["max_pulses"], int) and config["count"]["max_pulses"] >= 1,
             "count.max_pulses", "must be a positive integer")
    for stage in config["profile"]["stages"]:
        _require(stage in ("write", "hahn", "cpmg"), "profile.stages", f"unknown stage {stage!r}")
    for name in config["table"]["sequences"]:
        try:
            sequences.canonical_name(name)
        except ConfigError as exc:
            raise ConfigError(f"table.sequences: {exc}") from exc
    for eps in config["table"]["epsilons"]:
        _require(isinstance(eps, (int, float)) and 0 <= eps <= 1, "table.epsilons", f"bad epsilon {eps!r}")
    bloch = config["bloch"]
    for key in ("cycle_time", "bandwidth", "dt"):
        _number(config, "bloch", key, positive=True)
    for key in ("n_pulses", "n_atoms", "n_ring"):
        _require(isinstance(bloch[key], int) and bloch[key] >= 1, f"bloch.{key}", "must be a positive integer")
    _number(config, "check", "tolerance", positive=True)


# -- building blocks from a config -----------------------------------------

def build_pulse(config, epsilon=None):
    model = config["error_model"]
    duration = model["pulse_duration"]
    if model["kind"] == "fixed-epsilon":
        return eff.fixed_error_pulse(model["epsilon"] if epsilon is None else epsilon, duration)
    if model["kind"] == "rectangular":
        return pulses.RectangularPulse(model["rabi"], model["detuning"], duration)
    return pulses.DemkovKunikePulse(model["peak_rabi"], model["chirp"], model["detuning"], model["width"])


def build_grid(config):
    """Physical ensemble grid, or ``None`` for the single-atom dephased oracle."""
    ens = config["ensemble"]
    if ens["mode"] == "dephased":
        return None
    width = ens["width"]
    kind = ens["distribution"]
    if kind == "gaussian":
        dist = ensemble.Gaussian(width if width else math.sqrt(2) / ens["dephasing_time"])
    else:
        _require(width is not None, "ensemble.width", f"required for a {kind} distribution")
        dist = ensemble.Lorentzian(width) if kind == "lorentzian" else ensemble.Uniform(width)
    rabi = ensemble.Uniform(ens["rabi_spread"]) if ens["rabi_spread"] else None
    return ensemble.build_grid(dist, ens["n_points"], rabi, ens["n_rabi"])


def n_dephase(config):
    return config["ensemble"]["n_dephase"] if config["ensemble"]["mode"] == "dephased" else None


def atom_errors(config, epsilon=None):
    """Per-atom ``(epsilon, weights)`` for the analytic formulas."""
    pulse = build_pulse(config, epsilon)
    grid = build_grid(config) or ensemble.EnsembleGrid(np.zeros(1), np.ones(1))
    eps, _ = eff.grid_epsilon(pulse, grid)
    return eps, grid.flat()[2]


def build_sequence(config, phases, epsilon=None, repetitions=1):
    pulse = build_pulse(config, epsilon)
    n_total = len(phases) * repetitions
    gap = sequences.gap_for_storage_time(config["storage_time"], n_total, pulses.pulse_duration(pulse))
    return sequences.SequenceSpec(tuple((pulse, p) for p in phases), gap, repetitions)


def build_field(config):
    eit = config["eit"]
    dkl = TWO_PI * eit["delta_k_L_turns"]
    env = eff.light_storage.DEFAULT_ENVELOPE
    if eit["envelope"] == "gaussian":
        env = lambda z: eff.gaussian_envelope(z, 1.0)  # noqa: E731
    return eff.eit_write(env, dkl, 1.0, eit["z_nodes"])


def eit_bruteforce(config, seq):
    if config["eit"]["method"] == "field":
        return eff.eit_bruteforce(seq, build_field(config), build_grid(config), n_dephase(config)).value
    return eff.eit_phase_averaged_bruteforce(seq, build_grid(config), n_dephase(config),
                                             config["eit"]["n_phase"]).value


def _closed_form_or_none(name, eps, weights, phi2=0.0, repetitions=1, exact=False):
    try:
        return eff.eit_closed_form(name, eps, phi2, repetitions, weights, exact).value
    except ConfigError:
        return None


def _parallel(fn, items, threads):
    if threads == 1 or len(items) < 2:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _angles_deg(sweep):
    return np.linspace(sweep["start_deg"], sweep["stop_deg"], sweep["points"])


# -- experiments ------------------------------------------------------------

def run_sweep_phase(config, threads=1):
    """Efficiency vs the phase of every second pulse of ``sequence``."""
    name = sequences.canonical_name(config["sequence"]["name"])
    reps = config["sequence"]["repetitions"]
    phi0 = math.radians(config["sweep"]["phi0_deg"])
    eps, weights = atom_errors(config)
    regime = config["regime"]

    def point(phi_deg):
        phi = math.radians(phi_deg)
        seq = build_sequence(config, sequences.named_phases(name, phi), repetitions=reps)
        if regime == "spin-echo":
            analytic = None
            if name in ("CPMG", "CPMG2") and reps == 1:
                phi2 = math.pi if name == "CPMG2" else phi
                analytic = eff.spin_echo_cpmg_analytic(eps, phi0, phi2, weights).value
            brute = float(eff.spin_echo_sweep(seq, eff.write_phase_to_xi(phi0), build_grid(config),
                                              n_dephase(config)))
        else:
            analytic = _closed_form_or_none(name, eps, weights, phi, reps)
            brute = eit_bruteforce(config, seq)
        return {"phi_deg": phi_deg, "eta_analytic": analytic, "eta_bruteforce": brute}

    return ["phi_deg", "eta_analytic", "eta_bruteforce"], _parallel(point, list(_angles_deg(config["sweep"])), threads)


def run_sweep_write_phase(config, threads=1):
    """Spin-echo CPMG efficiency vs the write-pulse phase."""
    _require(config["regime"] == "spin-echo", "regime", "sweep-write-phase needs the spin-echo regime")
    phi2 = math.radians(config["sequence"]["phi2_deg"])
    name = sequences.canonical_name(config["sequence"]["name"])
    reps = config["sequence"]["repetitions"]
    eps, weights = atom_errors(config)
    seq = build_sequence(config, sequences.named_phases(name, phi2), repetitions=reps)
    phi0_deg = _angles_deg(config["sweep"])
    phi0 = np.radians(phi0_deg)
    brute = eff.spin_echo_sweep(seq, eff.write_phase_to_xi(phi0), build_grid(config), n_dephase(config))
    if name in ("CPMG", "CPMG2") and reps == 1:
        phi2 = math.pi if name == "CPMG2" else phi2
        eta = np.array([eff.spin_echo_cpmg_analytic(eps, p, phi2, weights).value for p in phi0])
    else:
        eta = np.full(phi0.shape, np.nan)
    columns = ["phi0_deg", "eta", "eta_bruteforce"]
    rows = [{"phi0_deg": d, "eta": None if np.isnan(e) else e, "eta_bruteforce": b}
            for d, e, b in zip(phi0_deg, eta, brute)]
    if config["sweep"]["normalize"]:
        base = eta if not np.all(np.isnan(eta)) else brute
        lo, hi = np.nanmin(base), np.nanmax(base)
        span = hi - lo
        columns.append("eta_normalized")
        for row, value in zip(rows, base):
            row["eta_normalized"] = (value - lo) / span if span > 0 else 0.0
    return columns, rows


def count_closed_form(n, eps, weights, phi2):
    if n == 2:
        return eff.eit_cpmg(eps, weights)
    if n == 3:
        return eff.eit_triple(eps, phi2, weights)
    if n == 4:
        return eff.eit_double_cpmg(eps, phi2, weights)
    return None


def run_sweep_count(config, threads=1):
    """Light-storage efficiency vs number of pulses at fixed storage time."""
    _require(config["regime"] == "eit", "regime", "sweep-count needs the eit regime")
    name = sequences.canonical_name(config["sequence"]["name"])
    base = sequences.named_phases(name, math.radians(config["sequence"]["phi2_deg"]))
    eps, weights = atom_errors(config)
    pulse = build_pulse(config)
    n_max = config["count"]["max_pulses"]
    # fail fast, naming the largest count that fits
    sequences.gap_for_storage_time(config["storage_time"], n_max, pulses.pulse_duration(pulse))

    def point(n):
        phases = tuple(base[k % len(base)] for k in range(n))
        seq = build_sequence(config, phases)
        closed = None
        if n == 1 and config["eit"]["method"] == "field":
            closed = eff.eit_hahn_analytic(eps, TWO_PI * config["eit"]["delta_k_L_turns"], weights).value
        elif n == 1:
            closed = 0.0
        elif len(base) <= 2 and (len(base) == 1 or n % 2 == 0 or n == 3):
            closed = count_closed_form(n, eps, weights, base[-1] if len(base) > 1 else 0.0)
        return {"n_pulses": n, "eta_bruteforce": eit_bruteforce(config, seq), "eta_closed_form": closed}

    return ["n_pulses", "eta_bruteforce", "eta_closed_form"], _parallel(point, list(range(1, n_max + 1)), threads)


def run_field_profile(config, threads=1):
    """Coherence magnitude ratio and phase along the medium per stage."""
    _require(config["regime"] == "eit", "regime", "field-profile needs the eit regime")
    field = build_field(config)
    phi2 = math.radians(config["sequence"]["phi2_deg"])
    columns = ["stage", "z", "delta_k_z", "magnitude_ratio", "phase"]
    rows = []
    for stage in config["profile"]["stages"]:
        if stage == "write":
            out = field
        else:
            phases = sequences.named_phases("Hahn" if stage == "hahn" else "CPMG", phi2)
            out = eff.field_profile_after(build_sequence(config, phases), field, build_grid(config),
                                          n_dephase(config))
        ratio = np.abs(out.rho12) / np.abs(field.rho12)
        for z, ratio_z, phase in zip(field.z_nodes, ratio, out.phase):
            rows.append({"stage": stage, "z": z, "delta_k_z": field.delta_k * z,
                         "magnitude_ratio": ratio_z, "phase": phase})
    return columns, rows


def bloch_ensemble(config):
    """Ring of equatorial initial states, each carried by an ensemble of detunings.

    Returns ``(ring, detunings, times, vectors)`` with ``vectors`` of shape
    ``(len(times), n_ring, n_atoms, 3)``.
    """
    b = config["bloch"]
    pulse = build_pulse(config)
    gap = b["cycle_time"] - pulses.pulse_duration(pulse)
    _require(gap >= 0, "bloch.cycle_time", "shorter than the pulse")
    phases = sequences.named_phases(config["sequence"]["name"], math.radians(config["sequence"]["phi2_deg"]))
    seq = sequences.SequenceSpec(tuple((pulse, phases[k % len(phases)]) for k in range(b["n_pulses"])), gap)
    det = np.linspace(-b["bandwidth"], b["bandwidth"], b["n_atoms"]) if b["n_atoms"] > 1 else np.zeros(1)
    ring = TWO_PI * np.arange(b["n_ring"]) / b["n_ring"]
    rho0 = su2.density_from_bloch(np.stack([np.cos(ring), np.sin(ring), np.zeros_like(ring)], -1))
    detunings = np.broadcast_to(det, (len(ring), len(det)))
    times, rhos = sequences.sequence_trajectory(seq, rho0[:, None], detunings, b["dt"])
    return ring, det, times, su2.bloch_vector(rhos)


def run_bloch_traj(config, threads=1):
    """Ensemble-averaged (and optionally per-atom) Bloch trajectories."""
    _require(config["regime"] == "spin-echo", "regime", "bloch-traj needs the spin-echo regime")
    ring, det, times, vectors = bloch_ensemble(config)
    mean = vectors.mean(axis=2)
    columns = ["t", "ring_deg", "atom", "ensemble_avg", "x", "y", "z"]
    rows = []
    for ti, t in enumerate(times):
        for ri, r in enumerate(ring):
            x, y, z = mean[ti, ri]
            rows.append({"t": t, "ring_deg": math.degrees(r), "atom": None, "ensemble_avg": 1, "x": x, "y": y, "z": z})
            if config["bloch"]["per_atom"]:
                for ai in range(len(det)):
                    x, y, z = vectors[ti, ri, ai]
                    rows.append({"t": t, "ring_deg": math.degrees(r), "atom": ai, "ensemble_avg": 0,
                                 "x": x, "y": y, "z": z})
    return columns, rows


def run_table(config, threads=1):
    """Closed forms of the tabulated sequences against brute force."""
    exact = bool(config["table"]["exact"])
    items = [(name, e) for name in config["table"]["sequences"] for e in config["table"]["epsilons"]]

    def point(item):
        name, e = item
        eps, weights = atom_errors(config, e)
        closed = eff.eit_closed_form(name, eps, 0.0, 1, weights, exact).value
        brute = eit_bruteforce(config, build_sequence(config, sequences.named_phases(name), e))
        return {"sequence": sequences.canonical_name(name), "epsilon": e, "eta_closed_form": closed,
                "eta_bruteforce": brute, "abs_diff": abs(closed - brute)}

    return ["sequence", "epsilon", "eta_closed_form", "eta_bruteforce", "abs_diff"], _parallel(point, items, threads)


def run_check(config, threads=1):
    """Every analytic/brute-force pair of the table and CPMG sweeps."""
    tol = config["check"]["tolerance"]
    rows = []
    _, table = run_table(config, threads)
    for row in table:
        rows.append({"check": f"table:{row['sequence']}:eps={row['epsilon']}", "analytic": row["eta_closed_form"],
                     "bruteforce": row["eta_bruteforce"]})
    cpmg = copy.deepcopy(config)
    cpmg["sequence"].update(name="CPMG", repetitions=1)
    for regime in REGIMES:
        cpmg["regime"] = regime
        _, sweep = run_sweep_phase(cpmg, threads)
        for row in sweep:
            rows.append({"check": f"{regime}:CPMG:phi={row['phi_deg']:g}", "analytic": row["eta_analytic"],
                         "bruteforce": row["eta_bruteforce"]})
    for row in rows:
        row["abs_diff"] = abs(row["analytic"] - row["bruteforce"])
        row["passed"] = int(row["abs_diff"] <= tol)
    return ["check", "analytic", "bruteforce", "abs_diff", "passed"], rows


RUNNERS = {
    "sweep-phase": run_sweep_phase,
    "sweep-write-phase": run_sweep_write_phase,
    "sweep-count": run_sweep_count,
    "field-profile": run_field_profile,
    "bloch-traj": run_bloch_traj,
    "table": run_table,
    "check": run_check,
}


# -- output -----------------------------------------------------------------

def _format(value):
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if isinstance(value, (np.integer,)):
        return str(int(value))
    return str(value)


def to_csv(columns, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_format(row.get(c)) for c in columns])
    return buf.getvalue()


def _jsonable(value):
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def to_json(columns, rows, config):
    payload = {
        "schema_version": SCHEMA_VERSION,
        "experiment": config["experiment"],
        "columns": columns,
        "rows": [{c: _jsonable(row.get(c)) for c in columns} for row in rows],
        "config": config,
    }
    return json.dumps(payload, indent=1) + "\n"


def run(config, threads=1):
    """Run the configured experiment; returns ``(columns, rows)``."""
    return RUNNERS[config["experiment"]](config, threads)


def build_parser():
    parser = argparse.ArgumentParser(prog="rephasing", description=__doc__.splitlines()[0])
    parser.add_argument("experiment", choices=EXPERIMENTS)
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--out", help="output path (default: stdout)")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    return parser


def main(argv=None):
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    try:
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        config = load_config(args.config, parse_overrides(extra), args.experiment)
        columns, rows = run(config, args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except RephasingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    text = to_json(columns, rows, config) if args.format == "json" else to_csv(columns, rows)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if config["experiment"] == "check":
        failed = [r["check"] for r in rows if not r["passed"]]
        if failed:
            print(f"{len(failed)} check(s) exceeded tolerance: {', '.join(failed)}", file=sys.stderr)
            return 3
    return 0
