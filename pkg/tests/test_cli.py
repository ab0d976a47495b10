import csv
import gzip
import io
import json
import math
import os
from pathlib import Path

import numpy as np
import pytest

from rephasing import cli, pulses as P, sequences as S, su2
from rephasing.errors import ConfigError

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = sorted((ROOT / "configs").glob("*.cfg"))
GOLDEN = Path(__file__).with_name("golden")


def run(experiment, **overrides):
    config = cli.load_config(None, overrides, experiment)
    return cli.run(config)[1]


def column(rows, key):
    return np.array([np.nan if r[key] is None else r[key] for r in rows], dtype=float)


def invoke(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def experiment_of(path):
    return json.loads(path.read_text())["experiment"]


def read_csv(text):
    return list(csv.reader(io.StringIO(text)))


# -- configuration ----------------------------------------------------------

def test_parse_overrides():
    nested = cli.parse_overrides(["--sequence.name=XY4", "--error_model.epsilon=0.2", "--sweep.normalize=true"])
    assert nested == {"sequence": {"name": "XY4"}, "error_model": {"epsilon": 0.2}, "sweep": {"normalize": True}}
    with pytest.raises(ConfigError):
        cli.parse_overrides(["--sequence.name"])


@pytest.mark.parametrize("override, field", [
    ({"sequence": {"name": "XY5"}}, "sequence.name"),
    ({"error_model": {"epsilon": 1.5}}, "error_model.epsilon"),
    ({"ensemble": {"n_dephase": 0}}, "ensemble.n_dephase"),
    ({"storage_time": -1}, "storage_time"),
    ({"eit": {"envelope": "square"}}, "eit.envelope"),
    ({"bloch": {"dt": "fast"}}, "bloch.dt"),
    ({"nonsense": 1}, "nonsense"),
])
def test_validation_names_the_field(override, field):
    with pytest.raises(ConfigError, match=field.replace(".", r"\.")):
        cli.load_config(None, override, "sweep-phase")


def test_config_file_then_overrides(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(json.dumps({"sequence": {"name": "XY4"}, "error_model": {"epsilon": 0.2}}))
    config = cli.load_config(str(path), {"error_model": {"epsilon": 0.3}}, "table")
    assert config["sequence"]["name"] == "XY4" and config["error_model"]["epsilon"] == 0.3
    assert config["storage_time"] == cli.DEFAULTS["storage_time"]


def test_exit_code_config_error(capsys, tmp_path):
    code, _, err = invoke(capsys, "sweep-phase", "--sequence.name=bogus")
    assert code == 2 and "sequence.name" in err
    code, _, err = invoke(capsys, "sweep-count", "--regime=eit", "--count.max_pulses=500")
    assert code == 2 and "at most 187 pulses fit" in err
    code, _, err = invoke(capsys, "table", "--config", str(tmp_path / "missing.cfg"))
    assert code == 2


# -- experiments ------------------------------------------------------------

def test_sweep_phase_spin_echo():
    rows = run("sweep-phase")
    phi = column(rows, "phi_deg")
    analytic, brute = column(rows, "eta_analytic"), column(rows, "eta_bruteforce")
    assert len(rows) == 73 and phi[0] == 0 and phi[-1] == 360
    assert abs(analytic[0] - 0.63) < 1e-12 and abs(analytic[phi == 180][0] - 0.99) < 1e-12
    assert np.max(np.abs(analytic - brute)) < 1e-3


def test_sweep_phase_eit_single_and_double():
    rows = run("sweep-phase", regime="eit")
    np.testing.assert_allclose(column(rows, "eta_bruteforce"), 0.6561, atol=1e-12)
    rows = run("sweep-phase", regime="eit", sequence={"repetitions": 2})
    phi, brute = column(rows, "phi_deg"), column(rows, "eta_bruteforce")
    assert abs(brute[phi == 90][0] - 0.92910) < 1e-5 and abs(brute[phi == 0][0] - 0.19847) < 1e-5
    assert np.max(np.abs(column(rows, "eta_analytic") - brute)) < 1e-12


def test_sweep_write_phase():
    rows = run("sweep-write-phase", sweep={"start_deg": -90, "stop_deg": 90, "points": 7, "normalize": True})
    eta = column(rows, "eta")
    assert abs(eta[0] - 0.99) < 1e-12 and abs(eta[3] - 0.63) < 1e-12 and abs(eta[-1] - 0.99) < 1e-12
    assert np.max(np.abs(eta - column(rows, "eta_bruteforce"))) < 1e-3
    norm = column(rows, "eta_normalized")
    assert norm.min() == 0 and norm.max() == 1
    flat = column(run("sweep-write-phase", error_model={"epsilon": 0.0}), "eta")
    np.testing.assert_allclose(flat, 1.0, atol=1e-15)


def test_sweep_count():
    rows = run("sweep-count", regime="eit", error_model={"epsilon": 0.0}, count={"max_pulses": 6})
    brute = column(rows, "eta_bruteforce")
    np.testing.assert_allclose(brute, [0, 1, 0, 1, 0, 1], atol=1e-10)
    rows = run("sweep-count", regime="eit", count={"max_pulses": 4})
    brute, closed = column(rows, "eta_bruteforce"), column(rows, "eta_closed_form")
    assert abs(brute[1] - 0.6561) < 1e-3 and abs(brute[2] - 0.104976) < 1e-3
    np.testing.assert_allclose(brute, closed, atol=1e-12)


def test_field_profile():
    rows = run("field-profile", regime="eit", error_model={"epsilon": 0.3}, eit={"z_nodes": 1024})
    stages = {s: [r for r in rows if r["stage"] == s] for s in ("write", "hahn", "cpmg")}
    write = stages["write"]
    dkz = column(write, "delta_k_z")
    np.testing.assert_allclose(column(write, "magnitude_ratio"), 1.0, atol=1e-15)
    assert np.max(np.abs(su2.wrap_phase(column(write, "phase") + dkz))) < 1e-12
    hahn_offset = np.unwrap(column(stages["hahn"], "phase") - dkz)
    assert np.ptp(hahn_offset) < 1e-6
    ratio = column(stages["cpmg"], "magnitude_ratio")
    spectrum = np.abs(np.fft.rfft(ratio - ratio.mean()))
    assert np.argmax(spectrum) == 10


def test_physical_mode_converged_under_grid_doubling():
    base = {"regime": "eit", "error_model": {"kind": "rectangular"}, "ensemble": {"mode": "physical"},
            "sweep": {"points": 5}, "sequence": {"repetitions": 2}}
    default = column(run("sweep-phase", **base), "eta_bruteforce")
    points = 2 * cli.DEFAULTS["ensemble"]["n_points"]
    doubled = column(run("sweep-phase", **{**base, "ensemble": {"mode": "physical", "n_points": points}}),
                     "eta_bruteforce")
    assert np.max(np.abs(default - doubled)) < 1e-8


def test_bloch_traj_rows_and_flags():
    rows = run("bloch-traj", bloch={"n_pulses": 2, "n_ring": 2, "n_atoms": 3, "dt": 1e-6, "per_atom": True})
    flags = column(rows, "ensemble_avg")
    assert set(flags) == {0.0, 1.0} and np.sum(flags == 0) == 3 * np.sum(flags == 1)
    t = column(rows, "t")
    assert np.all(np.diff(t) >= 0)


def test_perfect_half_pulse_from_excited_state():
    half = P.ResonantPulse(np.pi / 2)
    rho = np.diag([0.0, 1.0]).astype(complex)
    _, rhos = S.sequence_trajectory(S.SequenceSpec(((half, 0.0),)), rho)
    end = su2.bloch_vector(rhos[-1])
    assert np.allclose(np.abs(end), [0, 1, 0], atol=1e-12)


def test_free_evolution_trajectory():
    slow = P.ResonantPulse(1e-300)
    seq = S.SequenceSpec(((slow, 0.0),), gap=2.0)
    rho = su2.density_from_bloch(np.array([0.6, 0.0, 0.8]))
    t, rhos = S.sequence_trajectory(seq, rho, detuning=0.7, dt=0.01)
    vec = su2.bloch_vector(rhos)
    assert np.max(np.abs(vec[:, 2] - 0.8)) < 1e-12
    angle = np.unwrap(np.arctan2(vec[:, 1], vec[:, 0]))
    mask = t <= 1.0
    slope = np.polyfit(t[mask], angle[mask], 1)[0]
    assert abs(abs(slope) - 0.7) < 1e-9


def test_spin_lock_projects_onto_pulse_axis():
    config = cli.load_config(str(ROOT / "configs" / "fig6_inset.cfg"))
    ring, _, _, vectors = cli.bloch_ensemble(config)
    start, end = vectors[0].mean(axis=1), vectors[-1].mean(axis=1)
    axis = np.array([1.0, 0.0, 0.0])

    def angle_to_axis(v):
        return np.degrees(np.arccos(np.abs(v @ axis) / np.linalg.norm(v, axis=-1)))

    before, after = angle_to_axis(start), angle_to_axis(end)
    on_axis = before < 1e-6
    assert np.all(after[on_axis] < 15)
    oblique = (before > 1) & (before < 89)
    assert np.all(after[oblique] < before[oblique])
    perp_before = np.linalg.norm(start - np.outer(start @ axis, axis), axis=-1)
    perp_after = np.linalg.norm(end - np.outer(end @ axis, axis), axis=-1)
    assert np.all(perp_after[perp_before > 0.1] < 0.6 * perp_before[perp_before > 0.1])
    np.testing.assert_allclose(end @ axis, start @ axis, atol=0.02)


def test_table():
    rows = run("table", regime="eit", table={"sequences": ["CPMG", "UR6", "UR8"], "epsilons": [0.1]})
    values = {r["sequence"]: r for r in rows}
    assert abs(values["CPMG"]["eta_closed_form"] - 0.6561) < 1e-12
    assert abs(values["UR6"]["eta_closed_form"] - 0.99536) < 1e-5
    assert abs(values["UR8"]["eta_closed_form"] - 0.99933) < 1e-5
    assert all(r["abs_diff"] < 1e-3 for r in rows)


def test_check_passes_on_untruncated_forms(capsys):
    code, out, _ = invoke(capsys, "check", "--regime=eit", "--sweep.points=5",
                          '--table.epsilons=[0.1]', "--table.exact=true")
    assert code == 0
    assert all(row[-1] == "1" for row in read_csv(out)[1:])


def test_check_exit_code_on_tolerance_failure(capsys):
    code, _, err = invoke(capsys, "check", "--regime=eit", "--sweep.points=5",
                          '--table.sequences=["KDD2"]', "--table.epsilons=[0.3]")
    assert code == 3 and "KDD2" in err


# -- output -----------------------------------------------------------------

def test_csv_dialect(capsys):
    code, out, _ = invoke(capsys, "sweep-phase", "--sweep.points=3", "--threads=1")
    assert code == 0 and "\r" not in out
    rows = read_csv(out)
    assert rows[0] == ["phi_deg", "eta_analytic", "eta_bruteforce"]
    value = rows[1][1]
    assert abs(float(value) - 0.63) < 1e-12


def test_csv_round_trips_floats():
    rows = [{"v": 0.1 + 0.2}, {"v": np.float64(1 / 3)}]
    parsed = read_csv(cli.to_csv(["v"], rows))
    assert [float(r[0]) for r in parsed[1:]] == [0.1 + 0.2, 1 / 3]


def test_json_output(capsys, tmp_path):
    out = tmp_path / "out.json"
    code, stdout, _ = invoke(capsys, "sweep-phase", "--sweep.points=3", "--format=json", "--out", str(out))
    assert code == 0 and stdout == ""
    payload = json.loads(out.read_text())
    assert payload["schema_version"] == cli.SCHEMA_VERSION
    assert payload["columns"] == ["phi_deg", "eta_analytic", "eta_bruteforce"]
    assert len(payload["rows"]) == 3 and payload["config"]["sweep"]["points"] == 3


@pytest.mark.parametrize("argv", [
    ["sweep-phase", "--regime=eit", "--sequence.repetitions=2", "--sweep.points=13"],
    ["sweep-count", "--regime=eit", "--count.max_pulses=8"],
    ["table", "--regime=eit", "--table.epsilons=[0.1,0.3]"],
])
def test_output_independent_of_threads(capsys, argv):
    outputs = {invoke(capsys, *argv, f"--threads={n}")[1] for n in (1, 3, 8)}
    assert len(outputs) == 1


# -- golden files -------------------------------------------------------------

def render(path):
    code = cli.main([experiment_of(path), "--config", str(path), "--threads=2", "--out", os.devnull])
    assert code == 0
    config = cli.load_config(str(path))
    return cli.to_csv(*cli.run(config, threads=2))


def regenerate():
    GOLDEN.mkdir(exist_ok=True)
    for path in CONFIGS:
        with gzip.open(GOLDEN / f"{path.stem}.csv.gz", "wt", newline="") as fh:
            fh.write(render(path))


def as_numbers(rows):
    def parse(cell):
        try:
            return float(cell) if cell else math.nan
        except ValueError:
            return cell
    return [[parse(c) for c in row] for row in rows]


@pytest.mark.parametrize("path", CONFIGS, ids=lambda p: p.stem)
def test_golden(path):
    golden = GOLDEN / f"{path.stem}.csv.gz"
    assert golden.exists(), "golden file missing; run python3 tests/test_cli.py"
    with gzip.open(golden, "rt", newline="") as fh:
        expected = read_csv(fh.read())
    actual = read_csv(render(path))
    assert actual[0] == expected[0] and len(actual) == len(expected)
    for got, want in zip(as_numbers(actual[1:]), as_numbers(expected[1:])):
        for g, w in zip(got, want):
            if isinstance(w, float):
                assert g == pytest.approx(w, rel=1e-9, abs=1e-12, nan_ok=True)
            else:
                assert g == w


if __name__ == "__main__":
    regenerate()
