"""Acceptance criteria; each test prints one PASS/FAIL line (see the terminal summary)."""
import time

import numpy as np

from rephasing import cli, ensemble as E, pulses as P, sequences as S, su2
from rephasing import efficiency as eff
from rephasing.gamma import complex_gamma

EPSILONS = (0.05, 0.1, 0.2, 0.3)
GRID = 256


def fixed(name, eps, phi2=0.0, reps=1):
    return eff.fixed_error_sequence(name, eps, phi2, reps)


def table_cell(name, eps, n_dephase=GRID, n_phase=GRID):
    return eff.eit_phase_averaged_bruteforce(fixed(name, eps), n_dephase=n_dephase, n_phase=n_phase).value


def prob(gate):
    return np.abs(gate[..., 0, 1]) ** 2


def test_1_closed_forms_match_bruteforce(criterion):
    start = time.perf_counter()
    misses, worst = [], 0.0
    for name in S.TABLE_NAMES:
        for eps in EPSILONS:
            diff = abs(eff.eit_closed_form(name, eps).value - table_cell(name, eps))
            worst = max(worst, diff)
            if not diff < 1e-3:
                misses.append(f"{name}@{eps} ({diff:.2e})")
    spots = {"CPMG": 0.6561, "XY4": 0.92910, "UR6": 0.99536, "UR8": 0.99933}
    spots_ok = all(abs(eff.eit_closed_form(n, 0.1).value - v) < 5e-6 for n, v in spots.items())
    elapsed = time.perf_counter() - start
    ok = not misses and spots_ok and elapsed < 60
    cells = len(S.TABLE_NAMES) * len(EPSILONS)
    detail = (f"{cells - len(misses)}/{cells} cells within 1e-3, max diff {worst:.2e}, "
              f"spot values {'ok' if spots_ok else 'off'}, {elapsed:.1f} s")
    if misses:
        detail += "; over tolerance: " + ", ".join(misses)
    assert criterion(1, "tabulated closed forms vs brute force", ok, detail)


def test_2_spin_echo_phase_law(criterion):
    start = time.perf_counter()
    phi0 = np.linspace(-np.pi, np.pi, 72, endpoint=False)
    seq = fixed("CPMG", 0.1)
    brute = eff.spin_echo_sweep(seq, eff.write_phase_to_xi(phi0), n_dephase=GRID)
    law = np.array([eff.spin_echo_cpmg_analytic(0.1, p, 0.0).value for p in phi0])
    worst = float(np.max(np.abs(brute - law)))
    extrema = [eff.spin_echo_cpmg_analytic(0.1, np.radians(d), 0.0).value for d in (90, -90, 0, 180)]
    extrema_err = max(abs(v - t) for v, t in zip(extrema, (0.99, 0.99, 0.63, 0.63)))
    elapsed = time.perf_counter() - start
    ok = worst < 1e-3 and extrema_err < 1e-12 and elapsed < 10
    detail = f"max |brute - law| {worst:.2e} over 72 phases, extrema error {extrema_err:.1e}, {elapsed:.1f} s"
    assert criterion(2, "spin-echo CPMG phase law", ok, detail)


def test_3_eit_flat_spin_echo_contrast(criterion):
    start = time.perf_counter()
    field = eff.eit_write()
    phi2 = np.linspace(0, 2 * np.pi, 37)
    eit = np.array([eff.eit_bruteforce(fixed("CPMG", 0.1, p), field, n_dephase=GRID).value for p in phi2])
    echo = np.array([eff.spin_echo_bruteforce(fixed("CPMG", 0.1, p), xi0=0.0, n_dephase=GRID).value for p in phi2])
    double = [eff.eit_bruteforce(fixed("CPMG", 0.1, p, 2), field, n_dephase=GRID).value for p in (np.pi / 2, 0.0)]
    gap = double[0] - double[1]
    elapsed = time.perf_counter() - start
    ok = np.var(eit) < 1e-6 and np.ptp(echo) >= 0.35 and abs(gap - 0.73063) < 1e-3 and elapsed < 30
    detail = (f"EIT variance {np.var(eit):.1e}, spin-echo peak-to-peak {np.ptp(echo):.5f}, "
              f"double CPMG 90-0 gap {gap:.5f}, {elapsed:.1f} s")
    assert criterion(3, "EIT flatness vs spin-echo contrast", ok, detail)


def test_4_hahn_echo_in_eit(criterion):
    start = time.perf_counter()
    field = eff.eit_write(0.25, 10 * np.pi)
    eps_grid = np.linspace(0, 0.3, 7)
    brute = max(eff.eit_bruteforce(fixed("Hahn", e), field, n_dephase=GRID).value for e in eps_grid)
    analytic = max(eff.eit_closed_form("Hahn", e).value for e in eps_grid)
    inversion = 0.0
    for e in (0.0, 0.3):
        out = eff.field_profile_after(fixed("Hahn", e), field, n_dephase=GRID)
        offset = out.phase + field.phase
        ref = np.angle(np.mean(np.exp(1j * offset)))
        inversion = max(inversion, float(np.max(np.abs(su2.wrap_phase(offset - ref)))))
    elapsed = time.perf_counter() - start
    ok = brute < 1e-3 and analytic == 0.0 and inversion < 1e-6 and elapsed < 10
    detail = f"max brute force {brute:.1e}, analytic {analytic}, phase inversion residual {inversion:.1e} rad, {elapsed:.1f} s"
    assert criterion(4, "Hahn echo in EIT", ok, detail)


def test_5_pulse_count_parity(criterion):
    start = time.perf_counter()
    field = eff.eit_write()
    perfect = []
    for n in range(1, 7):
        seq = S.SequenceSpec(tuple((eff.fixed_error_pulse(0.0), 0.0) for _ in range(n)), 1.0)
        perfect.append(eff.eit_bruteforce(seq, field, n_dephase=GRID).value)
    parity_err = max(abs(v - (n % 2 == 0)) for n, v in enumerate(perfect, 1))
    three = eff.eit_bruteforce(fixed("triple", 0.1), field, n_dephase=GRID).value
    elapsed = time.perf_counter() - start
    ok = parity_err < 1e-10 and abs(three - 0.104976) < 1e-3 and elapsed < 20
    detail = f"parity error {parity_err:.1e}, eta(3) at eps 0.1 = {three:.6f}, {elapsed:.1f} s"
    assert criterion(5, "odd/even pulse-count parity", ok, detail)


def test_6_spin_lock_asymptotics(criterion):
    start = time.perf_counter()
    seq = fixed("CPMG", 0.1, reps=50)
    good = eff.spin_echo_bruteforce(seq, xi0=0.0, n_dephase=GRID).value
    bad = eff.spin_echo_bruteforce(seq, xi0=np.pi / 2, n_dephase=GRID).value
    eit = eff.eit_bruteforce(seq, eff.eit_write(), n_dephase=GRID).value
    exact_good, exact_eit = eff.cpmg_spin_lock_limit(0.1)
    elapsed = time.perf_counter() - start
    ok = abs(good - 0.92929) < 1e-2 and abs(eit - 0.21589) < 1e-2 and bad < 0.05 and elapsed < 60
    detail = (f"N=50 good {good:.5f} (target 0.92929, exact limit {exact_good:.5f}), "
              f"EIT {eit:.5f} (target 0.21589, exact limit {exact_eit:.5f}), bad {bad:.4f} (limit 0.05), "
              f"{elapsed:.1f} s")
    assert criterion(6, "spin-lock asymptotics", ok, detail)


def test_7_pulse_models(criterion):
    start = time.perf_counter()
    rng = np.random.default_rng(7)
    n = 1000
    families = {
        "resonant": P.ResonantPulse(rng.uniform(0, 2 * np.pi, n)),
        "rectangular": P.RectangularPulse(rng.uniform(0, 8, n), rng.uniform(-6, 6, n), 1.0),
        "demkov-kunike": P.DemkovKunikePulse(rng.uniform(0.2, 6, n), rng.uniform(-6, 6, n),
                                             rng.uniform(-4, 4, n), 1.0),
    }
    dp, dgate, dangle = {}, {}, {}
    for name, spec in families.items():
        dt = 1 / 512 if name == "demkov-kunike" else None
        analytic, numeric = P.propagator(spec), P.propagator_numeric(spec, dt=dt)
        dp[name] = float(np.max(np.abs(prob(analytic) - prob(numeric))))
        # gates are compared up to the physically irrelevant global sign
        plus = np.max(np.abs(analytic - numeric), axis=(-2, -1))
        minus = np.max(np.abs(analytic + numeric), axis=(-2, -1))
        dgate[name] = float(np.max(np.minimum(plus, minus)))
        aligned = np.where((minus < plus)[..., None, None], -numeric, numeric)
        a, b = su2.extract_angles(analytic), su2.extract_angles(aligned)
        clear = (a.p > 1e-3) & (a.p < 1 - 1e-3)
        dangle[name] = float(np.max(np.abs(np.concatenate([su2.wrap_phase(a.alpha - b.alpha)[clear],
                                                           su2.wrap_phase(a.beta - b.beta)[clear]]))))
    rz_half = prob(P.propagator_demkov_kunike(1.0, 0.0, 0.0, 1.0))
    rz_one = prob(P.propagator_demkov_kunike(2.0, 0.0, 0.0, 1.0))
    rz_ok = abs(rz_half - 1) < 1e-6 and rz_one < 1e-6
    z = rng.uniform(-6, 6, 500) + 1j * rng.uniform(-6, 6, 500)
    recurrence = float(np.max(np.abs(complex_gamma(z + 1) / (z * complex_gamma(z)) - 1)))
    y = rng.uniform(-10, 10, 500)
    modulus = float(np.max(np.abs(np.abs(complex_gamma(0.5 + 1j * y)) ** 2 * np.cosh(np.pi * y) / np.pi - 1)))
    elapsed = time.perf_counter() - start
    ok = (max(dp.values()) < 1e-6 and max(dangle.values()) < 1e-5 and rz_ok and recurrence < 1e-10 and modulus < 1e-10 and elapsed < 120)
    detail = (", ".join(f"{k} |dp| {v:.1e} |dU| {dgate[k]:.1e} |d angle| {dangle[k]:.1e}" for k, v in dp.items())
              + f", Rosen-Zener {'ok' if rz_ok else 'off'}, Gamma recurrence {recurrence:.1e}, "
              f"critical line {modulus:.1e}, {elapsed:.1f} s")
    assert criterion(7, "pulse-model correctness", ok, detail)


DEFAULT_GRIDS = {"n_dephase": GRID, "n_phase": GRID, "z_nodes": 4096, "n_points": E.DEFAULT_PHYSICAL_POINTS}


def acceptance_numbers(n_dephase, n_phase, z_nodes, n_points):
    field = eff.eit_write(0.25, 10 * np.pi, 1.0, z_nodes)
    numbers = {f"table:{n}@{e}": table_cell(n, e, n_dephase, n_phase) for n in S.TABLE_NAMES for e in EPSILONS}
    xi = eff.write_phase_to_xi(np.radians([0.0, 45.0, 90.0]))
    for k, v in enumerate(eff.spin_echo_sweep(fixed("CPMG", 0.1), xi, n_dephase=n_dephase)):
        numbers[f"echo:{k}"] = v
    for label, seq in {"cpmg": fixed("CPMG", 0.1, 0.7), "double90": fixed("CPMG", 0.1, np.pi / 2, 2),
                       "hahn": fixed("Hahn", 0.2), "triple": fixed("triple", 0.1),
                       "lock": fixed("CPMG", 0.1, reps=50)}.items():
        numbers[f"eit:{label}"] = eff.eit_bruteforce(seq, field, n_dephase=n_dephase).value
    numbers["lock:good"] = eff.spin_echo_bruteforce(fixed("CPMG", 0.1, reps=50), xi0=0.0, n_dephase=n_dephase).value
    pulse = P.RectangularPulse(2 * np.pi * 156e3, 0.0, 3.2e-6)
    seq = S.named("CPMG", pulse=pulse, gap=296.8e-6)
    numbers["physical"] = eff.eit_phase_averaged_bruteforce(seq, E.default_grid(n_points), n_phase=n_phase).value
    return numbers


def test_8_numerical_hygiene(criterion, capsys):
    start = time.perf_counter()
    base = acceptance_numbers(**DEFAULT_GRIDS)
    worst = {}
    for axis, size in DEFAULT_GRIDS.items():
        doubled = acceptance_numbers(**{**DEFAULT_GRIDS, axis: 2 * size})
        worst[axis] = max(abs(doubled[k] - base[k]) for k in base)
    outputs = []
    for threads in (1, 4):
        cli.main(["table", "--regime=eit", "--table.epsilons=[0.1,0.3]", f"--threads={threads}"])
        cli.main(["sweep-count", "--regime=eit", "--count.max_pulses=6", f"--threads={threads}"])
        outputs.append(capsys.readouterr().out)
    same = outputs[0] == outputs[1]
    elapsed = time.perf_counter() - start
    ok = max(worst.values()) < 1e-6 and same
    detail = (", ".join(f"doubling {k} moves {len(base)} numbers by <= {v:.1e}" for k, v in worst.items())
              + f", thread-independent output {'yes' if same else 'no'}, {elapsed:.1f} s")
    with capsys.disabled():
        passed = criterion(8, "numerical hygiene", ok, detail)
    assert passed
