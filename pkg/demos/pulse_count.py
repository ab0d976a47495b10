"""Efficiency vs number of pulses at fixed storage time, and the spin-lock limit."""
import numpy as np

from rephasing import efficiency as eff, sequences as S

field = eff.eit_write()
print("  n  perfect pulses  eps=0.1")
for n in range(1, 9):
    perfect = S.SequenceSpec(tuple((S.PERFECT_PI, 0.0) for _ in range(n)), 1.0)
    flawed = S.SequenceSpec(tuple((eff.fixed_error_pulse(0.1), 0.0) for _ in range(n)), 1.0)
    print(f"{n:3d}  {eff.eit_bruteforce(perfect, field).value:14.6f}  {eff.eit_bruteforce(flawed, field).value:7.5f}")

good, eit = eff.cpmg_spin_lock_limit(0.1)
print(f"\nrepeated CPMG at eps=0.1, exact limits: spin echo {good:.5f}, EIT {eit:.5f}")
print(f"first-order forms: spin echo {eff.spin_echo_cpmg_repeated_asymptotic(0.1, 0.0).value:.5f}, "
      f"EIT {eff.eit_closed_form('CPMG', 0.1, repetitions=np.inf).value:.5f}")
print("  N  good phase  bad phase  EIT")
for reps in (1, 5, 20, 50, 200):
    seq = eff.fixed_error_sequence("CPMG", 0.1, repetitions=reps)
    good_n = eff.spin_echo_bruteforce(seq, xi0=0.0, n_dephase=1024).value
    bad_n = eff.spin_echo_bruteforce(seq, xi0=np.pi / 2, n_dephase=1024).value
    eit_n = eff.eit_bruteforce(seq, field, n_dephase=1024).value
    print(f"{reps:3d}  {good_n:10.5f}  {bad_n:9.5f}  {eit_n:.5f}")
