"""Spin-echo CPMG efficiency depends on the write phase; EIT storage does not."""
import numpy as np

from rephasing import efficiency as eff

eps = 0.1
seq = eff.fixed_error_sequence("CPMG", eps)
field = eff.eit_write()
print(" phi0  spin-echo(law)  spin-echo(brute)")
for deg in range(0, 181, 30):
    phi0 = np.radians(deg)
    law = eff.spin_echo_cpmg_analytic(eps, phi0, 0.0).value
    brute = eff.spin_echo_sweep(seq, eff.write_phase_to_xi(phi0))
    print(f"{deg:5d}  {law:14.6f}  {float(brute):16.6f}")

print("\n phi2  EIT single CPMG  EIT double CPMG")
for deg in range(0, 181, 30):
    phi2 = np.radians(deg)
    single = eff.eit_bruteforce(eff.fixed_error_sequence("CPMG", eps, phi2), field).value
    double = eff.eit_bruteforce(eff.fixed_error_sequence("CPMG", eps, phi2, 2), field).value
    print(f"{deg:5d}  {single:15.6f}  {double:15.6f}")
