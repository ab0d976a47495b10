"""Coherence along the medium after a Hahn echo and after CPMG."""
import numpy as np

from rephasing import efficiency as eff

field = eff.eit_write(0.25, 10 * np.pi, 1.0, 4096)
hahn = eff.field_profile_after(eff.fixed_error_sequence("Hahn", 0.3), field)
cpmg = eff.field_profile_after(eff.fixed_error_sequence("CPMG", 0.3), field)

slope = np.polyfit(field.z_nodes, np.unwrap(hahn.phase), 1)[0]
print(f"written phase slope {-field.delta_k:+.4f}, after Hahn {slope:+.4f} (inverted)")
print(f"Hahn efficiency {eff.eit_efficiency_general(hahn, field).value:.2e}")

ratio = cpmg.magnitude / field.magnitude
print("\nCPMG magnitude ratio over one turn of the written phase:")
for k in range(0, 410, 41):
    xi = np.mod(field.phase[k], 2 * np.pi)
    print(f"  xi = {np.degrees(xi):6.1f} deg  |rho12| ratio {ratio[k]:.4f}")
print(f"CPMG efficiency {eff.eit_efficiency_general(cpmg, field).value:.5f}")
