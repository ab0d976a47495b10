"""Light-storage efficiency of the catalogued sequences: closed form vs brute force."""
from rephasing import efficiency as eff, sequences as S

EPSILONS = (0.05, 0.1, 0.2, 0.3)

print(f"{'sequence':>8} " + " ".join(f"{'eps=' + str(e):>22}" for e in EPSILONS))
for name in S.TABLE_NAMES:
    cells = []
    for eps in EPSILONS:
        closed = eff.eit_closed_form(name, eps).value
        brute = eff.eit_phase_averaged_bruteforce(eff.fixed_error_sequence(name, eps)).value
        cells.append(f"{closed:.5f} ({brute - closed:+.0e})")
    print(f"{name:>8} " + " ".join(f"{c:>22}" for c in cells))

print("\nThe U5a2 and KDD2 closed forms are fifth-order truncations; exact polynomials:")
for name in ("U5a2", "KDD2"):
    exact = [eff.eit_closed_form(name, e, exact=True).value for e in EPSILONS]
    print(f"{name:>8} " + " ".join(f"{v:22.5f}" for v in exact))
