"""Ensemble-averaged Bloch vectors after ten phase-0 pulses (spin locking)."""
import numpy as np

from rephasing import cli

config = cli.load_config("configs/fig6_inset.cfg")
ring, _, _, vectors = cli.bloch_ensemble(config)
start, end = vectors[0].mean(axis=1), vectors[-1].mean(axis=1)
print(" ring   start (x, y, z)        end (x, y, z)          angle to x axis")
for r, a, b in zip(np.degrees(ring), start, end):
    angle = np.degrees(np.arccos(abs(b[0]) / np.linalg.norm(b)))
    print(f"{r:5.0f}  {np.array2string(a, precision=3):>20}  {np.array2string(b, precision=3):>22}  {angle:6.1f}")
