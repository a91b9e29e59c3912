"""How the rotation-averaged orientation q is distributed in a thermal beam.

Every free rotor sweeps its axis over a cone, so what the grating sees is
q = <sin^2 theta> averaged over one rotation. This script tabulates the
thermal density of q for a few shape ratios, then checks it against a
Monte Carlo draw of phase points.

    python demos/01_orientation_distribution.py
"""

import math

import numpy as np

from kdtli.physics import CONSTANTS, MoleculeSpec, ShapeRatio
from kdtli.thermal import cumulative_table, expectation_over_pth, ks_distance, p_th, sample_thermal

RATIOS = [0.5, 1.0, 10.0, math.inf]

q = np.array([0.2, 0.4, 0.49, 0.51, 0.6, 0.66, 0.67, 0.8, 0.95])
print("density of q")
print("   q    " + "".join(f"{str(ShapeRatio(r)):>10}" for r in RATIOS))
for qi in q:
    row = "".join(f"{float(p_th(qi, r)):10.4f}" for r in RATIOS)
    print(f"  {qi:5.2f} {row}")

# the jump at 1/2 and the slow log growth near 2/3
k = ShapeRatio(10.0)
print("\njump at q = 1/2 for I/I3 = 10:",
      f"{float(p_th(0.5 + 1e-9, k) - p_th(0.5 - 1e-9, k)):.4f}")
for h in (1e-2, 1e-4, 1e-6, 1e-8):
    print(f"  p(2/3 + {h:.0e}) = {float(p_th(2 / 3 + h, k)):.3f}")

print("\nmean and spread of q (isotropy fixes the mean at 2/3)")
for r in RATIOS + [3.0, 1e6]:
    m = expectation_over_pth(lambda x: x, ShapeRatio(r))
    v = expectation_over_pth(lambda x: x * x, ShapeRatio(r)) - m * m
    print(f"  I/I3 = {str(ShapeRatio(r)):>8}:  E[q] = {m:.12f}  std = {math.sqrt(v):.4f}")

# Monte Carlo over Boltzmann phase points; the temperature drops out
mass, length = 1030 * CONSTANTS.amu, 3.5e-9
I = mass * length**2 / 12
print("\nMonte Carlo (2e5 samples) vs tabulated CDF, KS distance")
for r in RATIOS:
    I3 = 0.0 if math.isinf(r) else I / r
    mol = MoleculeSpec(mass, 100.0, I, I3, 1e-39, 0.0)
    s = sample_thermal(200_000, 600.0, mol, seed=1)
    print(f"  I/I3 = {str(ShapeRatio(r)):>5}:  KS = {ks_distance(s, cumulative_table(r)):.4f}")
