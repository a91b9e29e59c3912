"""A side peak between the main recurrences as the anisotropy grows.

Sweeping the laser power at L = L_T / 2, each molecule sees a phase
proportional to 1 - beta q. A spread in q smears the overall J2 shape; for
large beta the smearing is strong enough that an extra local maximum
appears. The mean polarizability is held fixed so that only the
orientation dependence changes between the curves.

    python demos/03_rotational_side_peak.py
"""

import math

import numpy as np

from kdtli.physics import CONSTANTS, LaserGratingSpec, MoleculeSpec, eikonal_phase
from kdtli.visibility import integral_curve

A3 = 4 * math.pi * CONSTANTS.epsilon0 * 1e-30
mass = 1030 * CONSTANTS.amu
I = mass * (3.5e-9) ** 2 / 12
las = LaserGratingSpec(power=1.0, wy=900e-6, wz=20e-6, wavelength=532e-9)
powers = np.linspace(0, 40, 2001)

curves = {}
for beta in (0.1, 0.5, 0.9):
    mol = MoleculeSpec.from_mean_polarizability(mass, 100.0, I, 0.0, 50 * A3, beta)
    phis = eikonal_phase(mol, las) * powers
    v = np.abs(integral_curve(phis, 0.5, 0.42, beta, mol.shape))
    inner = np.flatnonzero((v[1:-1] > v[:-2]) & (v[1:-1] > v[2:])) + 1
    curves[beta] = v
    print(f"beta = {beta}: {len(inner)} local maxima at P = "
          + ", ".join(f"{powers[i]:.1f}" for i in inner) + " W")

print("\n  P [W] " + "".join(f"  beta={b:<4}" for b in curves))
for i in range(0, len(powers), 80):
    print(f"  {powers[i]:5.1f} " + "".join(f"  {curves[b][i]:9.4f}" for b in curves))
