"""Shadow fringes fade with distance; quantum fringes come back.

For point particles both pictures give 2 sinc^2(pi f) J2(...), but the
classical argument grows linearly with L/L_T while the quantum one is
periodic. The classical envelope therefore decays like sqrt(L_T / L).

    python demos/02_classical_vs_quantum.py
"""

import math
from dataclasses import replace

import numpy as np

from kdtli.physics import CONSTANTS, InterferometerSpec, LaserGratingSpec, MoleculeSpec, power_for_phase
from kdtli.visibility import Setup, classical_visibility, quantum_visibility_integral

A3 = 4 * math.pi * CONSTANTS.epsilon0 * 1e-30
mass = 1030 * CONSTANTS.amu
I = mass * (3.5e-9) ** 2 / 12
mol = MoleculeSpec(mass, 100.0, I, I / 3.0, 50 * A3, 25 * A3)
las = LaserGratingSpec(power=1.0, wy=900e-6, wz=20e-6, wavelength=532e-9)
ifm = InterferometerSpec(period=266e-9, separation=1.0, opening_fraction=0.42, temperature=600.0)
base = Setup(mol, las, ifm)
base = replace(base, las=replace(las, power=power_for_phase(6.0, mol, las)))
print(f"laser power for phi0 = 6: {base.las.power:.3f} W")

print("\n  L/L_T   quantum   classical")
for xi in np.arange(0.1, 3.01, 0.1):
    s = base.with_separation_ratio(float(xi))
    vq = quantum_visibility_integral(s).visibility
    vc = classical_visibility(s).visibility
    print(f"  {xi:5.2f}  {vq:8.4f}  {vc:9.4f}")
