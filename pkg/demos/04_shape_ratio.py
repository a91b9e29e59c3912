"""What the shape of the top does to the power sweep.

A very prolate top (I/I3 = 1e6) behaves like a linear rotor. Toward the
spherical top one might expect the q-distribution to collapse onto 2/3,
which would make the curve approach the fixed-q one. The spread of q
says otherwise: it is smallest near I/I3 = 3 and returns to 2/15 at
I/I3 = 1, so the distance to the fixed-q curve is not monotone.

    python demos/04_shape_ratio.py
"""

import math

import numpy as np

from kdtli.physics import CONSTANTS, LaserGratingSpec, MoleculeSpec, ShapeRatio, eikonal_phase
from kdtli.thermal import expectation_over_pth
from kdtli.visibility import fixed_q_curve, integral_curve

A3 = 4 * math.pi * CONSTANTS.epsilon0 * 1e-30
mass = 1030 * CONSTANTS.amu
I = mass * (3.5e-9) ** 2 / 12
las = LaserGratingSpec(power=1.0, wy=900e-6, wz=20e-6, wavelength=532e-9)
beta = 0.9
powers = np.linspace(0, 40, 401)


def curve(ratio):
    I3 = 0.0 if math.isinf(ratio) else I / ratio
    mol = MoleculeSpec.from_mean_polarizability(mass, 100.0, I, I3, 50 * A3, beta)
    phis = eikonal_phase(mol, las) * powers
    return np.abs(integral_curve(phis, 0.5, 0.42, beta, mol.shape)), phis


linear, phis = curve(math.inf)
fixed = np.abs(fixed_q_curve(phis, 0.5, 0.42, beta))
print(f"sup |V(1e6) - V(linear)| = {np.max(np.abs(curve(1e6)[0] - linear)):.2e}")

print("\n  I/I3    std(q)   sup |V - V(q=2/3)|")
for r in (10.0, 3.0, 1.5, 1.1, 1.0):
    m = expectation_over_pth(lambda x: x, ShapeRatio(r))
    sd = math.sqrt(expectation_over_pth(lambda x: x * x, ShapeRatio(r)) - m * m)
    print(f"  {r:5.1f}   {sd:.4f}   {np.max(np.abs(curve(r)[0] - fixed)):.4f}")
