"""Brute-force check of the closed-form visibility.

The oracle follows each rotor state's diffraction orders through the
three-grating setup, scans the third grating and reads off the first
Fourier harmonic of the count rate. A cold beam keeps the state list
short enough for a quick run.

    python demos/05_three_grating_oracle.py
"""

import math
from dataclasses import replace

from kdtli.physics import (CONSTANTS, InterferometerSpec, LaserGratingSpec, LMaxPolicy,
                           MoleculeSpec, power_for_phase, thermal_ensemble)
from kdtli.talbot import simulate_kdtli
from kdtli.visibility import Setup, quantum_visibility_sum

A3 = 4 * math.pi * CONSTANTS.epsilon0 * 1e-30
mass = 1030 * CONSTANTS.amu
I = mass * (3.5e-9) ** 2 / 12
T = 40 * CONSTANTS.hbar**2 / (I * CONSTANTS.kB)   # k_B T = 40 hbar^2 / I
policy = LMaxPolicy(tail=1e-6)
las = LaserGratingSpec(power=1.0, wy=900e-6, wz=20e-6, wavelength=532e-9)
ifm = InterferometerSpec(period=266e-9, separation=1.0, opening_fraction=0.42, temperature=T)

print(f"beam temperature {T * 1e3:.3f} mK")
print("  beta  phi0   simulated   closed form")
for beta in (0.0, 0.9):
    mol = MoleculeSpec(mass, 100.0, I, I / 3.0, 50 * A3, beta * 50 * A3)
    ens = thermal_ensemble(mol, T, policy)
    for phi0 in (1.0, 4.0, 7.0):
        s = Setup(mol, replace(las, power=power_for_phase(phi0, mol, las)), ifm)
        s = s.with_separation_ratio(0.5)
        sim = simulate_kdtli(s, ens)
        ref = quantum_visibility_sum(s, policy=policy).visibility
        print(f"  {beta:4.1f}  {phi0:4.1f}  {sim.signed_visibility:10.6f}  {ref:10.6f}")
print(f"({len(ens.weight)} rotor states in the ensemble)")
