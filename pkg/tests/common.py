"""Parameter sets shared by the tests."""

import math

from kdtli.physics import CONSTANTS, InterferometerSpec, LaserGratingSpec, MoleculeSpec
from kdtli.visibility import Setup

AMU = CONSTANTS.amu
A3 = 4.0 * math.pi * CONSTANTS.epsilon0 * 1e-30
MASS = 1030 * AMU
LENGTH = 3.5e-9
I_ROD = MASS * LENGTH**2 / 12.0
ALPHA = 50 * A3


def molecule(anisotropy=0.5, ratio=math.inf, vz=100.0, alpha=ALPHA, mean=False):
    I3 = 0.0 if math.isinf(ratio) else I_ROD / ratio
    if mean:
        return MoleculeSpec.from_mean_polarizability(MASS, vz, I_ROD, I3, alpha, anisotropy)
    return MoleculeSpec(MASS, vz, I_ROD, I3, alpha, anisotropy * alpha)


def laser(power=1.0):
    return LaserGratingSpec(power=power, wy=900e-6, wz=20e-6, wavelength=532e-9)


def setup(anisotropy=0.5, ratio=math.inf, power=1.0, xi=0.5, f=0.42, T=600.0, **kw):
    ifm = InterferometerSpec(period=266e-9, separation=1.0, opening_fraction=f, temperature=T)
    return Setup(molecule(anisotropy, ratio, **kw), laser(power), ifm).with_separation_ratio(xi)


def cold_temperature(ratio_kT=40.0):
    """Temperature with k_B T = ratio_kT * hbar^2 / I for the rod."""
    return ratio_kT * CONSTANTS.hbar**2 / (I_ROD * CONSTANTS.kB)


# one line per acceptance criterion, printed again in the terminal summary
ACCEPTANCE_LINES = []
