"""Standing-light-wave phase grating: potential, eikonal phases, kicks.

The Gaussian z-envelope is integrated analytically everywhere,
``int exp(-2 z^2 / w_z^2) dz = w_z sqrt(pi / 2)``, which is where the
``sqrt(2 pi)`` in the eikonal phase comes from. Angles follow the z-y'-z''
Euler convention with theta measured from the laser polarization; a
positive anisotropy (prolate polarizability) makes the potential deepest at
theta = 0 and the torque below points toward theta = 0 at an antinode.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError, NonHermitianError, TruncationWarning
from .physics import (CONSTANTS, LaserGratingSpec, MoleculeSpec, RotQuantumNumbers,
                      eikonal_phase, q_lmk)
from .rotor import RotorPhasePoint, hamiltonian, temporal_average_r

MAX_MATRIX_DIM = 101  # 2l + 1 for l = 50


def laser_intensity(x, z, las: LaserGratingSpec):
    """Cycle-averaged intensity of the retro-reflected Gaussian beam (W/m^2)."""
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    peak = 8.0 * las.power / (math.pi * las.wy * las.wz)
    return peak * np.exp(-2.0 * z**2 / las.wz**2) * np.sin(math.pi * x / las.period) ** 2


def grating_potential(x, z, theta, mol: MoleculeSpec, las: LaserGratingSpec):
    """Optical dipole potential of a polarizable symmetric top (J)."""
    c = CONSTANTS
    theta = np.asarray(theta, dtype=float)
    alpha = mol.alpha_par - mol.delta_alpha * np.sin(theta) ** 2
    return -laser_intensity(x, z, las) * alpha / (2.0 * c.epsilon0 * c.c)


@dataclass(frozen=True)
class PhaseMask:
    """Pure phase grating ``t(x) = exp(i a sin^2(pi x / d))``."""

    phase_amplitude: float
    period: float

    def __post_init__(self):
        if not self.period > 0:
            raise DomainError("mask period must be positive")
        if not math.isfinite(self.phase_amplitude):
            raise DomainError("phase amplitude must be finite")

    def transmission(self, x):
        x = np.asarray(x, dtype=float)
        return np.exp(1j * self.phase_amplitude * np.sin(math.pi * x / self.period) ** 2)


def phase_amplitude(q, mol: MoleculeSpec, las: LaserGratingSpec):
    """``phi0 (1 - (delta_alpha/alpha_par) q)`` for orientation average q."""
    return eikonal_phase(mol, las) * (1.0 - mol.anisotropy * np.asarray(q, dtype=float))


def free_rotor_phase(state: RotQuantumNumbers, mol: MoleculeSpec,
                     las: LaserGratingSpec) -> PhaseMask:
    """Mask seen by a rotor in |l m k> during a slow (rotation-averaged) transit."""
    l, m, k = state
    if mol.is_linear and k != 0:
        raise DomainError("a linear rotor has k = 0")
    return PhaseMask(float(phase_amplitude(q_lmk(l, m, k), mol, las)), las.period)


def diabatic_phase(x, theta, mol: MoleculeSpec, las: LaserGratingSpec):
    """Transmission factor for a transit with frozen orientation theta."""
    a = phase_amplitude(np.sin(np.asarray(theta, dtype=float)) ** 2, mol, las)
    return np.exp(1j * a * np.sin(math.pi * np.asarray(x, dtype=float) / las.period) ** 2)


# --------------------------------------------------------------------------
# general transmission matrices


@dataclass(frozen=True)
class PotentialMatrix:
    """z-integrated potential within one l-manifold, in units of hbar v_z."""

    entries: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.entries)
        if e.ndim != 2 or e.shape[0] != e.shape[1]:
            raise DomainError("potential matrix must be square")
        object.__setattr__(self, "entries", e)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def asymmetry(self) -> float:
        e = self.entries
        return float(np.max(np.abs(e - e.conj().T))) if e.size else 0.0


def laser_potential_matrix(l: int, k: int, x, mol: MoleculeSpec,
                           las: LaserGratingSpec) -> PotentialMatrix:
    """Laser potential on the (2l+1) m-sublevels of fixed (l, k).

    The orientation dependence is ``sin^2 theta``, whose matrix elements are
    diagonal in m and k inside one l-manifold.
    """
    m = np.arange(-l, l + 1)
    amp = phase_amplitude(q_lmk(l, m, k), mol, las)
    s2 = math.sin(math.pi * float(x) / las.period) ** 2
    return PotentialMatrix(np.diag(-amp * s2).astype(complex))


def transmission_matrix(vbar: PotentialMatrix, max_dim: int = MAX_MATRIX_DIM) -> np.ndarray:
    """``exp(-i vbar)`` for a Hermitian ``vbar`` via eigendecomposition."""
    if not isinstance(vbar, PotentialMatrix):
        vbar = PotentialMatrix(np.asarray(vbar))
    if vbar.dim > max_dim:
        raise DomainError(f"matrix dimension {vbar.dim} exceeds cap {max_dim}")
    e = vbar.entries.astype(complex)
    scale = max(1.0, float(np.max(np.abs(e)))) if e.size else 1.0
    asym = vbar.asymmetry()
    if asym > 1e-12 * scale:
        raise NonHermitianError(asym)
    h = 0.5 * (e + e.conj().T)
    vals, vecs = np.linalg.eigh(h)
    return (vecs * np.exp(-1j * vals)) @ vecs.conj().T


# --------------------------------------------------------------------------
# classical kicks


def _kick_scale(mol: MoleculeSpec, las: LaserGratingSpec) -> float:
    return math.pi * CONSTANTS.hbar * eikonal_phase(mol, las) / las.period


def classical_kick_free(x, e_rot, p_phi, p_psi, mol: MoleculeSpec, las: LaserGratingSpec):
    """Transverse momentum kick for a rotation-averaged transit (kg m/s)."""
    r = temporal_average_r(e_rot, p_phi, p_psi, mol)
    x = np.asarray(x, dtype=float)
    return (_kick_scale(mol, las) * (1.0 - mol.anisotropy * (1.0 - r))
            * np.sin(2.0 * math.pi * x / las.period))


def classical_kick_diabatic(x, theta, mol: MoleculeSpec, las: LaserGratingSpec):
    """Transverse momentum kick for a transit with frozen orientation."""
    s2 = np.sin(np.asarray(theta, dtype=float)) ** 2
    x = np.asarray(x, dtype=float)
    return (_kick_scale(mol, las) * (1.0 - mol.anisotropy * s2)
            * np.sin(2.0 * math.pi * x / las.period))


def classical_torque_diabatic(x, theta, mol: MoleculeSpec, las: LaserGratingSpec):
    """Kick of p_theta for a frozen-orientation transit (J s).

    ``-hbar phi0 (delta_alpha/alpha_par) sin(2 theta) sin^2(pi x / d)``;
    p_phi and p_psi receive nothing since the potential ignores phi and psi.
    """
    theta = np.asarray(theta, dtype=float)
    x = np.asarray(x, dtype=float)
    return (-CONSTANTS.hbar * eikonal_phase(mol, las) * mol.anisotropy
            * np.sin(2.0 * theta) * np.sin(math.pi * x / las.period) ** 2)


@dataclass(frozen=True)
class Ensemble:
    """Classical molecules: transverse position and momentum plus rotor state."""

    x: np.ndarray
    px: np.ndarray
    rotor: RotorPhasePoint

    def __post_init__(self):
        x = np.atleast_1d(np.asarray(self.x, dtype=float))
        if x.size == 0:
            raise DomainError("empty ensemble")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "px", np.atleast_1d(np.asarray(self.px, dtype=float)))

    def __len__(self):
        return self.x.size


def apply_classical_transform(ens: Ensemble, mode: str, mol: MoleculeSpec,
                              las: LaserGratingSpec) -> Ensemble:
    """Pass an ensemble through the grating in the eikonal approximation.

    ``mode="free"`` kicks p_x with the rotation-averaged force and leaves the
    rotor untouched; ``mode="diabatic"`` kicks p_x and p_theta at frozen
    orientation.
    """
    if mode == "free":
        e = hamiltonian(ens.rotor, mol)
        dp = classical_kick_free(ens.x, e, ens.rotor.p_phi, ens.rotor.p_psi, mol, las)
        return replace(ens, px=ens.px + dp)
    if mode == "diabatic":
        th = ens.rotor.theta
        dp = classical_kick_diabatic(ens.x, th, mol, las)
        dpt = classical_torque_diabatic(ens.x, th, mol, las)
        rot = replace(ens.rotor, p_theta=np.asarray(ens.rotor.p_theta, dtype=float) + dpt)
        return replace(ens, px=ens.px + dp, rotor=rot)
    raise DomainError(f"unknown transit mode {mode!r}")


# --------------------------------------------------------------------------
# diffraction orders


def diffraction_orders(mask: PhaseMask, n_max: int, warn_tol: float = 1e-8) -> np.ndarray:
    """Fourier coefficients c_n, n = -n_max..n_max, of the mask transmission.

    Sampled on a grid fine enough that the discrete transform is exact to
    rounding (the coefficients fall off like J_n(a/2) beyond n ~ |a|/2).
    """
    if n_max < 1:
        raise DomainError("n_max must be at least 1")
    a = mask.phase_amplitude
    need = max(2 * n_max + 1, int(2 * (abs(a) / 2 + 40)))
    size = 1 << max(6, (need - 1).bit_length())
    xs = np.arange(size) / size
    c = np.fft.fft(np.exp(1j * a * np.sin(math.pi * xs) ** 2)) / size
    n = np.arange(-n_max, n_max + 1)
    orders = c[n % size]
    lost = 1.0 - float(np.sum(np.abs(orders) ** 2))
    if lost > warn_tol:
        warnings.warn(f"diffraction orders truncated at n_max={n_max}: norm deficit {lost:.3g}",
                      TruncationWarning, stacklevel=2)
    return orders
