"""Classical free symmetric top: Hamiltonian, theta period, time averages.

Euler angles follow the z-y'-z'' convention with theta measured from the
laser polarization. All functions broadcast over numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DomainError, SingularOrientationError
from .physics import MoleculeSpec

# relative slack when checking |p_phi|, |p_psi| <= p_rot
_REACH_SLACK = 1e-9


@dataclass(frozen=True)
class RotorPhasePoint:
    phi: float
    theta: float
    psi: float
    p_phi: float
    p_theta: float
    p_psi: float


@dataclass(frozen=True)
class TemporalAverages:
    e_rot: float
    tau_rot: float
    r_avg: float
    u1: float
    u2: float


def _psi_energy(p_psi, mol: MoleculeSpec):
    p_psi = np.asarray(p_psi, dtype=float)
    if mol.is_linear:
        if np.any(p_psi != 0):
            raise DomainError("a linear rotor cannot carry p_psi != 0")
        return np.zeros_like(p_psi)
    return p_psi**2 / (2.0 * mol.I3)


def _radicand(e_rot, p_psi, mol: MoleculeSpec):
    """``2 E I + p_psi^2 (1 - I/I3)``, the squared rotational momentum scale."""
    e_rot = np.asarray(e_rot, dtype=float)
    p_psi = np.asarray(p_psi, dtype=float)
    if mol.is_linear:
        if np.any(p_psi != 0):
            raise DomainError("a linear rotor cannot carry p_psi != 0")
        return 2.0 * e_rot * mol.I
    return 2.0 * e_rot * mol.I + p_psi**2 * (1.0 - mol.I / mol.I3)


def _scalar(x):
    x = np.asarray(x)
    return x[()] if x.ndim == 0 else x


def hamiltonian(p: RotorPhasePoint, mol: MoleculeSpec):
    """Free symmetric-top Hamilton function in J.

    At ``sin(theta) = 0`` the first term is a removable singularity only if
    ``p_phi - p_psi cos(theta) = 0``; it is then taken as 0.
    """
    s = np.sin(np.asarray(p.theta, dtype=float))
    c = np.cos(np.asarray(p.theta, dtype=float))
    a = np.asarray(p.p_phi, dtype=float) - np.asarray(p.p_psi, dtype=float) * c
    pole = s == 0
    if np.any(pole & (a != 0)):
        raise SingularOrientationError("sin(theta) = 0 with p_phi != p_psi cos(theta)")
    with np.errstate(divide="ignore", invalid="ignore"):
        ang = np.where(pole, 0.0, a * a / np.where(pole, 1.0, s * s))
    h = (ang + np.asarray(p.p_theta, dtype=float) ** 2) / (2.0 * mol.I)
    return _scalar(h + _psi_energy(p.p_psi, mol))


def rotation_period(e_rot, p_psi, mol: MoleculeSpec):
    """Period of the theta motion, ``2 pi I / sqrt(2 E I + p_psi^2 (1 - I/I3))``."""
    d = _radicand(e_rot, p_psi, mol)
    if np.any(d <= 0):
        raise DomainError("rotation period undefined: radicand <= 0")
    return _scalar(2.0 * math.pi * mol.I / np.sqrt(d))


def temporal_average_r(e_rot, p_phi, p_psi, mol: MoleculeSpec):
    """Time average of cos^2(theta) over one theta period.

    Accepts only reachable invariants: positive radicand ``D`` and
    ``|p_phi|, |p_psi| <= sqrt(D)``.
    """
    d = _radicand(e_rot, p_psi, mol)
    if np.any(d <= 0):
        raise DomainError("temporal average undefined: radicand <= 0")
    p_phi = np.asarray(p_phi, dtype=float)
    p_psi = np.asarray(p_psi, dtype=float)
    lim = d * (1.0 + _REACH_SLACK)
    if np.any(p_phi**2 > lim) or np.any(p_psi**2 > lim):
        raise DomainError("unreachable invariants: |p_phi| or |p_psi| exceeds p_rot")
    r = 0.5 - 0.5 * (p_phi**2 + p_psi**2) / d + 1.5 * (p_phi * p_psi / d) ** 2
    return _scalar(np.clip(r, 0.0, 1.0))


def relative_frequencies(p: RotorPhasePoint, mol: MoleculeSpec):
    """``(u1, u2) = (p_phi, p_psi) * tau_rot / (2 pi I)``."""
    e = hamiltonian(p, mol)
    p_rot = np.sqrt(_radicand(e, p.p_psi, mol))
    if np.any(p_rot <= 0):
        raise DomainError("relative frequencies undefined for a rotor at rest")
    u1 = np.asarray(p.p_phi, dtype=float) / p_rot
    u2 = np.asarray(p.p_psi, dtype=float) / p_rot
    return _scalar(u1), _scalar(u2)


def r_tilde(u1, u2):
    """Time average of cos^2(theta) in terms of the relative frequencies."""
    u1 = np.asarray(u1, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    return _scalar(0.5 - 0.5 * (u1**2 + u2**2) + 1.5 * u1**2 * u2**2)


def temporal_averages(p: RotorPhasePoint, mol: MoleculeSpec) -> TemporalAverages:
    e = hamiltonian(p, mol)
    u1, u2 = relative_frequencies(p, mol)
    return TemporalAverages(
        e_rot=float(e),
        tau_rot=float(rotation_period(e, p.p_psi, mol)),
        r_avg=float(temporal_average_r(e, p.p_phi, p.p_psi, mol)),
        u1=float(u1),
        u2=float(u2),
    )


# --------------------------------------------------------------------------
# Direct integration of Hamilton's equations (reference solution)


@dataclass
class Trajectory:
    """Dense solution of Hamilton's equations in SI units.

    ``cos2_integral`` is the running integral of cos^2(theta) dt, evaluated
    alongside the state so that time averages do not depend on interpolation.
    """

    t: np.ndarray
    phi: np.ndarray
    theta: np.ndarray
    psi: np.ndarray
    p_phi: np.ndarray
    p_theta: np.ndarray
    p_psi: np.ndarray
    cos2_integral: np.ndarray
    tau_rot: float

    def energies(self, mol: MoleculeSpec) -> np.ndarray:
        return np.asarray(hamiltonian(
            RotorPhasePoint(self.phi, self.theta, self.psi,
                            self.p_phi, self.p_theta, self.p_psi), mol))


def integrate_rotor(p0: RotorPhasePoint, mol: MoleculeSpec, periods: float = 1.0,
                    samples_per_period: int = 64, rtol: float = 1e-12) -> Trajectory:
    """Integrate the free-top equations of motion with DOP853.

    Time is scaled by ``tau_rot`` and momenta by ``p_rot`` internally, so
    tolerances are dimensionless.
    """
    e = float(hamiltonian(p0, mol))
    tau = float(rotation_period(e, p0.p_psi, mol))
    p_rot = 2.0 * math.pi * mol.I / tau
    ratio = 0.0 if mol.is_linear else mol.I / mol.I3
    two_pi = 2.0 * math.pi

    def rhs(_t, y):
        phi, th, psi, pf, pt, pp, _acc = y
        s, c = math.sin(th), math.cos(th)
        a = pf - pp * c
        dphi = two_pi * a / (s * s)
        dpsi = two_pi * (-a * c / (s * s) + ratio * pp)
        dth = two_pi * pt
        dpt = two_pi * (a * a * c / (s**3) - a * pp / s)
        return [dphi, dth, dpsi, 0.0, dpt, 0.0, c * c]

    y0 = [p0.phi, p0.theta, p0.psi, p0.p_phi / p_rot, p0.p_theta / p_rot,
          p0.p_psi / p_rot, 0.0]
    n = int(round(periods * samples_per_period)) + 1
    t_eval = np.linspace(0.0, periods, n)
    sol = solve_ivp(rhs, (0.0, periods), y0, method="DOP853", t_eval=t_eval,
                    rtol=rtol, atol=rtol * 1e-2)
    if not sol.success:
        raise RuntimeError(f"rotor integration failed: {sol.message}")
    y = sol.y
    return Trajectory(t=sol.t * tau, phi=y[0], theta=y[1], psi=y[2],
                      p_phi=y[3] * p_rot, p_theta=y[4] * p_rot, p_psi=y[5] * p_rot,
                      cos2_integral=y[6] * tau, tau_rot=tau)
