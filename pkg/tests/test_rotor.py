import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from kdtli.errors import DomainError, SingularOrientationError
from kdtli.physics import CONSTANTS
from kdtli.rotor import (RotorPhasePoint, hamiltonian, integrate_rotor, r_tilde,
                         relative_frequencies, rotation_period, temporal_average_r,
                         temporal_averages)
from kdtli.thermal import sample_phase_points

from common import I_ROD, molecule

P = math.sqrt(I_ROD * CONSTANTS.kB * 600.0)  # thermal momentum scale
SYM = molecule(ratio=3.0)
OBLATE = molecule(ratio=0.6)
LIN = molecule()


def point(theta=1.0, p_phi=0.0, p_theta=0.0, p_psi=0.0, phi=0.0, psi=0.0):
    return RotorPhasePoint(phi, theta, psi, p_phi, p_theta, p_psi)


@st.composite
def phase_points(draw, linear=False):
    theta = draw(st.floats(0.05, math.pi - 0.05))
    p_theta = draw(st.floats(-3, 3)) * P
    p_psi = 0.0 if linear else draw(st.floats(-3, 3)) * P
    p_phi = draw(st.floats(-3, 3)) * P
    if abs(p_theta) + abs(p_phi) + abs(p_psi) < 1e-3 * P:
        p_theta = P
    return point(theta, p_phi, p_theta, p_psi)


# --------------------------------------------------------------------------
# Hamiltonian


def test_hamiltonian_examples():
    assert hamiltonian(point(), SYM) == 0.0
    h = hamiltonian(point(theta=math.pi / 2, p_phi=P), SYM)
    assert h == pytest.approx(P**2 / (2 * I_ROD), rel=1e-14)
    # removable pole along p_phi = p_psi at theta = 0
    h0 = hamiltonian(point(theta=0.0, p_phi=P, p_psi=P, p_theta=0.5 * P), SYM)
    assert h0 == pytest.approx(P**2 / (2 * SYM.I3) + (0.5 * P) ** 2 / (2 * I_ROD), rel=1e-14)
    small = hamiltonian(point(theta=1e-7, p_phi=P, p_psi=P, p_theta=0.5 * P), SYM)
    assert small == pytest.approx(h0, rel=1e-6)


def test_hamiltonian_pole_rejected():
    with pytest.raises(SingularOrientationError):
        hamiltonian(point(theta=0.0, p_phi=P, p_psi=0.5 * P), SYM)


def test_linear_rotor_rejects_spin():
    with pytest.raises(DomainError):
        hamiltonian(point(p_psi=P), LIN)


@given(phase_points())
def test_hamiltonian_nonnegative(p):
    assert hamiltonian(p, SYM) >= 0.0
    assert hamiltonian(p, OBLATE) >= 0.0


# --------------------------------------------------------------------------
# period and averages


def test_rotation_period_examples():
    e = P**2 / I_ROD
    assert rotation_period(e, 0.0, SYM) == pytest.approx(math.pi * math.sqrt(2 * I_ROD / e), rel=1e-14)
    assert rotation_period(4 * e, 0.0, SYM) == pytest.approx(rotation_period(e, 0.0, SYM) / 2, rel=1e-14)
    sph = molecule(ratio=1.0)
    ref = 2 * math.pi * I_ROD / math.sqrt(2 * e * I_ROD)
    for p_psi in (0.0, 0.3 * P, P):
        assert rotation_period(e, p_psi, sph) == pytest.approx(ref, rel=1e-14)
    with pytest.raises(DomainError):
        rotation_period(0.0, 0.0, SYM)


def test_temporal_average_examples():
    e = P**2 / I_ROD
    assert temporal_average_r(e, 0.0, 0.0, SYM) == 0.5
    # planar rotation, cos(theta) identically 0
    assert temporal_average_r(P**2 / (2 * I_ROD), P, 0.0, SYM) == pytest.approx(0.0, abs=1e-15)


def test_temporal_average_domain():
    with pytest.raises(DomainError):
        temporal_average_r(-1.0, 0.0, 0.0, SYM)
    # |p_phi| larger than p_rot cannot come from a real trajectory
    with pytest.raises(DomainError):
        temporal_average_r(P**2 / (2 * I_ROD), 2 * P, 0.0, SYM)


def test_relative_frequency_examples():
    u1, u2 = relative_frequencies(point(p_theta=P), SYM)
    assert (u1, u2) == (0.0, 0.0)
    u1, u2 = relative_frequencies(point(theta=math.pi / 2, p_phi=P), SYM)
    assert u1 == pytest.approx(1.0, abs=1e-15) and u2 == 0.0
    u1, _ = relative_frequencies(point(theta=math.pi / 2, p_phi=-P), SYM)
    assert u1 == pytest.approx(-1.0, abs=1e-15)


def test_r_tilde_examples():
    assert r_tilde(0, 0) == 0.5
    assert r_tilde(1, 0) == 0.0
    assert r_tilde(1, 1) == 1.0
    assert r_tilde(0, 1) == 0.0


@given(st.floats(-1, 1), st.floats(-1, 1))
def test_r_tilde_range(u1, u2):
    assert 0.0 <= r_tilde(u1, u2) <= 1.0


@given(phase_points())
def test_r_tilde_matches_temporal_average(p):
    for mol in (SYM, OBLATE):
        e = hamiltonian(p, mol)
        u1, u2 = relative_frequencies(p, mol)
        assert abs(u1) <= 1 + 1e-12 and abs(u2) <= 1 + 1e-12
        r = temporal_average_r(e, p.p_phi, p.p_psi, mol)
        assert 0.0 <= r <= 1.0
        assert abs(r_tilde(u1, u2) - r) < 1e-12


@given(phase_points(linear=True))
def test_linear_rotor_average(p):
    ta = temporal_averages(p, LIN)
    assert ta.u2 == 0.0
    assert ta.r_avg == pytest.approx(0.5 * (1 - ta.u1**2), abs=1e-12)
    assert ta.tau_rot > 0


def test_relative_frequencies_bounded_on_thermal_points():
    rng = np.random.default_rng(7)
    for mol in (SYM, OBLATE, molecule(ratio=0.5), LIN):
        p = sample_phase_points(1_000_000, 600.0, mol, rng)
        u1, u2 = relative_frequencies(p, mol)
        assert np.max(np.abs(u1)) <= 1.0 + 1e-12
        assert np.max(np.abs(u2)) <= 1.0 + 1e-12


# --------------------------------------------------------------------------
# direct integration


def pole_clearance(p):
    """Closest approach of the symmetry axis to either pole along the free orbit.

    The axis keeps a fixed angle gamma to L, and L has polar angle theta_L.
    """
    s, c = math.sin(p.theta), math.cos(p.theta)
    L = math.sqrt(p.p_theta**2 + ((p.p_phi - p.p_psi * c) / s) ** 2 + p.p_psi**2)
    theta_L = math.acos(max(-1.0, min(1.0, p.p_phi / L)))
    gamma = math.acos(max(-1.0, min(1.0, p.p_psi / L)))
    return min(abs(theta_L - gamma), abs(math.pi - theta_L - gamma))


@settings(max_examples=15)
@given(phase_points())
def test_ode_matches_closed_form(p):
    # Euler-angle equations are stiff on orbits grazing the pole (dphi/dt ~ 1/sin^2)
    assume(pole_clearance(p) > 1e-3)
    mol = SYM
    traj = integrate_rotor(p, mol, periods=1.0)
    mean_cos2 = traj.cos2_integral[-1] / traj.tau_rot
    e = hamiltonian(p, mol)
    assert mean_cos2 == pytest.approx(temporal_average_r(e, p.p_phi, p.p_psi, mol), abs=1e-6)
    # the nutation returns after one period; compare cos theta, since orbits
    # through the pole come back as (-theta, phi + pi), the same orientation
    assert abs(math.cos(traj.theta[-1]) - math.cos(traj.theta[0])) < 1e-6
    h = traj.energies(mol)
    assert np.max(np.abs(h / h[0] - 1)) < 1e-8


def test_ode_oblate_and_conserved_momenta():
    p = point(theta=0.8, p_phi=0.7 * P, p_theta=-0.4 * P, p_psi=1.1 * P)
    traj = integrate_rotor(p, OBLATE, periods=3.0)
    assert np.all(traj.p_phi == traj.p_phi[0])
    assert np.all(traj.p_psi == traj.p_psi[0])
    avg = traj.cos2_integral[-1] / (3 * traj.tau_rot)
    assert avg == pytest.approx(temporal_averages(p, OBLATE).r_avg, abs=1e-7)
