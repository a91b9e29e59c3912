import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import jv

from kdtli.errors import DomainError, TruncationError
from kdtli.grating import PhaseMask
from kdtli.physics import LMaxPolicy, RotEnsemble, power_for_phase, thermal_ensemble
from kdtli.talbot import (FringePattern, OrderSpaceState, extract_sinusoidal_visibility,
                          oracle_visibility, simulate_kdtli)
from kdtli.visibility import Mode, quantum_visibility_sum, slit_prefactor

from common import cold_temperature, setup

D = 266e-9
T_COLD = cold_temperature()
POLICY = LMaxPolicy(tail=1e-6)


def at_phase(s, phi0):
    return replace(s, las=replace(s.las, power=power_for_phase(phi0, s.mol, s.las)))


def ground_state():
    return RotEnsemble.single(0, 0, 0)


# --------------------------------------------------------------------------
# order-space state


def test_state_validation():
    with pytest.raises(DomainError):
        OrderSpaceState(np.ones(4), D)
    with pytest.raises(DomainError):
        OrderSpaceState(np.array([1.0, np.nan, 0.0]), D)


@given(st.floats(-8, 8), st.floats(0, 3))
def test_propagation_preserves_norm(a, z):
    s = OrderSpaceState.from_mask(PhaseMask(a, D), 24)
    p = s.propagate(z)
    assert abs(p.norm - s.norm) < 1e-13
    assert abs(s.norm - 1) < 1e-10


def test_talbot_self_imaging():
    s = OrderSpaceState.from_mask(PhaseMask(2.5, D), 16)
    x = np.linspace(0, D, 50)
    # a full Talbot length restores the intensity pattern
    assert np.allclose(s.propagate(1.0).intensity(x), s.intensity(x), atol=1e-12)
    # a pure phase mask has flat intensity right behind the grating
    assert np.allclose(s.intensity(x), 1.0, atol=1e-10)


@settings(max_examples=25)
@given(st.floats(0, 8), st.floats(0, 1))
def test_harmonics_reproduce_intensity(a, z):
    s = OrderSpaceState.from_mask(PhaseMask(a, D), 20).propagate(z)
    fh = s.intensity_harmonics()
    h = np.arange(-40, 41)
    x = np.linspace(0, D, 37)
    series = (np.exp(2j * math.pi * np.outer(x, h) / D) @ fh).real
    assert np.allclose(series, s.intensity(x), atol=1e-12)


# --------------------------------------------------------------------------
# fringe extraction


def pattern(values, n=64):
    x = np.arange(n) * D / n
    return FringePattern(x, values(x), 0.0, 0.0, D)


def test_extract_examples():
    assert extract_sinusoidal_visibility(pattern(lambda x: np.ones_like(x))) < 1e-15
    v = extract_sinusoidal_visibility(pattern(lambda x: 1 + np.cos(2 * math.pi * x / D)))
    assert v == pytest.approx(1.0, abs=1e-14)
    v = extract_sinusoidal_visibility(
        pattern(lambda x: 1 + 0.3 * np.cos(2 * math.pi * x / D + math.pi / 7)))
    assert v == pytest.approx(0.3, abs=1e-10)
    # higher harmonics do not leak into the first; 2 |S1| / S0 = 0.5 / 2
    v = extract_sinusoidal_visibility(
        pattern(lambda x: 2 + 0.5 * np.cos(2 * math.pi * x / D) + 0.7 * np.cos(6 * math.pi * x / D)))
    assert v == pytest.approx(0.25, abs=1e-14)


def test_extract_zero_mean():
    with pytest.raises(DomainError):
        extract_sinusoidal_visibility(pattern(lambda x: np.zeros_like(x)))


# --------------------------------------------------------------------------
# full simulation


def test_zero_power_no_fringes_at_half_talbot():
    s = setup(0.5, xi=0.5, power=0.0, T=T_COLD)
    pat = simulate_kdtli(s, ground_state())
    assert abs(pat.signed_visibility) < 1e-3
    assert quantum_visibility_sum(s).visibility == 0.0


def test_mean_signal_is_open_fraction_squared():
    s = at_phase(setup(0.0, xi=0.5, f=0.3), 4.0)
    pat = simulate_kdtli(s, ground_state())
    assert pat.mean == pytest.approx(0.3**2, rel=1e-6)


@pytest.mark.parametrize("xi", [0.2, 0.5, 0.7, 1.3])
@pytest.mark.parametrize("phi0", [0.0, 1.5, 4.0, 8.0])
def test_point_particle_matches_closed_form(xi, phi0):
    s = at_phase(setup(0.0, xi=xi, T=T_COLD), phi0)
    pat = simulate_kdtli(s, ground_state())
    ref = slit_prefactor(0.42) * jv(2, phi0 * math.sin(math.pi * xi))
    assert pat.signed_visibility == pytest.approx(ref, abs=1e-10)
    assert pat.sinusoidal_visibility == pytest.approx(abs(ref), abs=1e-10)


@pytest.mark.parametrize("ratio", [math.inf, 3.0])
@pytest.mark.parametrize("phi0", [2.0, 6.0])
def test_thermal_ensemble_matches_sum(ratio, phi0):
    s = at_phase(setup(0.9, ratio, T=T_COLD), phi0)
    ens = thermal_ensemble(s.mol, T_COLD, POLICY)
    pat = simulate_kdtli(s, ens)
    ref = quantum_visibility_sum(s, policy=POLICY).visibility
    assert pat.signed_visibility == pytest.approx(ref, abs=1e-9)


def test_slit_openings_reduce_signal():
    base = at_phase(setup(0.5, xi=0.5, T=T_COLD), 3.0)
    means = [simulate_kdtli(replace(base, ifm=replace(base.ifm, opening_fraction=f)),
                            ground_state()).mean for f in (0.2, 0.4, 0.6)]
    assert means[0] < means[1] < means[2]


def test_offsets_do_not_change_visibility():
    s = at_phase(setup(0.5, T=T_COLD, xi=0.4), 5.0)
    ens = thermal_ensemble(s.mol, T_COLD, POLICY)
    ref = simulate_kdtli(s, ens).signed_visibility
    for o1, o3 in [(0.1, 0.0), (0.0, 0.37), (0.25, 0.6)]:
        v = simulate_kdtli(s, ens, g1_offset=o1, g3_offset=o3).signed_visibility
        assert v == pytest.approx(ref, abs=1e-12)


def test_resolution_convergence():
    s = at_phase(setup(0.9, T=T_COLD), 7.0)
    ens = thermal_ensemble(s.mol, T_COLD, POLICY)
    a = simulate_kdtli(s, ens, n_max=24, n_sources=32, n_detector=32)
    b = simulate_kdtli(s, ens, n_max=32, n_sources=64, n_detector=64, n_shifts=32)
    assert a.signed_visibility == pytest.approx(b.signed_visibility, abs=1e-12)


def test_truncation_detected():
    s = at_phase(setup(0.5, T=T_COLD), 8.0)
    with pytest.raises(TruncationError):
        simulate_kdtli(s, ground_state(), n_max=4)


def test_input_validation():
    s = setup(0.5, T=T_COLD)
    with pytest.raises(DomainError):
        simulate_kdtli(s, ground_state(), n_sources=3)
    with pytest.raises(DomainError):
        simulate_kdtli(s, ground_state(), n_shifts=2)
    with pytest.raises(DomainError):
        simulate_kdtli(s, ground_state(), n_max=0)
    half = RotEnsemble(np.array([0]), np.array([0]), np.array([0]), np.array([0.5]))
    with pytest.raises(DomainError):
        simulate_kdtli(s, half)


def test_oracle_visibility_default_ensemble():
    s = at_phase(setup(0.5, T=T_COLD), 3.0)
    r = oracle_visibility(s)
    assert r.mode is Mode.ORACLE
    ref = quantum_visibility_sum(s, policy=POLICY).visibility
    assert r.visibility == pytest.approx(ref, abs=1e-9)
