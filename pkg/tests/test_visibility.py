import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from kdtli.errors import DomainError
from kdtli.physics import InterferometerSpec, power_for_phase
from kdtli.visibility import (Mode, Setup, SweepSpec, SweepVariable, bessel_j2,
                              classical_visibility, evaluate, fixed_q_curve, integral_curve,
                              params_hash, quantum_visibility_integral,
                              quantum_visibility_sum, run_sweep, slit_prefactor,
                              velocity_average, with_anisotropy, with_shape_ratio)

from common import ALPHA, cold_temperature, laser, molecule, setup


def j2_series(x, terms=30):
    # sum_k (-1)^k (x/2)^(2k+2) / (k! (k+2)!)
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for k in range(terms):
        out += (-1) ** k * (x / 2) ** (2 * k + 2) / (math.factorial(k) * math.factorial(k + 2))
    return out


# --------------------------------------------------------------------------
# Bessel function


def test_bessel_j2_values():
    assert bessel_j2(0.0) == 0.0
    assert bessel_j2(1.0) == pytest.approx(0.1149034849, abs=1e-10)
    x = np.linspace(-10, 10, 401)
    assert np.max(np.abs(bessel_j2(x) - j2_series(x))) < 1e-12
    x = np.concatenate([np.linspace(-50, 50, 20001), np.geomspace(1e-8, 1e-2, 50)])
    assert np.max(np.abs(bessel_j2(x) - special.jv(2, x))) < 1e-14


@given(st.floats(-50, 50))
def test_bessel_j2_even(x):
    assert bessel_j2(x) == bessel_j2(-x)


def test_slit_prefactor():
    assert slit_prefactor(0.5) == pytest.approx(2 * (math.sin(math.pi / 2) / (math.pi / 2)) ** 2)
    assert slit_prefactor(1e-12) == pytest.approx(2.0)


# --------------------------------------------------------------------------
# closed forms


def test_setup_checks_period():
    ifm = InterferometerSpec(period=300e-9, separation=0.01, opening_fraction=0.42,
                             temperature=600.0)
    with pytest.raises(DomainError):
        Setup(molecule(), laser(), ifm)


def test_zero_power_gives_zero():
    s = setup(0.5, 3.0, power=0.0)
    for mode in (Mode.QUANTUM_INTEGRAL, Mode.CLASSICAL):
        assert evaluate(s, mode).visibility == 0.0
    assert quantum_visibility_sum(s, T=cold_temperature()).visibility == 0.0


@pytest.mark.parametrize("ratio", [math.inf, 3.0, 0.6])
@pytest.mark.parametrize("xi", [0.3, 0.5, 0.8])
def test_point_particle_reduction(ratio, xi):
    s = setup(0.0, ratio, power=7.0, xi=xi, T=cold_temperature())
    phi0, pre = s.phi0, slit_prefactor(0.42)
    q_ref = pre * special.jv(2, phi0 * math.sin(math.pi * xi))
    c_ref = pre * special.jv(2, phi0 * math.pi * xi)
    assert abs(quantum_visibility_sum(s).visibility - q_ref) < 1e-12
    assert abs(quantum_visibility_integral(s).visibility - q_ref) < 1e-12
    assert abs(classical_visibility(s).visibility - c_ref) < 1e-12


@pytest.mark.parametrize("xi", [1.0, 2.0, 3.0])
def test_talbot_revival_nodes(xi):
    s = setup(0.7, 10.0, power=5.0, xi=xi)
    assert abs(quantum_visibility_integral(s).visibility) < 1e-14


def test_quantum_periodic_in_separation():
    for beta, ratio in [(0.5, math.inf), (0.9, 3.0)]:
        a = quantum_visibility_integral(setup(beta, ratio, power=6.0, xi=0.3)).visibility
        b = quantum_visibility_integral(setup(beta, ratio, power=6.0, xi=1.3)).visibility
        assert a == pytest.approx(b, abs=1e-12)


def test_sum_and_integral_agree_when_hot():
    # k_B T = 400 hbar^2 / I is already deep in the semiclassical regime
    s = setup(0.9, math.inf, power=4.0, T=cold_temperature(400.0))
    vs = quantum_visibility_sum(s).visibility
    vi = quantum_visibility_integral(s).visibility
    assert vs == pytest.approx(vi, rel=2e-3)


def test_integral_curve_matches_scalar():
    p = np.array([1.0, 5.0, 12.0])
    phis = np.array([setup(0.6, 3.0, power=w).phi0 for w in p])
    for classical in (False, True):
        curve = integral_curve(phis, 0.5, 0.42, 0.6, molecule(0.6, 3.0).shape,
                               classical=classical)
        fn = classical_visibility if classical else quantum_visibility_integral
        ref = [fn(setup(0.6, 3.0, power=w)).visibility for w in p]
        assert np.allclose(curve, ref, rtol=1e-13, atol=1e-15)


def test_fixed_q_curve():
    phi0 = np.linspace(0, 20, 11)
    v = fixed_q_curve(phi0, 0.5, 0.42, 0.9)
    assert np.allclose(v, slit_prefactor(0.42) * special.jv(2, phi0 * 0.4), atol=1e-15)


def test_evaluate_and_modes():
    s = setup(0.5, 3.0, power=3.0)
    assert Mode.parse("sum") is Mode.QUANTUM_SUM
    assert Mode.parse("integral") is Mode.QUANTUM_INTEGRAL
    assert Mode.parse("classical") is Mode.CLASSICAL
    with pytest.raises(DomainError):
        Mode.parse("bogus")
    r = evaluate(s, "integral")
    assert r.mode is Mode.QUANTUM_INTEGRAL and r.magnitude == abs(r.visibility)
    assert r.params_hash == quantum_visibility_integral(s).params_hash
    assert params_hash(s, 1) != params_hash(s, 2)


# --------------------------------------------------------------------------
# velocity averaging


def test_velocity_single_class_is_direct():
    s = setup(0.5, 3.0, power=4.0)
    avg = velocity_average(s, [(100.0, 2.5)], Mode.QUANTUM_INTEGRAL)
    assert avg.visibility == pytest.approx(quantum_visibility_integral(s).visibility, rel=1e-14)


def test_velocity_narrow_distribution_taylor_band():
    s = setup(0.5, 3.0, power=4.0)
    v0, dv = 100.0, 0.5

    def at(v):
        return quantum_visibility_integral(replace(s, mol=replace(s.mol, vz=v))).visibility

    avg = velocity_average(s, [(v0 - dv, 1.0), (v0 + dv, 1.0)], "integral").visibility
    # symmetric pair: the first-order terms cancel, the remainder is V'' dv^2 / 2
    h = 2.0
    second = (at(v0 + h) - 2 * at(v0) + at(v0 - h)) / h**2
    assert avg - at(v0) == pytest.approx(0.5 * second * dv**2, rel=0.05, abs=1e-10)


def test_velocity_validation():
    s = setup()
    for bad in ([], [(-1.0, 1.0)], [(100.0, -1.0)], [(100.0, 0.0)]):
        with pytest.raises(DomainError):
            velocity_average(s, bad, "integral")


# --------------------------------------------------------------------------
# sweeps


def test_anisotropy_constraints():
    mol = molecule(0.5)
    a = with_anisotropy(mol, 0.9, "alpha_par")
    assert a.alpha_par == mol.alpha_par and a.anisotropy == pytest.approx(0.9)
    b = with_anisotropy(molecule(0.5, mean=True), 0.9, "alpha_mean")
    assert b.alpha_mean == pytest.approx(ALPHA, rel=1e-14)
    assert b.anisotropy == pytest.approx(0.9, rel=1e-14)
    with pytest.raises(DomainError):
        with_anisotropy(mol, 0.9, "other")
    assert with_shape_ratio(mol, math.inf).is_linear
    assert with_shape_ratio(mol, 4.0).shape.ratio == pytest.approx(4.0)


def test_sweep_separation_nodes_and_periodicity():
    base = setup(0.7, 3.0, power=6.0)
    spec = SweepSpec(SweepVariable.SEPARATION_RATIO, [0.25, 1.0, 1.25, 2.0, 2.25, 3.0], base)
    t = run_sweep(spec, Mode.QUANTUM_INTEGRAL)
    v = t.signed()
    assert np.all(np.abs(v[[1, 3, 5]]) < 1e-14)
    assert v[2] == pytest.approx(v[0], abs=1e-12)
    assert v[4] == pytest.approx(v[0], abs=1e-12)
    assert np.array_equal(t.values(), [0.25, 1.0, 1.25, 2.0, 2.25, 3.0])
    assert np.array_equal(t.magnitude(), np.abs(v))


def test_sweep_variables_route_to_setup():
    base = setup(0.5, 3.0)
    assert SweepSpec("laser_power", [2.0], base).setup_at(2.0).las.power == 2.0
    assert SweepSpec("anisotropy", [0.2], base).setup_at(0.2).mol.anisotropy == pytest.approx(0.2)
    assert SweepSpec("shape_ratio", [5.0], base).setup_at(5.0).mol.shape.ratio == pytest.approx(5.0)
    assert SweepSpec("velocity", [150.0], base).setup_at(150.0).mol.vz == 150.0
    with pytest.raises(DomainError):
        SweepSpec("laser_power", [], base)


def test_sweep_records_point_failures():
    base = setup(0.5, 3.0)
    spec = SweepSpec(SweepVariable.ANISOTROPY, [0.2, 1.5, 0.4], base)
    t = run_sweep(spec, Mode.QUANTUM_INTEGRAL)
    assert [r.ok for r in t.rows] == [True, False, True]
    assert "DomainError" in t.rows[1].error
    assert math.isnan(t.signed()[1])


def test_sweep_custom_evaluator():
    base = setup(0.5, 3.0)
    spec = SweepSpec(SweepVariable.LASER_POWER, [1.0, 2.0], base)
    t = run_sweep(spec, Mode.CLASSICAL, evaluator=classical_visibility)
    ref = [classical_visibility(spec.setup_at(p)).visibility for p in (1.0, 2.0)]
    assert np.array_equal(t.signed(), ref)


@settings(max_examples=20)
@given(st.floats(0.0, 15.0), st.floats(0.0, 0.95), st.sampled_from([0.5, 1.0, 3.0, math.inf]))
def test_visibility_bounded(phi0, beta, ratio):
    mol = molecule(beta, ratio)
    s = replace(setup(beta, ratio), las=replace(laser(), power=power_for_phase(phi0, mol, laser())))
    # |J2| <= 0.4865 and the prefactor is 2 sinc^2
    bound = slit_prefactor(0.42) * 0.4865
    assert abs(quantum_visibility_integral(s).visibility) <= bound
    assert abs(classical_visibility(s).visibility) <= bound


def test_sum_shortcut_without_anisotropy():
    # beta = 0 skips the state loop; a vanishing beta must land on the same value
    T = cold_temperature()
    exact = quantum_visibility_sum(setup(0.0, 3.0, power=6.0, T=T)).visibility
    tiny = quantum_visibility_sum(setup(1e-14, 3.0, power=6.0, T=T)).visibility
    assert tiny == pytest.approx(exact, abs=1e-12)


def test_integral_curve_chunks_consistently():
    shape = molecule(0.7, 3.0).shape
    phis = np.linspace(0.0, 25.0, 150)
    whole = integral_curve(phis, 0.5, 0.42, 0.7, shape)
    for i in (0, 63, 64, 65, 149):
        one = integral_curve(phis[i:i + 1], 0.5, 0.42, 0.7, shape)
        assert one[0] == pytest.approx(whole[i], rel=1e-13, abs=1e-15)
