"""Physical constants, parameter records and quantum symmetric-top algebra.

Everything is in SI units. Unit conversion (amu, cubic angstrom, nm, um)
happens only in :mod:`kdtli.config`.

A linear rotor is represented by ``I3 = 0`` (so that ``I / I3 = inf``); in
that limit only ``k = 0`` states are thermally accessible and ``p_psi``
vanishes identically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np
import scipy.constants as sc
from scipy import integrate

from .errors import DomainError, QuadratureError, TruncationError


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float
    epsilon0: float
    c: float
    kB: float
    amu: float

    def __post_init__(self):
        for name in ("hbar", "epsilon0", "c", "kB", "amu"):
            if not getattr(self, name) > 0:
                raise ValueError(f"constant {name} must be positive")


CONSTANTS = PhysicalConstants(
    hbar=sc.hbar,
    epsilon0=sc.epsilon_0,
    c=sc.c,
    kB=sc.k,
    amu=sc.physical_constants["atomic mass constant"][0],
)


@dataclass(frozen=True)
class ShapeRatio:
    """Moment-of-inertia ratio ``I / I3``; ``math.inf`` is the linear rotor."""

    ratio: float

    def __post_init__(self):
        if math.isnan(self.ratio) or self.ratio < 0.5:
            raise DomainError(f"shape ratio I/I3 must be >= 1/2, got {self.ratio}")

    @classmethod
    def linear(cls) -> "ShapeRatio":
        return cls(math.inf)

    @property
    def is_linear(self) -> bool:
        return math.isinf(self.ratio)

    def __str__(self):
        return "inf" if self.is_linear else f"{self.ratio:g}"


@dataclass(frozen=True)
class MoleculeSpec:
    """Symmetric-top molecule.

    Parameters
    ----------
    mass : float
        Mass in kg.
    vz : float
        Forward velocity in m/s.
    I : float
        Moment of inertia about the two equal axes, kg m^2.
    I3 : float
        Moment of inertia about the symmetry axis. ``0`` selects the linear
        rotor.
    alpha_par : float
        Polarizability along the symmetry axis, C m^2 / V.
    delta_alpha : float
        Anisotropy ``alpha_par - alpha_perp``.
    """

    mass: float
    vz: float
    I: float
    I3: float
    alpha_par: float
    delta_alpha: float = 0.0

    def __post_init__(self):
        for name in ("mass", "vz", "I", "alpha_par"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive, got {getattr(self, name)}")
        if self.I3 < 0:
            raise DomainError(f"I3 must be >= 0, got {self.I3}")
        if self.I3 > 0 and self.I / self.I3 < 0.5:
            raise DomainError(f"I/I3 = {self.I / self.I3:g} violates I/I3 >= 1/2")
        if abs(self.delta_alpha) > self.alpha_par:
            raise DomainError("|delta_alpha| must not exceed alpha_par")

    @classmethod
    def from_mean_polarizability(cls, mass, vz, I, I3, alpha_mean, anisotropy):
        """Build a molecule from the mean polarizability ``(a_par + 2 a_perp) / 3``.

        ``anisotropy`` is ``delta_alpha / alpha_par``; the mean is
        ``alpha_par * (1 - 2 anisotropy / 3)``.
        """
        alpha_par = alpha_mean / (1.0 - 2.0 * anisotropy / 3.0)
        return cls(mass, vz, I, I3, alpha_par, anisotropy * alpha_par)

    @property
    def is_linear(self) -> bool:
        return self.I3 == 0

    @property
    def shape(self) -> ShapeRatio:
        return ShapeRatio.linear() if self.is_linear else ShapeRatio(self.I / self.I3)

    @property
    def anisotropy(self) -> float:
        return self.delta_alpha / self.alpha_par

    @property
    def alpha_mean(self) -> float:
        return self.alpha_par - 2.0 * self.delta_alpha / 3.0


@dataclass(frozen=True)
class LaserGratingSpec:
    """Standing-wave laser grating: power (W), waists (m), wavelength (m)."""

    power: float
    wy: float
    wz: float
    wavelength: float

    def __post_init__(self):
        if self.power < 0:
            raise DomainError("laser power must be nonnegative")
        for name in ("wy", "wz", "wavelength"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")

    @property
    def period(self) -> float:
        return self.wavelength / 2.0


@dataclass(frozen=True)
class InterferometerSpec:
    """Grating period ``d``, separation ``L``, opening fraction and temperature."""

    period: float
    separation: float
    opening_fraction: float
    temperature: float

    def __post_init__(self):
        if not 0 < self.opening_fraction < 1:
            raise DomainError("opening fraction must lie in (0, 1)")
        for name in ("period", "separation", "temperature"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")


class _RQN(NamedTuple):
    l: int
    m: int
    k: int


class RotQuantumNumbers(_RQN):
    """Symmetric-top state label ``|l m k>``."""

    __slots__ = ()

    def __new__(cls, l, m=0, k=0):
        l, m, k = int(l), int(m), int(k)
        if l < 0 or abs(m) > l or abs(k) > l:
            raise DomainError(f"invalid quantum numbers (l={l}, m={m}, k={k})")
        return super().__new__(cls, l, m, k)


# --------------------------------------------------------------------------
# Rotational spectrum and thermal populations


def _k_coefficient(mol: MoleculeSpec) -> float:
    """Coefficient of k^2 in the symmetric-top energy (inf for linear rotors)."""
    hbar = CONSTANTS.hbar
    if mol.is_linear:
        return math.inf
    return 0.5 * hbar**2 * (1.0 / mol.I3 - 1.0 / mol.I)


def rotational_energy(l, k, mol: MoleculeSpec):
    """Symmetric-top eigenenergy ``eps_lk`` in J (independent of m).

    ``hbar^2 l(l+1) / 2I + (hbar^2 / 2)(1/I3 - 1/I) k^2``. For a linear
    rotor, states with ``k != 0`` have infinite energy.
    """
    l = np.asarray(l, dtype=float)
    k = np.asarray(k, dtype=float)
    e = CONSTANTS.hbar**2 * l * (l + 1.0) / (2.0 * mol.I)
    ck = _k_coefficient(mol)
    if math.isinf(ck):
        e = np.where(k == 0, e, np.inf)
    else:
        e = e + ck * k**2
    return e[()] if e.ndim == 0 else e


def thermal_weight(l, k, mol: MoleculeSpec, T: float):
    """Unnormalized Boltzmann factor ``exp(-eps_lk / kB T)``."""
    if not T > 0:
        raise DomainError("temperature must be positive")
    return np.exp(-rotational_energy(l, k, mol) / (CONSTANTS.kB * T))


@dataclass(frozen=True)
class LMaxPolicy:
    """Truncation policy for sums over rotor states.

    ``tail`` bounds the discarded population; ``l_cap`` is the hard cap on
    ``l``; ``max_states`` caps the number of symmetry-reduced states that a
    brute-force sum is allowed to visit.
    """

    tail: float = 1e-8
    l_cap: int = 10_000
    max_states: int = 60_000_000
    chunk: int = 128


def _level_weights(ls: np.ndarray, mol: MoleculeSpec, T: float) -> np.ndarray:
    """Total population of each l manifold (all m and k), unnormalized."""
    beta = 1.0 / (CONSTANTS.kB * T)
    e_l = CONSTANTS.hbar**2 * ls * (ls + 1.0) / (2.0 * mol.I)
    if mol.is_linear:
        return (2 * ls + 1) * np.exp(-beta * e_l)
    ck = _k_coefficient(mol)
    kmax = int(ls.max())
    k = np.arange(kmax + 1, dtype=float)
    # rows: l, cols: k >= 0; mask k <= l, weight 2 for k > 0
    with np.errstate(under="ignore"):
        terms = np.exp(-beta * (e_l[:, None] + ck * k[None, :] ** 2))
    terms *= (k[None, :] <= ls[:, None]) * np.where(k > 0, 2.0, 1.0)[None, :]
    return (2 * ls + 1) * terms.sum(axis=1)


def thermal_l_max(mol: MoleculeSpec, T: float, tail: float = 1e-8,
                  l_cap: int = 10_000, chunk: int = 128) -> tuple[int, float]:
    """Smallest ``l_max`` whose discarded population is below ``tail``.

    Returns ``(l_max, Z)`` where ``Z`` is the truncated partition sum. The
    tail beyond ``L`` is bounded by ``w_{L+1} / (1 - w_{L+1} / w_L)``, valid
    once the level weights decay with a nonincreasing ratio (the Gaussian
    envelope guarantees this past the population maximum).

    Raises
    ------
    TruncationError
        If ``l_cap`` is reached before the tail criterion holds.
    """
    if not T > 0:
        raise DomainError("temperature must be positive")
    z = 0.0
    prev = None
    start = 0
    while start <= l_cap:
        ls = np.arange(start, min(start + chunk, l_cap + 1), dtype=float)
        w = _level_weights(ls, mol, T)
        for i, wl in enumerate(w):
            if prev is not None and wl < prev:
                # bound on the population of l = ls[i] and above
                bound = 0.0 if wl == 0.0 else wl / (1.0 - wl / prev)
                if bound <= tail * z:
                    return int(ls[i]) - 1, z
            z += wl
            prev = wl
        start += chunk
    raise TruncationError(
        f"thermal basis not converged to tail {tail:g} within l_cap={l_cap}")


def reduced_state_count(mol: MoleculeSpec, l_max: int) -> int:
    """Number of states with ``m, k >= 0`` up to ``l_max``."""
    n = l_max + 1
    if mol.is_linear:
        return n * (n + 1) // 2
    return n * (n + 1) * (2 * n + 1) // 6


@dataclass(frozen=True)
class RotEnsemble:
    """Weighted set of rotor states, as flat integer arrays plus weights.

    States may be symmetry-reduced (``m, k >= 0`` with multiplicity folded
    into ``weight``) since every observable here depends on ``m^2, k^2``.
    """

    l: np.ndarray
    m: np.ndarray
    k: np.ndarray
    weight: np.ndarray

    @classmethod
    def from_states(cls, states) -> "RotEnsemble":
        states = list(states)
        if not states:
            raise ValueError("empty rotor ensemble")
        qs = [RotQuantumNumbers(*s) for s, _ in states]
        return cls(np.array([q.l for q in qs]), np.array([q.m for q in qs]),
                   np.array([q.k for q in qs]), np.array([w for _, w in states], dtype=float))

    @classmethod
    def single(cls, l=0, m=0, k=0) -> "RotEnsemble":
        return cls.from_states([((l, m, k), 1.0)])

    def __len__(self):
        return len(self.weight)

    @property
    def q(self) -> np.ndarray:
        return q_lmk(self.l, self.m, self.k)

    def states(self):
        for l, m, k, w in zip(self.l, self.m, self.k, self.weight):
            yield RotQuantumNumbers(l, m, k), float(w)


def iter_thermal_blocks(mol: MoleculeSpec, T: float,
                        policy: LMaxPolicy = LMaxPolicy()) -> Iterator[RotEnsemble]:
    """Yield the normalized thermal ensemble in blocks of consecutive ``l``.

    States are symmetry-reduced (``m, k >= 0``). Summing ``weight`` over all
    blocks gives 1 up to rounding.
    """
    l_max, z = thermal_l_max(mol, T, policy.tail, policy.l_cap, policy.chunk)
    n_states = reduced_state_count(mol, l_max)
    if n_states > policy.max_states:
        raise TruncationError(
            f"thermal sum needs {n_states} reduced states (l_max={l_max}), "
            f"above max_states={policy.max_states}; use the integral form")
    beta = 1.0 / (CONSTANTS.kB * T)
    ck = _k_coefficient(mol)
    step = max(1, policy.chunk // 4) if not mol.is_linear else policy.chunk
    for start in range(0, l_max + 1, step):
        ls = np.arange(start, min(start + step, l_max + 1))
        if mol.is_linear:
            lg, mg = _triangle(ls)
            kg = np.zeros_like(lg)
        else:
            lg, mg, kg = _pyramid(ls)
        e = CONSTANTS.hbar**2 * lg * (lg + 1.0) / (2.0 * mol.I)
        if not mol.is_linear:
            e = e + ck * kg.astype(float) ** 2
        mult = np.where(mg > 0, 2.0, 1.0) * np.where(kg > 0, 2.0, 1.0)
        with np.errstate(under="ignore"):
            w = mult * np.exp(-beta * e) / z
        yield RotEnsemble(lg, mg, kg, w)


def _triangle(ls):
    counts = ls + 1
    lg = np.repeat(ls, counts)
    offs = np.repeat(np.cumsum(counts) - counts, counts)
    mg = np.arange(lg.size) - offs
    return lg, mg


def _pyramid(ls):
    lg, mg = _triangle(ls)
    counts = lg + 1
    l3 = np.repeat(lg, counts)
    m3 = np.repeat(mg, counts)
    offs = np.repeat(np.cumsum(counts) - counts, counts)
    k3 = np.arange(l3.size) - offs
    return l3, m3, k3


def thermal_ensemble(mol: MoleculeSpec, T: float,
                     policy: LMaxPolicy = LMaxPolicy()) -> RotEnsemble:
    """Whole normalized thermal ensemble (symmetry-reduced) in one object."""
    blocks = list(iter_thermal_blocks(mol, T, policy))
    return RotEnsemble(*(np.concatenate([getattr(b, f) for b in blocks])
                         for f in ("l", "m", "k", "weight")))


# --------------------------------------------------------------------------
# Expectation values of sin^2(theta)


def q_lmk(l, m, k):
    """Closed form of ``<l m k| sin^2 theta |l m k>``.

    Works elementwise on integer arrays. The last term, singular at
    ``l = 0``, is taken as 0 there (its numerator vanishes with m = k = 0).
    """
    l = np.asarray(l, dtype=np.int64)
    m = np.asarray(m, dtype=np.int64)
    k = np.asarray(k, dtype=np.int64)
    d1 = (2 * l - 1) * (2 * l + 3)
    first = (4 * m * m + 4 * k * k - 1) / d1
    num = 4 * (m * k) ** 2
    d2 = l * (l + 1) * d1
    safe = np.where(d2 == 0, 1, d2)
    third = np.where(d2 == 0, 0.0, num / safe)
    out = 0.5 + 0.5 * first - 1.5 * third
    return out[()] if out.ndim == 0 else out


def q_lm_linear(l, m):
    """Linear-rotor expectation ``Q_{l m 0}``."""
    l = np.asarray(l, dtype=np.int64)
    m = np.asarray(m, dtype=np.int64)
    out = 0.5 + 0.5 * ((4 * m * m - 1) / ((2 * l - 1) * (2 * l + 3)))
    return out[()] if out.ndim == 0 else out


def wigner_small_d(l: int, m: int, k: int, theta):
    """Wigner small-d ``d^l_{mk}(theta)`` from the explicit factorial sum.

    Only well conditioned for small ``l`` (cancellation grows like the
    largest binomial term); intended as a reference implementation.
    """
    theta = np.asarray(theta, dtype=float)
    c = np.cos(theta / 2.0)
    s = np.sin(theta / 2.0)
    f = math.factorial
    pref = math.sqrt(f(l + m) * f(l - m) * f(l + k) * f(l - k))
    total = np.zeros_like(theta)
    for j in range(max(0, k - m), min(l + k, l - m) + 1):
        den = f(l + k - j) * f(j) * f(m - k + j) * f(l - m - j)
        total = total + ((-1) ** (m - k + j) / den
                         * c ** (2 * l + k - m - 2 * j) * s ** (m - k + 2 * j))
    return pref * total


def q_lmk_oracle(l: int, m: int, k: int, tol: float = 1e-12) -> float:
    """``<l m k| sin^2 theta |l m k>`` by adaptive quadrature over Wigner d."""
    RotQuantumNumbers(l, m, k)
    if l > 8:
        raise DomainError("q_lmk_oracle is limited to l <= 8")
    norm = (2 * l + 1) / 2.0

    def integrand(th):
        return norm * math.sin(th) ** 3 * float(wigner_small_d(l, m, k, th)) ** 2

    val, err = integrate.quad(integrand, 0.0, math.pi, epsabs=tol * 0.1,
                              epsrel=0.0, limit=200)
    if not err <= tol:
        raise QuadratureError("Wigner-d quadrature did not converge", val, err)
    return val


# --------------------------------------------------------------------------
# Interferometer scales


def de_broglie_wavelength(mol: MoleculeSpec) -> float:
    return 2.0 * math.pi * CONSTANTS.hbar / (mol.mass * mol.vz)


def talbot_length(d: float, lambda_dB: float) -> float:
    if not (d > 0 and lambda_dB > 0):
        raise DomainError("period and wavelength must be positive")
    return d * d / lambda_dB


def eikonal_phase(mol: MoleculeSpec, las: LaserGratingSpec) -> float:
    """Eikonal phase ``4 alpha_par P / (eps0 c hbar w_y v_z sqrt(2 pi))``."""
    k = CONSTANTS
    return 4.0 * mol.alpha_par * las.power / (
        k.epsilon0 * k.c * k.hbar * las.wy * mol.vz * math.sqrt(2.0 * math.pi))


def power_for_phase(phi0: float, mol: MoleculeSpec, las: LaserGratingSpec) -> float:
    """Laser power that produces eikonal phase ``phi0`` for this molecule."""
    per_watt = eikonal_phase(mol, LaserGratingSpec(1.0, las.wy, las.wz, las.wavelength))
    return phi0 / per_watt
