"""Brute-force near-field simulation of the three-grating interferometer.

Geometry: binary slit gratings 1 and 3 (opening fraction f, slits centred
on x = 0 mod d), a pure phase grating 2 halfway between, separation L on
each side, paraxial monochromatic propagation.

Grating 1 is illuminated incoherently, so every point x0 of its openings
is an independent point source. A paraxial spherical wave from x0 crossing
a grating of period d at distance L and observed at a further L forms the
intensity

    I(x'' | x0) = F((x'' + x0) / 2),
    F(y) = |sum_n b_n exp(2 pi i n y / d)|^2,
    b_n = c_n exp(-i pi n^2 (L / 2) / L_T),

a twofold magnified copy of the plane-wave near field at L/2. Here c_n
are the diffraction orders of the rotor state's phase mask. The detected
signal at grating-3 shift xs averages I over source points in the openings
of grating 1 and over detector points in the shifted openings of grating
3, both taken over one 2d cell. That double average is carried out on
Gauss-Legendre nodes; since F is a finite trigonometric polynomial the
node sums factorise order by order, and the orientation trace is an
incoherent weighted sum of F over rotor states.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError, TruncationError
from .grating import PhaseMask, diffraction_orders, phase_amplitude
from .physics import LMaxPolicy, RotEnsemble, thermal_ensemble
from .visibility import FringeResult, Mode, Setup, params_hash

TRUNCATION_TOL = 1e-6
NORMALIZATION_TOL = 1e-6


@dataclass(frozen=True)
class OrderSpaceState:
    """Diffraction-order amplitudes a_n for n = -n_max..n_max."""

    amplitudes: np.ndarray
    period: float

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex)
        if a.ndim != 1 or a.size % 2 != 1:
            raise DomainError("order amplitudes must have odd length 2 n_max + 1")
        if not np.all(np.isfinite(a)):
            raise DomainError("order amplitudes must be finite")
        object.__setattr__(self, "amplitudes", a)

    @classmethod
    def from_mask(cls, mask: PhaseMask, n_max: int) -> "OrderSpaceState":
        import warnings
        from .errors import TruncationWarning
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TruncationWarning)
            return cls(diffraction_orders(mask, n_max), mask.period)

    @property
    def n_max(self) -> int:
        return (self.amplitudes.size - 1) // 2

    @property
    def orders(self) -> np.ndarray:
        return np.arange(-self.n_max, self.n_max + 1)

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    @property
    def truncation_mass(self) -> float:
        return 1.0 - self.norm

    def propagate(self, distance_ratio: float) -> "OrderSpaceState":
        """Free flight over ``distance_ratio`` Talbot lengths."""
        n = self.orders.astype(float)
        phase = np.exp(-1j * math.pi * n * n * distance_ratio)
        return replace(self, amplitudes=self.amplitudes * phase)

    def intensity_harmonics(self) -> np.ndarray:
        """F_h = sum_n a_n conj(a_{n-h}) for h = -2 n_max..2 n_max."""
        a = self.amplitudes
        return np.correlate(a, a, mode="full")

    def intensity(self, x) -> np.ndarray:
        """|sum_n a_n exp(2 pi i n x / d)|^2 evaluated directly."""
        x = np.asarray(x, dtype=float)
        ph = np.exp(2j * math.pi * np.multiply.outer(x, self.orders) / self.period)
        return np.abs(ph @ self.amplitudes) ** 2


@dataclass(frozen=True)
class FringePattern:
    """Detected signal versus grating-3 shift over one period."""

    positions: np.ndarray
    intensity: np.ndarray
    sinusoidal_visibility: float
    signed_visibility: float
    period: float

    @property
    def mean(self) -> float:
        return float(np.mean(self.intensity))


def _fourier_pair(p_positions, p_intensity, period):
    x = np.asarray(p_positions, dtype=float)
    y = np.asarray(p_intensity, dtype=float)
    if y.size == 0:
        raise DomainError("empty fringe pattern")
    s0 = float(np.mean(y))
    if not s0 > 0:
        raise DomainError("fringe pattern has zero mean")
    s1 = complex(np.mean(y * np.exp(-2j * math.pi * x / period)))
    return s0, s1


def extract_sinusoidal_visibility(p: FringePattern) -> float:
    """``2 |S1| / S0`` from uniformly spaced samples over one period."""
    s0, s1 = _fourier_pair(p.positions, p.intensity, p.period)
    return 2.0 * abs(s1) / s0


def _slit_nodes(n_per_opening: int, f: float, period: float, offset: float):
    """GL nodes and weights covering both slits of one 2d cell, cell-averaged."""
    x, w = np.polynomial.legendre.leggauss(n_per_opening)
    half = 0.5 * f * period
    centres = np.array([0.0, period]) + offset * period
    nodes = (centres[:, None] + half * x[None, :]).ravel()
    weights = np.tile(half * w, 2) / (2.0 * period)
    return nodes, weights


def _ensemble_harmonics(setup: Setup, ens: RotEnsemble, n_max: int):
    """Weighted F_h summed over rotor states, grouped by distinct Q."""
    q = np.asarray(ens.q, dtype=float)
    w = np.asarray(ens.weight, dtype=float)
    total = float(np.sum(w))
    if abs(total - 1.0) > NORMALIZATION_TOL:
        raise DomainError(f"rotor weights sum to {total:.9g}, not 1")
    uq, inv = np.unique(q, return_inverse=True)
    wq = np.bincount(inv, weights=w, minlength=uq.size)
    amps = phase_amplitude(uq, setup.mol, setup.las)
    half_xi = 0.5 * setup.separation_ratio
    fh = np.zeros(4 * n_max + 1, dtype=complex)
    worst = 0.0
    for a, wt in zip(np.atleast_1d(amps), wq):
        st = OrderSpaceState.from_mask(PhaseMask(float(a), setup.ifm.period), n_max)
        worst = max(worst, st.truncation_mass)
        if st.truncation_mass > TRUNCATION_TOL:
            raise TruncationError(
                f"n_max={n_max} keeps only {st.norm:.8f} of the diffracted norm "
                f"at phase amplitude {a:.4g} (tolerance {TRUNCATION_TOL:g})")
        fh += wt * st.propagate(half_xi).intensity_harmonics()
    return fh, worst


def simulate_kdtli(setup: Setup, ensemble: RotEnsemble, n_max: int = 24,
                   n_sources: int = 64, n_detector: int = 64, n_shifts: int = 16,
                   g1_offset: float = 0.0, g3_offset: float = 0.0) -> FringePattern:
    """Fringe pattern from incoherent sources, order-space optics and a rotor trace.

    ``n_sources`` and ``n_detector`` count quadrature nodes over the two
    openings of grating 1 and grating 3 in one 2d cell. Offsets shift the
    slit centres in units of d.
    """
    if n_max < 1:
        raise DomainError("n_max must be at least 1")
    if n_sources < 2 or n_detector < 2 or n_sources % 2 or n_detector % 2:
        raise DomainError("source and detector node counts must be even and >= 2")
    if n_shifts < 3:
        raise DomainError("need at least 3 grating shifts per period")
    d = setup.ifm.period
    f = setup.ifm.opening_fraction
    fh, _ = _ensemble_harmonics(setup, ensemble, n_max)
    h = np.arange(-2 * n_max, 2 * n_max + 1)

    x0, w0 = _slit_nodes(n_sources // 2, f, d, g1_offset)
    y3, w3 = _slit_nodes(n_detector // 2, f, d, g3_offset)
    # F((x'' + x0)/2) = sum_h F_h exp(i pi h (x'' + x0) / d), x'' = xs + y3
    src = np.exp(1j * math.pi * np.outer(h, x0) / d) @ w0
    det = np.exp(1j * math.pi * np.outer(h, y3) / d) @ w3
    xs = np.arange(n_shifts) * d / n_shifts
    shift = np.exp(1j * math.pi * np.outer(xs, h) / d)
    signal = (shift @ (fh * src * det)).real
    s0, s1 = _fourier_pair(xs, signal, d)
    # slit offsets rotate the first harmonic by exp(2 pi i (o1 + o3)); once that
    # is undone it is real and its sign is the sign of the visibility
    ref = np.exp(-2j * math.pi * (g1_offset + g3_offset))
    signed = 2.0 * (s1 * ref).real / s0
    return FringePattern(xs, signal, 2.0 * abs(s1) / s0, signed, d)


def oracle_visibility(setup: Setup, ensemble: RotEnsemble | None = None,
                      tail: float = 1e-6, **kw) -> FringeResult:
    """Signed oracle visibility; thermal ensemble at the setup temperature by default."""
    if ensemble is None:
        T = setup.ifm.temperature
        ensemble = thermal_ensemble(setup.mol, T, LMaxPolicy(tail=tail))
    pat = simulate_kdtli(setup, ensemble, **kw)
    return FringeResult(pat.signed_visibility, Mode.ORACLE,
                        params_hash(setup, Mode.ORACLE, kw, tail))
