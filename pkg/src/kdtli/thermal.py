"""Thermal statistics of the rotational time average r = <cos^2 theta>.

For a thermal free symmetric top the pair of relative frequencies (u1, u2)
has a temperature-independent density: |u1| is uniform on [0, 1] and |u2|
has the marginal CDF ``G(u) = sqrt(k) u / sqrt(1 + (k - 1) u^2)`` with
``k = I/I3``. Everything here is built on that fact:

* ``f_th`` / ``p_th``: closed-form densities of r and q = 1 - r, evaluated by
  one-dimensional quadrature with the endpoint square-root singularities
  removed by substitution.
* ``expectation_over_pth``: expectations evaluated in (|u1|, G(|u2|)) space,
  where the measure is uniform on the unit square and no density appears.
* ``cdf_r_uspace`` and ``cumulative_table``: two independent CDF routes.
* ``sample_thermal``: Monte Carlo over the Boltzmann phase-space density.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, interpolate, stats

from .errors import DomainError, QuadratureError
from .physics import CONSTANTS, MoleculeSpec, ShapeRatio
from .rotor import hamiltonian, temporal_average_r, RotorPhasePoint

THIRD = 1.0 / 3.0
# |r - 1/3| below this is reported as the logarithmic divergence
_DIVERGENCE_BAND = 4 * np.finfo(float).eps


def _as_shape(shape) -> ShapeRatio:
    if isinstance(shape, ShapeRatio):
        return shape
    return ShapeRatio(float(shape))


def _check_unit(x, name):
    x = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(x)) or np.any(x < 0) or np.any(x > 1):
        raise DomainError(f"{name} must lie in [0, 1]")
    return x


# --------------------------------------------------------------------------
# densities


def q_density_u(u1, u2, shape):
    """Joint density of the relative frequencies on [-1, 1]^2.

    For the linear rotor u2 is identically zero, so the density is singular;
    this returns ``inf`` on the line u2 = 0 and 0 elsewhere.
    """
    shape = _as_shape(shape)
    u1 = np.asarray(u1, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    if np.any(np.abs(u1) > 1) or np.any(np.abs(u2) > 1):
        raise DomainError("relative frequencies must lie in [-1, 1]")
    u1, u2 = np.broadcast_arrays(u1, u2)
    if shape.is_linear:
        out = np.where(u2 == 0, np.inf, 0.0)
    else:
        k = shape.ratio
        out = 0.25 * math.sqrt(k) * (1.0 + (k - 1.0) * u2**2) ** -1.5
    return out[()] if out.ndim == 0 else out


def u2_from_uniform(w, ratio: float):
    """Inverse of the |u2| marginal CDF: maps uniform w in [0, 1] to |u2|."""
    w = np.asarray(w, dtype=float)
    return w / np.sqrt(ratio - (ratio - 1.0) * w * w)


def u2_marginal_cdf(u, ratio: float):
    u = np.asarray(u, dtype=float)
    return math.sqrt(ratio) * u / np.sqrt(1.0 + (ratio - 1.0) * u * u)


def _quad(fun, a, b, points=None, what="integral"):
    if b <= a:
        return 0.0
    if points is not None:
        points = sorted(p for p in points if a < p < b) or None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        out = integrate.quad(fun, a, b, points=points, epsabs=1e-13, epsrel=1e-11,
                             limit=400, full_output=1)
    val, err = out[0], out[1]
    if len(out) > 3 and err > 1e-8 * max(1.0, abs(val)):
        raise QuadratureError(f"{what} did not converge", val, err)
    return val


def _f_th_finite(r: float, k: float) -> float:
    # integrand: weight(u) / sqrt((u^2 - 1/3)(u^2 + 2r - 1)) on the two intervals.
    # Each endpoint where a factor vanishes or nearly vanishes is stretched
    # (sinh for a true inverse-sqrt end, log for the near-1/3 end) at a scale
    # set by gap = |r - 1/3|-like distances, and the small factors are
    # written in factored form so no cancellation occurs.
    b = 1.0 - 2.0 * r

    def weight(u):
        return (1.0 + (k - 1.0) * u * u) ** -1.5

    # weight peak of width 1/sqrt(k) near u = 0
    peak = [c / math.sqrt(k - 1.0) for c in (0.3, 1.0, 3.0, 10.0, 30.0)] if k > 4 else []
    total = 0.0

    # first interval [0, sqrt(min(1/3, 1 - 2r, r))], absent for r >= 1/2
    if r < THIRD:
        hi = math.sqrt(r)
        gap = THIRD - r
        delta = gap / (2.0 * hi) if hi > 0 else 1.0
        top = math.log1p(hi / delta)

        def g1(tau):
            x = delta * math.expm1(tau)
            u = hi - x
            uu = x * (hi + u)  # r - u^2
            return weight(u) * (x + delta) / math.sqrt((gap + uu) * (1.0 - 3.0 * r + uu))

        pts = [math.log1p((hi - p) / delta) for p in peak if p < hi]
        total += _quad(g1, 0.0, top, pts, "f_th first interval")
    elif r < 0.5:
        hi = math.sqrt(b)
        gap = THIRD - b
        sig = math.sqrt(gap / (2.0 * hi * hi))
        top = math.asinh(1.0 / sig)

        def g1(tau):
            s = sig * math.sinh(tau)
            u = hi * (1.0 - s * s)
            bu = hi * s * s * (hi + u)  # (1 - 2r) - u^2
            return (2.0 * math.sqrt(hi) * weight(u) * sig * math.cosh(tau)
                    / math.sqrt((gap + bu) * (hi + u)))

        pts = [math.asinh(math.sqrt(1.0 - p / hi) / sig) for p in peak if p < hi]
        total += _quad(g1, 0.0, top, pts, "f_th first interval")

    # second interval [sqrt(max(1/3, 1 - 2r, r)), 1]
    if r < THIRD:
        lo = math.sqrt(b)
        span = 1.0 - lo
        if span <= 0:
            return math.sqrt(k / 3.0) * total
        gap = b - THIRD
        sig = math.sqrt(gap / (2.0 * lo * span))
        top = math.asinh(1.0 / sig)

        def g2(tau):
            s = sig * math.sinh(tau)
            u = lo + span * s * s
            return (2.0 * math.sqrt(span) * weight(u) * sig * math.cosh(tau)
                    / math.sqrt((gap + span * s * s * (u + lo)) * (u + lo)))

        total += _quad(g2, 0.0, top, None, "f_th second interval")
    else:
        lo = math.sqrt(r)
        span = 1.0 - lo
        if span > 0:
            gap = r - THIRD
            delta = gap / (2.0 * lo)
            top = math.log1p(span / delta)

            def g2(tau):
                x = delta * math.expm1(tau)
                u = lo + x
                uu = x * (u + lo)  # u^2 - r
                return weight(u) * (x + delta) / math.sqrt((gap + uu) * (3.0 * r - 1.0 + uu))

            total += _quad(g2, 0.0, top, None, "f_th second interval")
    return math.sqrt(k / 3.0) * total


def f_th(r, shape):
    """Thermal density of r = <cos^2 theta>_t.

    Returns ``inf`` at the logarithmic divergence r = 1/3. For finite I/I3
    the density jumps at r = 1/2; the value returned there is the right
    limit. The linear rotor uses ``1/sqrt(1 - 2r)`` on r < 1/2.
    """
    shape = _as_shape(shape)
    r_arr = _check_unit(r, "r")
    flat = r_arr.ravel()
    out = np.empty_like(flat)
    for i, rv in enumerate(flat):
        if shape.is_linear:
            out[i] = 0.0 if rv > 0.5 else (np.inf if rv == 0.5 else 1.0 / math.sqrt(1.0 - 2.0 * rv))
        elif abs(rv - THIRD) <= _DIVERGENCE_BAND:
            out[i] = np.inf
        else:
            out[i] = _f_th_finite(float(rv), shape.ratio)
    out = out.reshape(r_arr.shape)
    return out[()] if out.ndim == 0 else out


def p_th(q, shape):
    """Thermal density of q = <sin^2 theta>_t, the reflection of ``f_th``."""
    q_arr = _check_unit(q, "q")
    return f_th(1.0 - q_arr, shape)


# --------------------------------------------------------------------------
# expectations in (|u1|, G(|u2|)) space


@lru_cache(maxsize=64)
def _uniform_square_rule(ratio: float | None, panels: int, nodes: int):
    """Nodes ``q`` and weights for E[g(q)] by tensor Gauss-Legendre.

    ``ratio`` None selects the linear rotor (one-dimensional rule in |u1|).
    The w-panels combine a uniform split in w with the images of a uniform
    split in u, so the rule resolves the steep part of u(w) near w = 1.
    """
    x, wx = np.polynomial.legendre.leggauss(nodes)
    x = 0.5 * (x + 1.0)
    wx = 0.5 * wx

    def composite(edges):
        a, b = edges[:-1, None], edges[1:, None]
        pts = (a + (b - a) * x).ravel()
        wts = ((b - a) * wx).ravel()
        return pts, wts

    t, wt = composite(np.linspace(0.0, 1.0, panels + 1))
    if ratio is None:
        q = 0.5 * (1.0 + t * t)
        return q, wt
    u_edges = np.linspace(0.0, 1.0, panels + 1)
    u_lo = 1.0 / math.sqrt(ratio)
    if u_lo < u_edges[1]:
        # most of the |u2| mass sits below 1/sqrt(I/I3); grade the u-edges down to it
        decades = math.log10(u_edges[1] / u_lo)
        u_edges = np.union1d(u_edges, np.geomspace(u_lo, u_edges[1],
                                                   int(math.ceil(decades * panels / 2)) + 2))
    edges = np.union1d(np.linspace(0.0, 1.0, panels + 1), u2_marginal_cdf(u_edges, ratio))
    edges = edges[np.concatenate([[True], np.diff(edges) > 1e-15])]
    edges[-1] = 1.0
    w, ww = composite(edges)
    u2 = np.minimum(u2_from_uniform(w, ratio) ** 2, 1.0)
    t2 = t * t
    r = 0.5 - 0.5 * (t2[:, None] + u2[None, :]) + 1.5 * t2[:, None] * u2[None, :]
    q = (1.0 - r).ravel()
    weights = (wt[:, None] * ww[None, :]).ravel()
    q.setflags(write=False)
    weights.setflags(write=False)
    return q, weights


def quadrature_rule(shape, panels: int = 8, nodes: int = 16):
    """(q nodes, weights) such that sum(w g(q)) approximates E[g(q)]."""
    shape = _as_shape(shape)
    return _uniform_square_rule(None if shape.is_linear else shape.ratio, panels, nodes)


def expectation_over_pth(g, shape, rtol: float = 1e-9, atol: float = 1e-11,
                         panels: int = 8, nodes: int = 16):
    """E[g(q)] for thermal q, without evaluating the singular density.

    ``g`` is called once per rule with a 1-D array of q values and must
    return an array whose last axis matches it. Leading axes are kept, so
    ``g = lambda q: j2(phi0[:, None] * (1 - beta * q))`` evaluates a whole
    sweep at once. The rule is refined by doubling the panel count and the
    difference between the two levels is the error estimate.
    """
    q1, w1 = quadrature_rule(shape, panels, nodes)
    q2, w2 = quadrature_rule(shape, 2 * panels, nodes)
    coarse = np.asarray(g(q1), dtype=float) @ w1
    fine = np.asarray(g(q2), dtype=float) @ w2
    err = np.abs(fine - coarse)
    bad = err > np.maximum(atol, rtol * np.abs(fine))
    if np.any(bad):
        worst = np.unravel_index(np.argmax(err), np.shape(err)) if np.ndim(err) else ()
        raise QuadratureError("u-space expectation did not converge",
                              float(np.asarray(fine)[worst]), float(np.asarray(err)[worst]))
    return fine[()] if np.ndim(fine) == 0 else fine


# --------------------------------------------------------------------------
# cumulative distributions


def _conditional_cdf(r, u):
    """P(R <= r) given |u2| = u, with |u1| uniform on [0, 1]."""
    u2 = u * u
    a = 0.5 * (1.0 - u2)
    b = 0.5 * (1.0 - 3.0 * u2)
    with np.errstate(divide="ignore", invalid="ignore"):
        pos = 1.0 - np.sqrt(np.clip((a - r) / b, 0.0, 1.0))
        neg = np.sqrt(np.clip((r - a) / (-b), 0.0, 1.0))
    flat = np.where(r >= a, 1.0, 0.0)
    return np.where(b > 0, pos, np.where(b < 0, neg, flat))


def cdf_r_uspace(r, shape):
    """CDF of r by integrating the conditional CDF over the |u2| marginal."""
    shape = _as_shape(shape)
    r_arr = _check_unit(r, "r")
    flat = r_arr.ravel()
    out = np.empty_like(flat)
    for i, rv in enumerate(flat):
        rv = float(rv)
        if shape.is_linear:
            out[i] = 1.0 - math.sqrt(max(0.0, 1.0 - 2.0 * rv)) if rv < 0.5 else 1.0
            continue
        k = shape.ratio
        kinks = [c for c in (1.0 - 2.0 * rv, rv, THIRD) if 0.0 < c < 1.0]
        pts = [float(u2_marginal_cdf(math.sqrt(c), k)) for c in kinks]
        out[i] = _quad(lambda w: float(_conditional_cdf(rv, u2_from_uniform(w, k))),
                       0.0, 1.0, pts, "u-space CDF")
    out = np.clip(out.reshape(r_arr.shape), 0.0, 1.0)
    return out[()] if out.ndim == 0 else out


def interval_probability(a: float, b: float, shape) -> float:
    """P(a <= r <= b) by adaptive quadrature of the closed-form density."""
    shape = _as_shape(shape)
    _check_unit([a, b], "interval end")
    if b < a:
        raise DomainError("interval end below start")
    return _quad(lambda r: float(f_th(r, shape)), a, b, [THIRD, 0.5], "density integral")


def _graded_knots(n_uniform: int, depth: int):
    base = np.linspace(0.0, 1.0, n_uniform + 1)
    near = []
    for c in (THIRD, 0.5):
        h = np.geomspace(1e-13, 0.02, depth)
        near.append(c - h)
        near.append(c + h)
    # density grows like sqrt(r) from 0; grade toward both ends as well
    ends = np.geomspace(1e-14, 0.02, depth)
    knots = np.unique(np.clip(np.concatenate([base, [THIRD, 0.5], *near, ends, 1.0 - ends]),
                              0.0, 1.0))
    return knots


@dataclass(frozen=True)
class CumulativeTable:
    """CDF of r tabulated from ``f_th`` and interpolated monotonically."""

    knots: np.ndarray
    values: np.ndarray
    ratio: float

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        return np.clip(self._interp(r), 0.0, 1.0)

    @property
    def _interp(self):
        return interpolate.PchipInterpolator(self.knots, self.values, extrapolate=True)

    @property
    def mass(self) -> float:
        return float(self.values[-1])


@lru_cache(maxsize=16)
def _cumulative(ratio: float, n_uniform: int, depth: int, nodes: int):
    shape = ShapeRatio(ratio)
    knots = _graded_knots(n_uniform, depth)
    x, wx = np.polynomial.legendre.leggauss(nodes)
    acc = [0.0]
    for a, b in zip(knots[:-1], knots[1:]):
        rs = 0.5 * (a + b) + 0.5 * (b - a) * x
        acc.append(acc[-1] + 0.5 * (b - a) * float(np.dot(wx, f_th(rs, shape))))
    return knots, np.asarray(acc)


def cumulative_table(shape, n_uniform: int = 200, depth: int = 24, nodes: int = 8) -> CumulativeTable:
    """CDF of r from piecewise Gauss-Legendre integration of ``f_th``.

    Knots are graded geometrically toward the divergence at 1/3 and the
    jump at 1/2 so the log singularity contributes negligibly.
    """
    shape = _as_shape(shape)
    if shape.is_linear:
        # uniform in tau = sqrt(1 - 2r), refined geometrically at the r = 1/2 edge
        tau = np.unique(np.concatenate([np.linspace(0.0, 1.0, 4001), np.geomspace(1e-10, 1e-3, 60)]))
        knots = np.unique(np.concatenate([0.5 * (1.0 - tau * tau), np.linspace(0.5, 1.0, 11)]))
        vals = 1.0 - np.sqrt(np.clip(1.0 - 2.0 * knots, 0.0, None))
        return CumulativeTable(knots, vals, math.inf)
    knots, vals = _cumulative(shape.ratio, n_uniform, depth, nodes)
    return CumulativeTable(knots, vals, shape.ratio)


# --------------------------------------------------------------------------
# Monte Carlo


@dataclass(frozen=True)
class SampleSet:
    values: np.ndarray
    seed: int
    count: int

    def __post_init__(self):
        if self.count != len(self.values):
            raise ValueError("count does not match number of values")

    @property
    def q(self) -> np.ndarray:
        return 1.0 - self.values


SAMPLE_CHUNK = 1 << 17


def sample_phase_points(n: int, T: float, mol: MoleculeSpec, rng: np.random.Generator):
    """Draw ``n`` phase points from the Boltzmann density of the free top."""
    kT = CONSTANTS.kB * T
    scale = math.sqrt(mol.I * kT)
    cos_t = rng.uniform(-1.0, 1.0, n)
    theta = np.arccos(cos_t)
    phi = rng.uniform(0.0, 2.0 * math.pi, n)
    psi = rng.uniform(0.0, 2.0 * math.pi, n)
    w_chi = rng.standard_normal(n)
    w_theta = rng.standard_normal(n)
    if mol.is_linear:
        w_psi = np.zeros(n)
    else:
        w_psi = rng.standard_normal(n) * math.sqrt(mol.I3 / mol.I)
    p_theta = w_theta * scale
    p_psi = w_psi * scale
    p_phi = w_chi * np.sin(theta) * scale + p_psi * cos_t
    return RotorPhasePoint(phi, theta, psi, p_phi, p_theta, p_psi)


def sample_thermal(n: int, T: float, mol: MoleculeSpec, seed: int) -> SampleSet:
    """Sample r = <cos^2 theta>_t over thermal phase points.

    Work is split into fixed-size chunks, each with its own child stream of
    ``SeedSequence(seed)``, so the result depends only on (n, seed).
    """
    if n < 1:
        raise DomainError("n must be positive")
    if not T > 0:
        raise DomainError("temperature must be positive")
    n_chunks = -(-n // SAMPLE_CHUNK)
    children = np.random.SeedSequence(seed).spawn(n_chunks)
    out = np.empty(n)
    for i, child in enumerate(children):
        lo = i * SAMPLE_CHUNK
        m = min(SAMPLE_CHUNK, n - lo)
        p = sample_phase_points(m, T, mol, np.random.default_rng(child))
        e = hamiltonian(p, mol)
        out[lo:lo + m] = temporal_average_r(e, p.p_phi, p.p_psi, mol)
    return SampleSet(out, int(seed), n)


def ks_distance(samples, cdf) -> float:
    """Sup-norm distance between the empirical CDF of ``samples`` and ``cdf``."""
    x = np.sort(np.asarray(getattr(samples, "values", samples), dtype=float))
    n = x.size
    if n == 0:
        raise DomainError("empty sample set")
    f = np.clip(np.asarray(cdf(x), dtype=float), 0.0, 1.0)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))


def ks_two_sample(a, b) -> float:
    """Two-sample KS statistic between two sample sets."""
    va = np.asarray(getattr(a, "values", a), dtype=float)
    vb = np.asarray(getattr(b, "values", b), dtype=float)
    return float(stats.ks_2samp(va, vb).statistic)
