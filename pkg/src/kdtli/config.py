"""INI run configuration with unit conversion at the boundary.

Accepted units: amu for masses, cubic angstrom polarizability volumes
(times 4 pi eps0), nm and um for lengths, m/s, K, W. Example::

    [molecule]
    mass_amu = 1030
    vz = 100
    length_nm = 3.5          ; or I_kgm2 = ...; I = M L^2 / 12
    shape_ratio = inf        ; I / I3
    alpha_par_A3 = 50        ; or alpha_mean_A3 = 50
    anisotropy = 0.5         ; delta_alpha / alpha_par

    [laser]
    power = 1.0
    wy_um = 900
    wz_um = 20
    wavelength_nm = 532

    [interferometer]
    separation_ratio = 0.5   ; or separation_m
    opening_fraction = 0.42
    temperature = 600
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError, DomainError
from .physics import CONSTANTS, InterferometerSpec, LaserGratingSpec, MoleculeSpec
from .visibility import Mode, Setup, SweepVariable

A3 = 4.0 * math.pi * CONSTANTS.epsilon0 * 1e-30  # C m^2 / V per cubic angstrom

DEFAULTS = {
    "molecule": {"mass_amu": "1030", "vz": "100", "length_nm": "3.5",
                 "shape_ratio": "inf", "anisotropy": "0.5"},
    "laser": {"power": "1.0", "wy_um": "900", "wz_um": "20", "wavelength_nm": "532"},
    "interferometer": {"separation_ratio": "0.5", "opening_fraction": "0.42",
                       "temperature": "600"},
    "sweep": {"variable": "laser_power", "start": "0", "stop": "40", "num": "161"},
    "qdist": {"ratios": "0.5, 10, inf", "points": "600"},
    "mc": {"ratios": "0.5, 1, 10", "samples": "1000000", "temperatures": "300, 3000",
           "threshold": "0.005"},
    "oracle": {"phi0": "0, 1, 2, 3, 4, 5, 6, 7, 8", "anisotropies": "0, 0.5, 0.9",
               "thermal_ratio": "40", "tail": "1e-6", "n_max": "24", "n_sources": "64",
               "tolerance": "5e-3", "point_tolerance": "1e-3"},
    "run": {"seed": "20240601", "modes": "integral, classical"},
}


@dataclass(frozen=True)
class RunConfig:
    setup: Setup
    hold: str
    sweep_variable: SweepVariable
    sweep_values: tuple
    series_anisotropy: tuple
    series_shape: tuple
    modes: tuple
    seed: int
    qdist_ratios: tuple
    qdist_points: int
    mc_ratios: tuple
    mc_samples: int
    mc_temperatures: tuple
    mc_threshold: float
    oracle_phi0: tuple
    oracle_anisotropies: tuple
    oracle_thermal_ratio: float
    oracle_tail: float
    oracle_n_max: int
    oracle_n_sources: int
    oracle_tolerance: float
    oracle_point_tolerance: float
    out: str | None = None
    source: dict = field(default_factory=dict, compare=False)

    def header(self) -> str:
        """One-line SI parameter record used as the CSV/JSON provenance header."""
        s = self.setup
        items = {
            "mass_kg": s.mol.mass, "vz_m_s": s.mol.vz, "I_kgm2": s.mol.I, "I3_kgm2": s.mol.I3,
            "alpha_par_Cm2_V": s.mol.alpha_par, "delta_alpha_Cm2_V": s.mol.delta_alpha,
            "power_W": s.las.power, "wy_m": s.las.wy, "wz_m": s.las.wz,
            "wavelength_m": s.las.wavelength, "period_m": s.ifm.period,
            "separation_m": s.ifm.separation, "opening_fraction": s.ifm.opening_fraction,
            "temperature_K": s.ifm.temperature, "talbot_length_m": s.talbot_length,
            "phi0": s.phi0, "hold": self.hold, "seed": self.seed,
        }
        return ";".join(f"{k}={_fmt(v)}" for k, v in items.items())


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


class _Reader:
    def __init__(self, cp: configparser.ConfigParser):
        self.cp = cp

    def has(self, sec, key) -> bool:
        return self.cp.has_option(sec, key)

    def raw(self, sec, key):
        if self.cp.has_option(sec, key):
            return self.cp.get(sec, key)
        return DEFAULTS.get(sec, {}).get(key)

    def num(self, sec, key, positive=False, default=None):
        raw = self.raw(sec, key)
        if raw is None:
            if default is not None:
                return default
            raise ConfigError(f"[{sec}] {key}: missing")
        try:
            val = float(raw)
        except ValueError:
            raise ConfigError(f"[{sec}] {key}: not a number: {raw!r}") from None
        if math.isnan(val):
            raise ConfigError(f"[{sec}] {key}: NaN")
        if positive and not val > 0:
            raise ConfigError(f"[{sec}] {key}: must be positive, got {raw!r}")
        return val

    def integer(self, sec, key, minimum=None):
        raw = self.raw(sec, key)
        try:
            val = int(raw)
        except (TypeError, ValueError):
            raise ConfigError(f"[{sec}] {key}: not an integer: {raw!r}") from None
        if minimum is not None and val < minimum:
            raise ConfigError(f"[{sec}] {key}: must be >= {minimum}, got {val}")
        return val

    def nums(self, sec, key):
        raw = self.raw(sec, key)
        return parse_list(raw, f"[{sec}] {key}")


def parse_list(raw, where="list") -> tuple:
    if raw is None or not str(raw).strip():
        raise ConfigError(f"{where}: empty list")
    out = []
    for part in str(raw).replace(";", ",").split(","):
        part = part.strip()
        if not part:
            continue
        try:
            out.append(float(part))
        except ValueError:
            raise ConfigError(f"{where}: not a number: {part!r}") from None
    if not out or any(math.isnan(v) for v in out):
        raise ConfigError(f"{where}: invalid list {raw!r}")
    return tuple(out)


def _molecule(r: _Reader) -> tuple[MoleculeSpec, str]:
    sec = "molecule"
    mass = r.num(sec, "mass_amu", positive=True) * CONSTANTS.amu
    vz = r.num(sec, "vz", positive=True)
    if r.has(sec, "I_kgm2"):
        I = r.num(sec, "I_kgm2", positive=True)
    else:
        length = r.num(sec, "length_nm", positive=True) / 1e9
        I = mass * length**2 / 12.0
    ratio = r.num(sec, "shape_ratio")
    if not ratio >= 0.5:
        raise ConfigError(f"[{sec}] shape_ratio: must be >= 0.5, got {ratio}")
    I3 = 0.0 if math.isinf(ratio) else I / ratio
    beta = r.num(sec, "anisotropy")
    if abs(beta) > 1:
        raise ConfigError(f"[{sec}] anisotropy: |delta_alpha/alpha_par| must be <= 1")
    has_par, has_mean = r.has(sec, "alpha_par_A3"), r.has(sec, "alpha_mean_A3")
    if has_par and has_mean:
        raise ConfigError(f"[{sec}] give alpha_par_A3 or alpha_mean_A3, not both")
    try:
        if has_mean:
            mean = r.num(sec, "alpha_mean_A3", positive=True) * A3
            return MoleculeSpec.from_mean_polarizability(mass, vz, I, I3, mean, beta), "alpha_mean"
        alpha = r.num(sec, "alpha_par_A3", positive=True, default=50.0) * A3
        return MoleculeSpec(mass, vz, I, I3, alpha, beta * alpha), "alpha_par"
    except DomainError as exc:
        raise ConfigError(f"[{sec}] {exc}") from None


def _setup(r: _Reader, mol: MoleculeSpec) -> Setup:
    try:
        las = LaserGratingSpec(power=r.num("laser", "power"),
                               wy=r.num("laser", "wy_um", positive=True) / 1e6,
                               wz=r.num("laser", "wz_um", positive=True) / 1e6,
                               wavelength=r.num("laser", "wavelength_nm", positive=True) / 1e9)
    except DomainError as exc:
        raise ConfigError(f"[laser] {exc}") from None
    sec = "interferometer"
    period = las.period
    if r.has(sec, "period_nm"):
        period = r.num(sec, "period_nm", positive=True) / 1e9
    f = r.num(sec, "opening_fraction")
    if not 0 < f < 1:
        raise ConfigError(f"[{sec}] opening_fraction: must lie in (0, 1), got {f}")
    T = r.num(sec, "temperature", positive=True)
    try:
        ifm = InterferometerSpec(period=period, separation=1.0, opening_fraction=f,
                                 temperature=T)
        setup = Setup(mol, las, ifm)
    except DomainError as exc:
        raise ConfigError(f"[{sec}] {exc}") from None
    if r.has(sec, "separation_m"):
        return replace(setup, ifm=replace(ifm, separation=r.num(sec, "separation_m",
                                                                positive=True)))
    return setup.with_separation_ratio(r.num(sec, "separation_ratio", positive=True))


def _sweep_values(r: _Reader) -> tuple:
    if r.has("sweep", "values"):
        return r.nums("sweep", "values")
    start, stop = r.num("sweep", "start"), r.num("sweep", "stop")
    num = r.integer("sweep", "num", minimum=1)
    return tuple(float(v) for v in np.linspace(start, stop, num))


def load_config(path: str | None = None, text: str | None = None) -> RunConfig:
    """Parse a config file (or string); missing keys take the built-in defaults."""
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    cp.optionxform = str
    try:
        if path is not None:
            with open(path, encoding="utf-8") as fh:
                cp.read_file(fh)
        if text is not None:
            cp.read_string(text)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    r = _Reader(cp)
    mol, hold = _molecule(r)
    setup = _setup(r, mol)
    try:
        variable = SweepVariable(r.raw("sweep", "variable"))
    except ValueError:
        raise ConfigError(f"[sweep] variable: unknown {r.raw('sweep', 'variable')!r}") from None
    series_a = r.nums("sweep", "anisotropies") if r.has("sweep", "anisotropies") else ()
    series_s = r.nums("sweep", "shape_ratios") if r.has("sweep", "shape_ratios") else ()
    try:
        modes = tuple(Mode.parse(m.strip()) for m in r.raw("run", "modes").split(",") if m.strip())
    except DomainError as exc:
        raise ConfigError(f"[run] modes: {exc}") from None
    ratios = r.nums("qdist", "ratios")
    mc_ratios = r.nums("mc", "ratios")
    for where, vals in (("[qdist] ratios", ratios), ("[mc] ratios", mc_ratios)):
        if any(not v >= 0.5 for v in vals):
            raise ConfigError(f"{where}: shape ratios must be >= 0.5")
    temps = r.nums("mc", "temperatures")
    if any(not t > 0 for t in temps):
        raise ConfigError("[mc] temperatures: must be positive")
    return RunConfig(
        setup=setup, hold=hold, sweep_variable=variable, sweep_values=_sweep_values(r),
        series_anisotropy=series_a, series_shape=series_s, modes=modes,
        seed=r.integer("run", "seed", minimum=0),
        qdist_ratios=ratios, qdist_points=r.integer("qdist", "points", minimum=2),
        mc_ratios=mc_ratios, mc_samples=r.integer("mc", "samples", minimum=1),
        mc_temperatures=temps, mc_threshold=r.num("mc", "threshold", positive=True),
        oracle_phi0=r.nums("oracle", "phi0"), oracle_anisotropies=r.nums("oracle", "anisotropies"),
        oracle_thermal_ratio=r.num("oracle", "thermal_ratio", positive=True),
        oracle_tail=r.num("oracle", "tail", positive=True),
        oracle_n_max=r.integer("oracle", "n_max", minimum=1),
        oracle_n_sources=r.integer("oracle", "n_sources", minimum=2),
        oracle_tolerance=r.num("oracle", "tolerance", positive=True),
        oracle_point_tolerance=r.num("oracle", "point_tolerance", positive=True),
        out=cp.get("run", "out") if cp.has_option("run", "out") else None,
        source={s: dict(cp.items(s)) for s in cp.sections()},
    )
