"""Command-line front end.

Subcommands: ``qdist``, ``mc-validate``, ``visibility``, ``oracle-compare``.
Exit status: 0 on success or pass, 1 on a failed validation, 2 on a
configuration or I/O error. Output is deterministic for a given config and
seed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import replace

import numpy as np

from .config import RunConfig, load_config, parse_list
from .errors import ConfigError, KdtliError, TruncationError
from .physics import CONSTANTS, LMaxPolicy, ShapeRatio, power_for_phase, thermal_ensemble
from .talbot import simulate_kdtli
from .thermal import cumulative_table, ks_distance, ks_two_sample, p_th, sample_thermal
from .visibility import (Mode, SweepSpec, evaluate, run_sweep, with_anisotropy,
                         with_shape_ratio)

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _write_text(path: str | None, text: str):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc}") from None


def _csv(header: str, columns: list, rows) -> str:
    buf = io.StringIO()
    buf.write(f"# {header}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


def _ratio_label(r: float) -> str:
    return "inf" if math.isinf(r) else repr(float(r))


# --------------------------------------------------------------------------


def cmd_qdist(cfg: RunConfig, ratios=None) -> tuple[str, int]:
    """Tables of p_th(q) per shape ratio on a uniform q grid."""
    ratios = tuple(ratios or cfg.qdist_ratios)
    q = np.linspace(0.0, 1.0, cfg.qdist_points + 1)
    rows = []
    for ratio in ratios:
        shape = ShapeRatio(ratio)
        dens = p_th(q, shape)
        for qi, pi in zip(q, dens):
            note = ""
            if shape.is_linear:
                if abs(qi - 0.5) < 1e-12:
                    note = "divergent"
            elif abs(qi - 2.0 / 3.0) < 1e-12:
                note = "divergent"
            elif abs(qi - 0.5) < 1e-12:
                note = "discontinuous"
            rows.append((_ratio_label(ratio), float(qi),
                         "inf" if math.isinf(pi) else float(pi), note))
    text = _csv(cfg.header() + f";ratios={','.join(map(_ratio_label, ratios))}",
                ["shape_ratio", "q", "p_th", "note"], rows)
    return text, EXIT_OK


def cmd_mc_validate(cfg: RunConfig, ratios=None, samples=None, advisory=False,
                    seed=None) -> tuple[str, int]:
    """KS distances between Monte Carlo and closed-form distributions."""
    n = samples or cfg.mc_samples
    seed = cfg.seed if seed is None else seed
    if n < 100_000 and not advisory:
        raise ConfigError(f"mc-validate needs at least 1e5 samples (got {n}); "
                          "pass --advisory for a smaller exploratory run")
    mol0 = cfg.setup.mol
    T0 = cfg.setup.ifm.temperature
    thr = cfg.mc_threshold
    report = {"samples": n, "seed": seed, "threshold": thr, "advisory": advisory,
              "parameters": cfg.header(), "shape_ratios": [], "temperature_pairs": []}
    ok = True
    ratios = tuple(ratios or cfg.mc_ratios)
    seeds = [int(x) for x in np.random.SeedSequence(seed).generate_state(3 * len(ratios))]
    t_lo, t_hi = cfg.mc_temperatures[0], cfg.mc_temperatures[-1]
    for i, ratio in enumerate(ratios):
        mol = with_shape_ratio(mol0, ratio)
        s = sample_thermal(n, T0, mol, seeds[3 * i])
        ks = ks_distance(s, cumulative_table(mol.shape))
        passed = ks < thr
        ok &= passed
        report["shape_ratios"].append({"shape_ratio": _ratio_label(ratio), "ks": ks,
                                       "pass": bool(passed)})
        a = sample_thermal(n, t_lo, mol, seeds[3 * i + 1])
        b = sample_thermal(n, t_hi, mol, seeds[3 * i + 2])
        ks2 = ks_two_sample(a, b)
        passed = ks2 < thr
        ok &= passed
        report["temperature_pairs"].append({"shape_ratio": _ratio_label(ratio),
                                            "T_low": t_lo, "T_high": t_hi, "ks": ks2,
                                            "pass": bool(passed)})
    report["pass"] = bool(ok)
    code = EXIT_OK if ok or advisory else EXIT_FAIL
    return _json(report), code


def cmd_visibility(cfg: RunConfig, modes=None) -> tuple[str, int]:
    """Sweep table, one row per (series, value, mode)."""
    modes = tuple(Mode.parse(m) for m in (modes or cfg.modes))
    base = cfg.setup
    series = [("", base)]
    if cfg.series_anisotropy:
        series = [(f"anisotropy={b!r}", replace(base, mol=with_anisotropy(base.mol, b, cfg.hold)))
                  for b in cfg.series_anisotropy]
    elif cfg.series_shape:
        series = [(f"shape_ratio={_ratio_label(s)}", replace(base, mol=with_shape_ratio(base.mol, s)))
                  for s in cfg.series_shape]
    rows = []
    for label, setup in series:
        spec = SweepSpec(cfg.sweep_variable, cfg.sweep_values, setup, hold=cfg.hold)
        for mode in modes:
            kw = {}
            if mode is Mode.ORACLE:
                kw = {"n_max": cfg.oracle_n_max, "n_sources": cfg.oracle_n_sources,
                      "tail": cfg.oracle_tail}
            table = run_sweep(spec, mode, **kw)
            for row in table.rows:
                if row.ok:
                    v = row.result.visibility
                    rows.append((label, row.value, v, abs(v), mode.value, ""))
                else:
                    rows.append((label, row.value, "nan", "nan", mode.value, row.error))
    text = _csv(cfg.header() + f";sweep={cfg.sweep_variable.value}",
                ["series", "sweep_value", "visibility_signed", "visibility_abs", "mode",
                 "error"], rows)
    return text, EXIT_OK


def cmd_oracle_compare(cfg: RunConfig, n_max=None) -> tuple[str, int]:
    """Talbot oracle against the closed-form thermal sum on a (phi0, anisotropy) grid."""
    n_max = n_max or cfg.oracle_n_max
    base = cfg.setup
    I = base.mol.I
    T = cfg.oracle_thermal_ratio * CONSTANTS.hbar**2 / (I * CONSTANTS.kB)
    policy = LMaxPolicy(tail=cfg.oracle_tail)
    report = {"parameters": cfg.header(), "oracle_temperature_K": T, "n_max": n_max,
              "tolerance": cfg.oracle_tolerance,
              "point_tolerance": cfg.oracle_point_tolerance, "points": []}
    ok = True
    max_dev = {"thermal": 0.0, "point_particle": 0.0}
    try:
        for beta in cfg.oracle_anisotropies:
            mol = with_anisotropy(base.mol, beta, "alpha_par")
            ens = thermal_ensemble(mol, T, policy)
            for phi0 in cfg.oracle_phi0:
                las = replace(base.las, power=power_for_phase(phi0, mol, base.las))
                setup = replace(base, mol=mol, las=las)
                pat = simulate_kdtli(setup, ens, n_max=n_max, n_sources=cfg.oracle_n_sources)
                ref = evaluate(setup, Mode.QUANTUM_SUM, T=T, policy=policy).visibility
                dev = abs(pat.signed_visibility - ref)
                key = "point_particle" if beta == 0 else "thermal"
                tol = cfg.oracle_point_tolerance if beta == 0 else cfg.oracle_tolerance
                max_dev[key] = max(max_dev[key], dev)
                ok &= dev < tol
                report["points"].append({"phi0": phi0, "anisotropy": beta,
                                         "oracle": pat.signed_visibility, "closed_form": ref,
                                         "deviation": dev, "pass": bool(dev < tol)})
    except TruncationError as exc:
        report["error"] = f"TruncationError: {exc}"
        ok = False
    report["max_deviation"] = max_dev
    report["pass"] = bool(ok)
    return _json(report), EXIT_OK if ok else EXIT_FAIL


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kdtli", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("qdist", "mc-validate", "visibility", "oracle-compare"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="INI run configuration")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out", help="output path (default: stdout)")
        sp.add_argument("--mode", help="comma list of sum, integral, classical, oracle")
        sp.add_argument("--ratios", help="comma list of I/I3 values (inf for linear)")
        sp.add_argument("--samples", type=int)
        sp.add_argument("--advisory", action="store_true",
                        help="report validation results without failing")
        sp.add_argument("--n-max", type=int, dest="n_max")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = replace(cfg, seed=args.seed)
        ratios = parse_list(args.ratios, "--ratios") if args.ratios else None
        if ratios and any(not r >= 0.5 for r in ratios):
            raise ConfigError("--ratios: shape ratios must be >= 0.5")
        if args.samples is not None and args.samples < 1:
            raise ConfigError("--samples must be positive")
        if args.n_max is not None and args.n_max < 1:
            raise ConfigError("--n-max must be positive")
        modes = None
        if args.mode:
            try:
                modes = [Mode.parse(m.strip()) for m in args.mode.split(",") if m.strip()]
            except KdtliError as exc:
                raise ConfigError(f"--mode: {exc}") from None
        out = args.out or cfg.out
        if args.command == "qdist":
            text, code = cmd_qdist(cfg, ratios)
        elif args.command == "mc-validate":
            text, code = cmd_mc_validate(cfg, ratios, args.samples, args.advisory)
        elif args.command == "visibility":
            text, code = cmd_visibility(cfg, modes)
        else:
            text, code = cmd_oracle_compare(cfg, args.n_max)
            if args.advisory:
                code = EXIT_OK
        _write_text(out, text)
        return code
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
