"""Command-line front end: every figure- and table-style artifact as data files.

Exit codes: 0 success (including empty results), 1 invalid configuration,
2 numerical failure.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .amplitude import PatternTarget, classify_branches, mu_thresholds, wna_coefficients
from .analysis import classify_pattern, cross_correlation, spectral_summary
from .config import SCHEMA, RunConfig, load_config
from .dispersion import dispersion_scan, turing_curve, turing_threshold
from .errors import ConfigError, NumericalError
from .io import (read_field_csv, read_raw, write_csv, write_field_csv, write_manifest,
                 write_pgm, write_raw)
from .model import (bifurcation_surface_scan, classify_equilibrium, coexistence_equilibria,
                    axial_equilibrium, nullclines, stable_coexistence, trivial_equilibrium,
                    solve_hopf)
from .simulate import run_to_steady

OUTDIR_ENV = "PREYPATTERNS_OUTDIR"


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2; config errors are 1
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", type=Path, default=None, help="key = value config file")
    sub.add_argument("--out", type=Path, default=None,
                     help=f"output directory (default: ${OUTDIR_ENV} or cwd)")
    sub.add_argument("--pretty", action="store_true",
                     help="round CSV values for reading instead of exact round-trip")
    for section in SCHEMA.values():
        for key in section:
            sub.add_argument(f"--{key}", dest=f"cfg_{key}", default=None, metavar="V")


def _resolve(args) -> tuple[RunConfig, Path]:
    overrides = {key: val for key, val in
                 ((k[4:], v) for k, v in vars(args).items() if k.startswith("cfg_"))
                 if val is not None}
    cfg = load_config(args.config, overrides)
    out = args.out or Path(os.environ.get(OUTDIR_ENV, "."))
    out.mkdir(parents=True, exist_ok=True)
    return cfg, out


def _finish(cfg: RunConfig, out: Path, artifacts: list[Path]) -> None:
    write_manifest(out, cfg.digest(), __version__, cfg["seed"], artifacts)


def cmd_equilibria(args) -> int:
    cfg, out = _resolve(args)
    p = cfg.model_params()
    rows = []
    for e in [trivial_equilibrium(), axial_equilibrium(p)] + coexistence_equilibria(p):
        stab, js = classify_equilibrium(e, p)
        stab = e.stability or stab
        rows.append((e.kind.value, e.u_star, e.v_star, stab.value, js.trace, js.det))
    n_coex = sum(1 for r in rows if r[0] == "Coexistence")
    files = [
        write_csv(out / "equilibria.csv",
                  ["kind", "u_star", "v_star", "stability", "trace", "det"],
                  rows, args.pretty),
        write_csv(out / "nullclines.csv", ["v", "n1", "n2"],
                  nullclines(p), args.pretty),
    ]
    _finish(cfg, out, files)
    print(f"coexistence_count = {n_coex}")
    return 0


def cmd_surface_scan(args) -> int:
    cfg, out = _resolve(args)
    scan = bifurcation_surface_scan(
        (cfg["scan_eta_min"], cfg["scan_eta_max"]),
        (cfg["scan_kappa_min"], cfg["scan_kappa_max"]),
        (cfg["scan_alpha_min"], cfg["scan_alpha_max"]),
        cfg["scan_count"])
    files = [write_csv(out / "surfaces.csv",
                       ["eta", "kappa", "alpha", "surface", "u_star", "v_star"],
                       ((pt.eta, pt.kappa, pt.alpha, pt.surface, pt.u_star, pt.v_star)
                        for pt in scan.points), args.pretty)]
    _finish(cfg, out, files)
    print(f"points = {len(scan.points)}")
    print(f"skipped = {scan.skipped}")
    return 0


def cmd_turing(args) -> int:
    cfg, out = _resolve(args)
    p = cfg.model_params()
    e = stable_coexistence(p)
    tp = turing_threshold(p, e)
    ks = np.linspace(1e-3, cfg["k_max"], cfg["k_count"])
    samples = dispersion_scan(ks, p, e)
    files = [
        write_csv(out / "turing_point.csv", ["sigma", "k_t", "d_t"],
                  [(tp.sigma, tp.k_t, tp.d_t)], args.pretty),
        write_csv(out / "dispersion_scan.csv",
                  ["k", "trace", "det", "re_lambda_plus", "im_lambda_plus"],
                  ((s.k, s.trace_k, s.det_k, s.lambda_plus.real, s.lambda_plus.imag)
                   for s in samples), args.pretty),
    ]
    _finish(cfg, out, files)
    print(f"k_t = {tp.k_t:.6f}")
    print(f"d_t = {tp.d_t:.6f}")
    return 0


def cmd_turing_curve(args) -> int:
    cfg, out = _resolve(args)
    etas = np.linspace(cfg["eta_min"], cfg["eta_max"], cfg["eta_count"])
    points, skipped = turing_curve(etas, cfg["kappa"], cfg["alpha"], cfg["sigma"])
    files = [write_csv(out / "turing_curve.csv", ["eta", "sigma", "k_t", "d_t"],
                       ((eta, tp.sigma, tp.k_t, tp.d_t) for eta, tp in points),
                       args.pretty)]
    hopf_rows = []
    for eta in etas:
        sol = solve_hopf(float(eta), cfg["kappa"])
        if sol is not None:
            hopf_rows.append((float(eta), sol[0]))
    files.append(write_csv(out / "hopf_thresholds.csv", ["eta", "alpha_h"],
                           hopf_rows, args.pretty))
    _finish(cfg, out, files)
    print(f"points = {len(points)}")
    print(f"skipped = {len(skipped)}")
    return 0


WNA_HEADER = ["sigma", "d_t", "k_t", "f1", "g1", "m1", "m2", "h0", "tau0", "d3", "d4"]
WNA_EXT_HEADER = WNA_HEADER + ["mu1", "mu2", "mu3", "mu4", "d1", "d2", "target"]


def _wna_rows(cfg: RunConfig):
    target = {"prey": PatternTarget.PREY, "predator": PatternTarget.PREDATOR}.get(
        cfg["target"].lower())
    if target is None:
        raise ConfigError(f"target must be prey or predator, got {cfg['target']!r}")
    for sigma in cfg["sigmas"]:
        p = cfg.model_params()
        p = type(p)(p.eta, p.kappa, p.alpha, p.d, float(sigma))
        e = stable_coexistence(p)
        tp = turing_threshold(p, e)
        yield wna_coefficients(p, e, tp, target)


def cmd_wna_table(args) -> int:
    cfg, out = _resolve(args)
    base, ext = [], []
    for c in _wna_rows(cfg):
        base.append((c.sigma, c.d_t, c.k_t, c.f1, c.g1, c.m1, c.m2, c.h0, c.tau0,
                     c.d3, c.d4))
        ext.append(base[-1] + (c.mu1, c.mu2, c.mu3, c.mu4, c.d1, c.d2, c.target.value))
    files = [
        write_csv(out / "wna_table.csv", WNA_HEADER, base, args.pretty),
        write_csv(out / "wna_table_extended.csv", WNA_EXT_HEADER, ext, args.pretty),
    ]
    _finish(cfg, out, files)
    print(f"rows = {len(base)}")
    return 0


def cmd_branches(args) -> int:
    cfg, out = _resolve(args)
    p = cfg.model_params()
    e = stable_coexistence(p)
    tp = turing_threshold(p, e)
    target = {"prey": PatternTarget.PREY, "predator": PatternTarget.PREDATOR}.get(
        cfg["target"].lower())
    if target is None:
        raise ConfigError(f"target must be prey or predator, got {cfg['target']!r}")
    c = wna_coefficients(p, e, tp, target)
    rows = []
    for br in classify_branches(c, p.d):
        amp = br.amplitude if isinstance(br.amplitude, float) else br.amplitude[0]
        lo, hi = br.mu_range if br.mu_range else (float("nan"), float("nan"))
        rows.append((br.kind.value, amp, br.stable, br.mu, lo, hi))
    files = [write_csv(out / "branches.csv",
                       ["kind", "amplitude", "stable", "mu", "mu_stable_lo", "mu_stable_hi"],
                       rows, args.pretty)]
    _finish(cfg, out, files)
    print(f"mu = {(c.d_t - p.d) / c.d_t:.6f}")
    return 0


def cmd_simulate(args) -> int:
    cfg, out = _resolve(args)
    p = cfg.model_params()
    e = stable_coexistence(p)
    sim_cfg = cfg.sim_config()
    thresholds = cfg.thresholds()
    grid = sim_cfg.grid
    files: list[Path] = []
    index_rows: list[tuple] = []
    class_rows: list[tuple] = []

    def on_snapshot(fp):
        tag = f"{len(class_rows):04d}"
        u_path = write_field_csv(out / f"u_{tag}.csv", fp.u)
        v_path = write_field_csv(out / f"v_{tag}.csv", fp.v)
        files.extend([u_path, v_path])
        index_rows.append((fp.time, u_path.name))
        index_rows.append((fp.time, v_path.name))
        if args.pgm:
            for fld, name in ((fp.u, f"u_{tag}.pgm"), (fp.v, f"v_{tag}.pgm")):
                img, sidecar = write_pgm(out / name, fld)
                files.extend([img, sidecar])
        if args.raw:
            for fld, name in ((fp.u, f"u_{tag}.bin"), (fp.v, f"v_{tag}.bin")):
                files.append(write_raw(out / name, fld))
        summary = spectral_summary(fp.u, grid, thresholds)
        label = classify_pattern(fp.u, grid, thresholds)
        try:
            corr = cross_correlation(fp.u, fp.v)
        except NumericalError:
            corr = float("nan")
        class_rows.append((fp.time, label.value, summary.dominant_k,
                           summary.angular_peaks, summary.power_fraction,
                           summary.skewness, corr))

    result = run_to_steady(sim_cfg, e, on_snapshot=on_snapshot)
    files.append(write_csv(out / "snapshots_index.csv", ["time", "filename"], index_rows))
    files.append(write_csv(
        out / "classification.csv",
        ["time", "class", "dominant_k", "angular_peaks", "power_fraction",
         "skewness", "uv_correlation"],
        class_rows, args.pretty))
    _finish(cfg, out, files)
    final_class = classify_pattern(result.final.u, grid, thresholds)
    print(f"converged = {str(result.converged).lower()}")
    print(f"t_final = {result.final.time}")
    print(f"class = {final_class.value}")
    return 0


def cmd_classify(args) -> int:
    cfg, out = _resolve(args)
    path = Path(args.field)
    field = read_raw(path) if path.suffix == ".bin" else read_field_csv(path)
    ny, nx = field.shape
    grid = type(cfg.grid())(nx, ny, cfg["dx"], cfg["dy"])
    thresholds = cfg.thresholds()
    summary = spectral_summary(field, grid, thresholds)
    label = classify_pattern(field, grid, thresholds)
    files = [write_csv(out / "classification.csv",
                       ["time", "class", "dominant_k", "angular_peaks",
                        "power_fraction", "skewness", "uv_correlation"],
                       [(0.0, label.value, summary.dominant_k, summary.angular_peaks,
                         summary.power_fraction, summary.skewness, float("nan"))],
                       args.pretty)]
    _finish(cfg, out, files)
    print(f"class = {label.value}")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="preypatterns",
                     description="Pattern selection for a nonlocal prey-predator model")
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)
    table = {
        "equilibria": cmd_equilibria,
        "surface-scan": cmd_surface_scan,
        "turing": cmd_turing,
        "turing-curve": cmd_turing_curve,
        "wna-table": cmd_wna_table,
        "branches": cmd_branches,
        "simulate": cmd_simulate,
        "classify": cmd_classify,
    }
    for name, fn in table.items():
        sub = subs.add_parser(name)
        _add_common(sub)
        if name == "simulate":
            sub.add_argument("--pgm", action="store_true", help="also write PGM images")
            sub.add_argument("--raw", action="store_true", help="also write raw binary")
        if name == "classify":
            sub.add_argument("field", help="field snapshot (.csv or .bin)")
        sub.set_defaults(fn=fn)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
