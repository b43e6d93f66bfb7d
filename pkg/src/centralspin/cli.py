"""Command line interface.

Exit codes: 0 success, 1 validation failure, 2 bad configuration or usage,
3 output not writable, 4 phase computation failed.
"""
from __future__ import annotations

import argparse
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import experiments as ex
from .config import ConfigError, load_config
from .model import decoherence_factor
from .oracle import decoherence_factor_exact
from .phase import (
    DegenerateBranchError,
    QuadratureSpec,
    gp_exact,
    gp_kinematic,
    gp_perturbative,
    unitary_gp,
)
from .quadrature import QuadratureError
from .validate import run_validation

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CONFIG = 2
EXIT_OUTPUT = 3
EXIT_PHASE = 4

EXPERIMENTS = ("fig1", "fig2", "fig3", "fig4", "fig5", "dispersion")
DISPERSION_SIZES = (2, 4, 8, 16, 32, 64)


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _num(x) -> str:
    return format(float(x), ".17g")


def _out_dir(path: str) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise CliError(f"output directory {out} not writable: {exc}", EXIT_OUTPUT) from exc
    return out


def _spec(args) -> QuadratureSpec:
    return QuadratureSpec(tolerance=args.tol)


def cmd_decoherence(args, cfg) -> int:
    if not args.t_max > 0 or args.steps < 2:
        raise CliError("need --t-max > 0 and --steps >= 2", EXIT_CONFIG)
    out = _out_dir(args.out)
    t = np.linspace(0.0, args.t_max, args.steps)
    closed = decoherence_factor(cfg.bath, t)
    exact = decoherence_factor_exact(cfg.bath, t)
    path = out / "decoherence.csv"
    try:
        ex.write_csv(path, ["t", "F_closed", "Re_F_exact", "Im_F_exact"],
                     zip(t, closed, exact.real, exact.imag))
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc}", EXIT_OUTPUT) from exc
    diff = float(np.max(np.abs(closed - exact)))
    print(f"rows={len(t)} max_abs_diff={diff:.3e} sigma_x_bath={str(cfg.bath.has_real_factor).lower()} "
          f"csv={path}")
    return EXIT_OK


def cmd_gp(args, cfg) -> int:
    central, bath = cfg.central, cfg.bath
    spec = _spec(args)
    cycles = args.cycles
    try:
        exact = gp_exact(central, bath, cycles, spec)
    except (QuadratureError, ValueError) as exc:
        print(f"error: gp_exact failed: {exc}", file=sys.stderr)
        return EXIT_PHASE
    try:
        kin = gp_kinematic(central, bath, cycles, spec).phase
        kin_status = "ok"
    except (DegenerateBranchError, QuadratureError) as exc:
        kin, kin_status = math.nan, type(exc).__name__
    unitary = cycles * float(unitary_gp(central.theta0))
    if bath.is_homogeneous and bath.spins[0].omega > 0:
        s = bath.spins[0]
        pert = gp_perturbative(central, bath.n, s.omega, s.lam, cycles=cycles)
    else:
        pert = math.nan
    dev_exact = exact.phase - unitary
    dev_pert = pert - unitary
    consistent = abs(exact.phase - pert) < 0.01 * abs(dev_exact)
    fields = [
        ("gp_exact", _num(exact.phase)),
        ("gp_kinematic", _num(kin)),
        ("gp_perturbative", _num(pert)),
        ("gp_unitary", _num(unitary)),
        ("deviation_exact", _num(dev_exact)),
        ("deviation_pert", _num(dev_pert)),
        ("quadrature_error", _num(exact.estimated_error)),
        ("evaluations", str(exact.evaluations)),
        ("kinematic_status", kin_status),
        ("weak_coupling_consistent", str(consistent).lower()),
    ]
    print(" ".join(f"{k}={v}" for k, v in fields))
    return EXIT_OK


_FIG_PLOTS = {
    "fig1": ex.PlotSpec("Exact geometric phase, N=10", "theta0", "lambda",
                        ["using 1:2:5 with points palette pt 7 ps 0.6 title 'gp_exact'"],
                        "set zlabel 'phase'", surface=True),
}


def _comparison_plot(title: str) -> ex.PlotSpec:
    using = []
    for th in ex.DEFAULT_ANGLES:
        sel = f"(abs($1-{th:.17g})<1e-9"
        using.append(f"using 2:{sel} ? $5 : 1/0) with lines title 'exact theta0={th / math.pi:.2g}pi'")
        using.append(f"using 2:{sel} ? $6 : 1/0) with linespoints pt 6 title 'pert theta0={th / math.pi:.2g}pi'")
    return ex.PlotSpec(title, "lambda", "phase", using)


def _deviation_plot() -> ex.PlotSpec:
    using = []
    for lam in (0.05, 0.1):
        for n in (10, 100):
            sel = f"(($3=={n} && abs($2-{lam:g})<1e-12)"
            using.append(f"using 1:{sel} ? $8 : 1/0) with lines title 'exact N={n} lambda={lam:g}'")
            using.append(f"using 1:{sel} ? $9 : 1/0) with linespoints pt 6 title 'pert N={n} lambda={lam:g}'")
    return ex.PlotSpec("Deviation from the unitary phase", "theta0", "deviation", using)


def _winding_plot(labels) -> ex.PlotSpec:
    using = [f"using 7:(strcol(1) eq '{lab}' ? $9 : 1/0) with linespoints title '{lab}'" for lab in labels]
    return ex.PlotSpec("Phase of m cycles over phase of one cycle", "m", "ratio", using)


def _winding_cases(cfg, explicit: bool):
    if not explicit or not cfg.bath.is_homogeneous:
        return ex.default_winding_cases()
    s = cfg.bath.spins[0]
    th, n = cfg.central.theta0, cfg.bath.n
    cases = []
    for lam in (s.lam, 2 * s.lam):
        w = ex.commensurate_bath_frequency(lam, cfg.central.omega)
        cases.append(ex.WindingCase(f"commensurate_l{lam:g}", th, n, lam, w, True))
    cases.append(ex.WindingCase(f"config_l{s.lam:g}", th, n, s.lam, s.omega, False))
    return cases


def run_sweep(name: str, out: Path, spec: QuadratureSpec, workers: int = 1, seed: int = 0,
              cfg=None, explicit_config: bool = False) -> tuple[int, int, Path]:
    """Write ``<name>.csv`` and ``<name>.gp``; return (rows, failed cells, csv path)."""
    csv_path = out / f"{name}.csv"
    failed = 0
    if name in ("fig1", "fig2", "fig3", "fig4"):
        if name == "fig1":
            records = ex.figure1_surface(None, spec, workers)
            plot = _FIG_PLOTS["fig1"]
        elif name == "fig4":
            records = ex.deviation_vs_theta0(None, spec, workers)
            plot = _deviation_plot()
        else:
            n = 10 if name == "fig2" else 100
            records = ex.exact_vs_perturbative(ex.comparison_grid(n), spec, workers)
            plot = _comparison_plot(f"Exact vs perturbative phase, N={n}")
        rows = ex.write_records(csv_path, records)
        failed = sum(not r.ok for r in records)
    elif name == "fig5":
        cases = _winding_cases(cfg, explicit_config)
        table = ex.winding_table(cases, 10, spec)
        header = ["case", "commensurate", "theta0", "n", "lambda", "omega", "m", "gp_exact", "ratio"]
        rows = ex.write_csv(csv_path, header, ([r[h] for h in header] for r in table))
        plot = _winding_plot([c.label for c in cases])
    elif name == "dispersion":
        table, fit = ex.dispersion_vs_n(DISPERSION_SIZES, 1.0, 0.3, seed=seed)
        rows = ex.write_csv(csv_path, ["n", "mean", "dispersion"], table)
        with open(out / "dispersion_fit.txt", "w", encoding="ascii") as fh:
            fh.write((fit.describe() if fit else "fit unavailable") + "\n")
        plot = ex.PlotSpec("Time-averaged dispersion of F", "N", "dispersion",
                           ["using 1:3 with linespoints title 'dispersion'",
                            "using 1:2 with linespoints title 'mean'"], "set logscale xy")
    else:
        raise CliError(f"unknown experiment {name!r}; choose from {', '.join(EXPERIMENTS)}", EXIT_CONFIG)
    (out / f"{name}.gp").write_text(ex.gnuplot_script(csv_path.name, plot), encoding="ascii")
    return rows, failed, csv_path


def cmd_sweep(args, cfg) -> int:
    if args.experiment not in EXPERIMENTS:
        raise CliError(f"unknown experiment {args.experiment!r}; choose from {', '.join(EXPERIMENTS)}",
                       EXIT_CONFIG)
    out = _out_dir(args.out)
    start = time.perf_counter()
    try:
        rows, failed, path = run_sweep(args.experiment, out, _spec(args), args.workers, args.seed,
                                       cfg, args.config is not None)
    except OSError as exc:
        raise CliError(f"cannot write sweep output: {exc}", EXIT_OUTPUT) from exc
    print(f"experiment={args.experiment} rows={rows} failed={failed} csv={path}")
    if args.experiment == "dispersion":
        print((out / "dispersion_fit.txt").read_text().strip())
    # timing goes to stderr so stdout stays reproducible
    print(f"wall_time={time.perf_counter() - start:.2f}s", file=sys.stderr)
    return EXIT_OK


def cmd_validate(args, cfg) -> int:
    results = run_validation(cfg.central, cfg.bath, args.seed, _spec(args))
    for r in results:
        print(r.line())
    sign = next(r for r in results if r.name == "sign_determination")
    print(f"perturbative_sign={int(sign.value):+d} evidence: {sign.detail}")
    return EXIT_OK if all(r.passed for r in results) else EXIT_VALIDATION


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="TOML file with [system] and [bath] sections")
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--tol", type=float, default=1e-10, help="quadrature tolerance")
    common.add_argument("--workers", type=int, default=1, help="sweep worker processes")
    common.add_argument("--seed", type=int, default=0, help="seed for random baths and sampling")
    common.add_argument("--cycles", type=int, default=1, help="number of quasi-cycles")

    ap = argparse.ArgumentParser(prog="centralspin",
                                 description="Decoherence and geometric phase of a central spin in a spin bath.")
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("decoherence", parents=[common], help="time series of F(t)")
    p.add_argument("--t-max", type=float, default=20.0)
    p.add_argument("--steps", type=int, default=2001)
    sub.add_parser("gp", parents=[common], help="geometric phase for the configured system")
    p = sub.add_parser("sweep", parents=[common], help="regenerate a figure's data")
    p.add_argument("experiment", help=f"one of {', '.join(EXPERIMENTS)}")
    sub.add_parser("validate", parents=[common], help="run the oracle cross-checks")
    return ap


COMMANDS = {"decoherence": cmd_decoherence, "gp": cmd_gp, "sweep": cmd_sweep, "validate": cmd_validate}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if not args.tol > 0:
            raise CliError("--tol must be positive", EXIT_CONFIG)
        if args.workers < 1:
            raise CliError("--workers must be >= 1", EXIT_CONFIG)
        if args.cycles < 1:
            raise CliError("--cycles must be >= 1", EXIT_CONFIG)
        try:
            cfg = load_config(args.config)
        except ConfigError as exc:
            raise CliError(f"config error: {exc}", EXIT_CONFIG) from exc
        return COMMANDS[args.command](args, cfg)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
