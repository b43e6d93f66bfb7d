"""Acceptance gate: one PASS/FAIL line per criterion in the terminal summary."""
import math
import time

import numpy as np
import pytest

from centralspin import cli
from centralspin.experiments import (
    commensurate_bath_frequency,
    dispersion_vs_n,
    read_csv,
    winding_ratio,
)
from centralspin.model import BathModel, CentralSpinParams, decoherence_factor, random_bath, reduced_density_matrix
from centralspin.oracle import decoherence_factor_exact, full_hilbert_reduced_density, trace_distance
from centralspin.phase import (
    DegenerateBranchError,
    PERTURBATIVE_SIGN,
    gp_exact,
    gp_kinematic,
    gp_perturbative,
    unitary_gp,
)
from centralspin.validate import run_validation

from conftest import ACCEPTANCE_LINES

SEED = 7


def record(number: int, title: str, passed: bool, detail: str):
    ACCEPTANCE_LINES.append(f"{'PASS' if passed else 'FAIL'} [{number:2d}] {title}: {detail}")
    assert passed, detail


def test_01_factor_oracle():
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(200):
        bath = random_bath(int(rng.integers(1, 11)), rng, (1e-9, 2.0), (1e-9, 2.0), sigma_x=True)
        t = rng.uniform(0.0, 100.0, size=1000)
        worst = max(worst, float(np.max(np.abs(decoherence_factor(bath, t) - decoherence_factor_exact(bath, t)))))
    record(1, "closed-form F vs propagator oracle", worst < 1e-10, f"max |dF| = {worst:.3e} (< 1e-10)")


def test_02_full_hilbert():
    rng = np.random.default_rng(SEED + 1)
    worst = 0.0
    for n in (1, 2, 4, 8):
        for _ in range(5):
            central = CentralSpinParams(float(rng.uniform(0.2, 2.0)), float(rng.uniform(0.0, math.pi)))
            bath = random_bath(n, rng, (0.0, 2.0), (0.0, 2.0))
            t = rng.uniform(0.0, 20.0, size=20)
            rho_full = full_hilbert_reduced_density(central, bath, t)
            rho = reduced_density_matrix(central, decoherence_factor_exact(bath, t), t)
            worst = max(worst, float(np.max(trace_distance(rho_full, rho))))
    record(2, "reduced state vs full-Hilbert partial trace", worst < 1e-8,
           f"max trace distance = {worst:.3e} (< 1e-8)")


def test_03_unitary_limit():
    worst = 0.0
    for k in range(11):
        theta0 = k * math.pi / 10
        bath = BathModel.homogeneous(10, 1.0, 0.0)
        gp = gp_exact(CentralSpinParams(1.0, theta0), bath).phase
        worst = max(worst, abs(gp - math.pi * (1 + math.cos(theta0))))
    record(3, "unitary limit", worst < 1e-9, f"max |gp - pi(1+cos theta0)| = {worst:.3e} (< 1e-9)")


def test_04_kinematic_reduction():
    rng = np.random.default_rng(SEED + 3)
    diffs, degenerate = [], 0
    for _ in range(50):
        central = CentralSpinParams(1.0, float(rng.uniform(0.05, math.pi - 0.05)))
        bath = random_bath(int(rng.integers(1, 11)), rng, (0.2, 2.0), (0.01, 0.5), sigma_x=True)
        try:
            kin = gp_kinematic(central, bath).phase
        except DegenerateBranchError:
            degenerate += 1
            continue
        diffs.append(abs(kin - gp_exact(central, bath).phase))
    worst = max(diffs)
    passed = degenerate == 0 and worst < 1e-6
    record(4, "kinematic phase equals exact phase", passed,
           f"max |gp_kinematic - gp_exact| = {worst:.3e} (< 1e-6), median {np.median(diffs):.3e}, "
           f"degenerate {degenerate}/50")


def test_05_perturbative_order():
    central = CentralSpinParams(1.0, math.pi / 2)
    exact = {lam: gp_exact(central, BathModel.homogeneous(10, 1.0, lam)).phase for lam in (0.04, 0.02)}
    resid = {lam: abs(exact[lam] - gp_perturbative(central, 10, 1.0, lam)) for lam in exact}
    ratio = resid[0.04] / resid[0.02]
    predicted = 10 * 0.02 ** 2 * math.pi
    rel = abs(abs(exact[0.02] - math.pi) - predicted) / predicted
    record(5, "perturbative residual order and magnitude", ratio >= 8 and rel < 0.15,
           f"residual ratio = {ratio:.3f} (>= 8), magnitude rel err = {rel:.2e} (< 0.15)")


def test_06_sign_determination():
    results = run_validation(CentralSpinParams(1.0, math.pi / 2), BathModel.homogeneous(10, 1.0, 0.05), seed=0)
    sign = next(r for r in results if r.name == "sign_determination")
    shifts = sign.evidence["shifts"]
    constant = len(shifts) == 20 and len({int(np.sign(s)) for s in shifts}) == 1
    record(6, "sign of the weak-coupling correction", constant and sign.passed and sign.value == PERTURBATIVE_SIGN,
           f"sign = {int(sign.value):+d} over {len(shifts)} configs, implemented s = {PERTURBATIVE_SIGN:+d}")


def test_07_effective_coupling_collapse():
    central = CentralSpinParams(1.0, 1.1)
    a = gp_perturbative(central, 10, 1.0, 0.1) - float(unitary_gp(1.1))
    b = gp_perturbative(central, 100, 1.0, 0.0316227766) - float(unitary_gp(1.1))
    rel = abs(a - b) / abs(a)
    record(7, "lambda_eff collapse", rel < 1e-3, f"relative difference = {rel:.3e} (< 1e-3)")


def test_08_winding():
    central = CentralSpinParams(1.0, math.pi / 2)
    curves = []
    for lam in (0.05, 0.1):  # lambda_eff^2 differs by 4x
        bath = BathModel.homogeneous(10, commensurate_bath_frequency(lam), lam)
        curves.append(np.array([r for _, _, r in winding_ratio(central, bath, 10)]))
    m = np.arange(1, 11)
    integer_err = max(float(np.max(np.abs(c - m) / m)) for c in curves)
    between = float(np.max(np.abs(curves[0] - curves[1]) / curves[0]))
    record(8, "winding ratio", integer_err < 0.01 and between < 0.01,
           f"max |ratio - m|/m = {integer_err:.3e} (< 0.01), curve change = {between:.3e} (< 0.01)")


def test_09_antipodal_null():
    rng = np.random.default_rng(SEED + 9)
    worst = 0.0
    for _ in range(20):
        bath = random_bath(int(rng.integers(1, 101)), rng, (0.01, 2.0), (0.0, 2.0), sigma_x=True)
        worst = max(worst, abs(gp_exact(CentralSpinParams(float(rng.uniform(0.3, 3.0)), math.pi), bath).phase))
    record(9, "antipodal null", worst < 1e-10, f"max |gp_exact(theta0=pi)| = {worst:.3e} (< 1e-10)")


def test_10_dispersion_decreasing():
    sizes = (2, 4, 8, 16, 32, 64)
    rows, fit = dispersion_vs_n(sizes, 1.0, 0.3)
    disp = [d for _, _, d in rows]
    decreasing = all(b < a for a, b in zip(disp, disp[1:]))
    record(10, "dispersion strictly decreasing in N", decreasing and fit is not None,
           "dispersion " + ", ".join(f"N={n}:{d:.4f}" for n, d in zip(sizes, disp))
           + ("; fit " + fit.describe() if fit else "; no fit"))


def test_11_figure_regeneration(tmp_path, capsys):
    runs, failed = [], 0
    start = time.perf_counter()
    for rep in range(2):
        out = tmp_path / f"run{rep}"
        for name in ("fig1", "fig2", "fig3", "fig4", "fig5"):
            assert cli.main(["sweep", name, "--out", str(out)]) == 0
            line = capsys.readouterr().out
            failed += int(dict(kv.split("=", 1) for kv in line.split())["failed"])
        runs.append(out)
    elapsed = (time.perf_counter() - start) / 2
    stable = all((runs[0] / f"{n}.csv").read_bytes() == (runs[1] / f"{n}.csv").read_bytes()
                 for n in ("fig1", "fig2", "fig3", "fig4", "fig5"))
    rows = len(read_csv(runs[0] / "fig1.csv"))
    record(11, "figure regeneration", failed == 0 and elapsed < 300 and stable,
           f"failed cells = {failed}, wall time per run = {elapsed:.1f}s (< 300 s), byte-stable = {stable}, "
           f"fig1 rows = {rows}")
