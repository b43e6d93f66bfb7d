"""Parameter sweeps behind the figures, with CSV and gnuplot output.

Every cell of a sweep is independent; cells run on a process pool and the
rows are sorted by (n, theta0, lambda, cycles) before anything is written, so
output is byte-identical regardless of worker count.
"""
from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import astuple, dataclass, field, fields
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .model import BathModel, CentralSpinParams, mean_time_averaged_factor
from .phase import (
    QuadratureSpec,
    gp_exact,
    gp_perturbative,
    unitary_gp,
)

DISAGREEMENT_THRESHOLD = 0.05


@dataclass(frozen=True)
class SweepGrid:
    theta0_values: tuple[float, ...]
    lambda_values: tuple[float, ...]
    n_values: tuple[int, ...]
    omega_ratio: float = 1.0
    cycles: int = 1

    def __post_init__(self):
        for name in ("theta0_values", "lambda_values", "n_values"):
            vals = tuple(getattr(self, name))
            if not vals:
                raise ValueError(f"{name} must be non-empty")
            object.__setattr__(self, name, vals)
        if any(not 0 <= th <= math.pi for th in self.theta0_values):
            raise ValueError("theta0 values must lie in [0, pi]")
        if any(lam < 0 for lam in self.lambda_values):
            raise ValueError("couplings must be non-negative")
        if any(n < 1 for n in self.n_values):
            raise ValueError("bath sizes must be >= 1")
        if not self.omega_ratio > 0:
            raise ValueError("omega_ratio must be positive")
        if self.cycles < 1:
            raise ValueError("cycles must be >= 1")

    def cells(self):
        for n in self.n_values:
            for th in self.theta0_values:
                for lam in self.lambda_values:
                    yield n, th, lam


DEFAULT_LAMBDAS = tuple(np.linspace(0.0, 0.2, 51).tolist())
DEFAULT_ANGLES = tuple(f * math.pi for f in (0.1, 0.25, 0.5, 0.75))


def figure1_grid() -> SweepGrid:
    return SweepGrid(tuple(np.linspace(0.0, math.pi, 41).tolist()), DEFAULT_LAMBDAS, (10,))


def comparison_grid(n: int) -> SweepGrid:
    """Exact versus perturbative at fixed bath size (10 and 100 by default)."""
    return SweepGrid(DEFAULT_ANGLES, DEFAULT_LAMBDAS, (n,))


def deviation_grid() -> SweepGrid:
    return SweepGrid(tuple(np.linspace(0.0, math.pi, 41).tolist()), (0.05, 0.1), (10, 100))


@dataclass
class SweepRecord:
    theta0: float
    lambda_: float
    n: int
    cycles: int
    gp_exact: float
    gp_perturbative: float
    gp_unitary: float
    deviation_exact: float
    deviation_pert: float
    quadrature_error: float
    disagree: bool = False
    status: str = "ok"

    def __post_init__(self):
        expected = math.pi * (1 + math.cos(self.theta0))
        if abs(self.gp_unitary - expected) > 1e-12:
            raise AssertionError(f"inconsistent unitary phase {self.gp_unitary} != {expected}")

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def record_fields() -> list[str]:
    return [f.name.rstrip("_") for f in fields(SweepRecord)]


def evaluate_cell(n: int, theta0: float, lam: float, omega_ratio: float = 1.0,
                  cycles: int = 1, spec: QuadratureSpec = QuadratureSpec()) -> SweepRecord:
    """One homogeneous-bath cell with Omega = 1 and omega = omega_ratio."""
    central = CentralSpinParams(1.0, theta0)
    bath = BathModel.homogeneous(n, omega_ratio, lam)
    unitary = float(unitary_gp(theta0))
    pert = gp_perturbative(central, n, omega_ratio, lam, cycles=cycles)
    try:
        res = gp_exact(central, bath, cycles, spec)
    except (RuntimeError, ValueError) as exc:
        nan = float("nan")
        return SweepRecord(theta0, lam, n, cycles, nan, pert, unitary, nan,
                           pert - cycles * unitary, nan, False, type(exc).__name__)
    cycle_unitary = cycles * unitary
    scale = max(abs(res.phase), 1e-12)
    return SweepRecord(
        theta0, lam, n, cycles, res.phase, pert, unitary,
        res.phase - cycle_unitary, pert - cycle_unitary, res.estimated_error,
        abs(res.phase - pert) > DISAGREEMENT_THRESHOLD * scale,
    )


def _cell_job(args):
    return evaluate_cell(*args)


def run_grid(grid: SweepGrid, spec: QuadratureSpec = QuadratureSpec(),
             workers: int = 1) -> list[SweepRecord]:
    jobs = [(n, th, lam, grid.omega_ratio, grid.cycles, spec) for n, th, lam in grid.cells()]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_cell_job, jobs, chunksize=max(1, len(jobs) // (8 * workers))))
    else:
        records = [_cell_job(j) for j in jobs]
    records.sort(key=lambda r: (r.n, r.theta0, r.lambda_, r.cycles))
    return records


def figure1_surface(grid: SweepGrid | None = None, spec: QuadratureSpec = QuadratureSpec(),
                    workers: int = 1) -> list[SweepRecord]:
    return run_grid(grid or figure1_grid(), spec, workers)


def exact_vs_perturbative(grid: SweepGrid | None = None, spec: QuadratureSpec = QuadratureSpec(),
                          workers: int = 1) -> list[SweepRecord]:
    grid = grid or SweepGrid(DEFAULT_ANGLES, DEFAULT_LAMBDAS, (10, 100))
    return run_grid(grid, spec, workers)


def deviation_vs_theta0(grid: SweepGrid | None = None, spec: QuadratureSpec = QuadratureSpec(),
                        workers: int = 1) -> list[SweepRecord]:
    return run_grid(grid or deviation_grid(), spec, workers)


def commensurate_bath_frequency(lam: float, omega_sys: float = 1.0, harmonic: int = 2) -> float:
    """Bath frequency whose dressed period pi/sqrt(w^2+l^2) divides 2 pi/Omega.

    The dressed frequency is set to harmonic * Omega / 2.
    """
    dressed = harmonic * omega_sys / 2
    if lam >= dressed:
        raise ValueError(f"coupling {lam} too large for harmonic {harmonic}")
    return math.sqrt(dressed ** 2 - lam ** 2)


def winding_ratio(central: CentralSpinParams, bath: BathModel, m_max: int,
                  spec: QuadratureSpec = QuadratureSpec()) -> list[tuple[int, float, float]]:
    """Rows (m, gp_exact over m cycles, ratio to the single-cycle phase)."""
    if m_max < 2:
        raise ValueError("m_max must be >= 2")
    one = gp_exact(central, bath, 1, spec).phase
    rows = [(1, one, 1.0)]
    for m in range(2, m_max + 1):
        gp = gp_exact(central, bath, m, spec).phase
        rows.append((m, gp, gp / one))
    return rows


@dataclass(frozen=True)
class WindingCase:
    label: str
    theta0: float
    n: int
    lam: float
    omega: float
    commensurate: bool


def default_winding_cases() -> list[WindingCase]:
    cases = []
    for lam in (0.05, 0.1):  # effective couplings differ by 4x
        cases.append(WindingCase(f"commensurate_l{lam:g}", math.pi / 2, 10, lam,
                                 commensurate_bath_frequency(lam), True))
    cases.append(WindingCase("incommensurate_l0.05", math.pi / 2, 10, 0.05, 0.7, False))
    return cases


def winding_table(cases: Sequence[WindingCase], m_max: int = 10,
                  spec: QuadratureSpec = QuadratureSpec()) -> list[dict]:
    rows = []
    for case in cases:
        central = CentralSpinParams(1.0, case.theta0)
        bath = BathModel.homogeneous(case.n, case.omega, case.lam)
        for m, gp, ratio in winding_ratio(central, bath, m_max, spec):
            rows.append({"case": case.label, "commensurate": case.commensurate,
                         "theta0": case.theta0, "n": case.n, "lambda": case.lam,
                         "omega": case.omega, "m": m, "gp_exact": gp, "ratio": ratio})
    return rows


@dataclass
class DispersionFit:
    power_slope: float
    power_residual: float
    exp_slope: float
    exp_residual: float

    def describe(self) -> str:
        return (f"log(dispersion) vs log(N): slope={self.power_slope:.6g} rms_residual={self.power_residual:.3g}; "
                f"log(dispersion) vs N: slope={self.exp_slope:.6g} rms_residual={self.exp_residual:.3g}")


def _linfit(x, y) -> tuple[float, float]:
    coef = np.polyfit(x, y, 1)
    resid = y - np.polyval(coef, x)
    return float(coef[0]), float(np.sqrt(np.mean(resid ** 2)))


def dispersion_vs_n(n_values: Iterable[int], omega: float = 1.0, lam: float = 0.3,
                    horizon: float = 1e4 * 2 * math.pi, samples: int = 10 ** 6,
                    seed: int = 0) -> tuple[list[tuple[int, float, float]], DispersionFit | None]:
    """Rows (N, time-averaged F, dispersion) plus log-log and semi-log fits."""
    rows = []
    for n in n_values:
        mean, disp = mean_time_averaged_factor(BathModel.homogeneous(n, omega, lam),
                                               horizon, samples, seed)
        rows.append((n, mean, disp))
    usable = [(n, d) for n, _, d in rows if d > 0]
    fit = None
    if len(usable) >= 2:
        ns = np.array([u[0] for u in usable], dtype=float)
        logd = np.log([u[1] for u in usable])
        ps, pr = _linfit(np.log(ns), logd)
        es, er = _linfit(ns, logd)
        fit = DispersionFit(ps, pr, es, er)
    return rows, fit


# -- output -------------------------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> int:
    count = 0
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
            count += 1
    return count


def write_records(path: Path, records: Sequence[SweepRecord]) -> int:
    return write_csv(path, record_fields(), (astuple(r) for r in records))


def read_csv(path: Path) -> list[dict]:
    with open(path, newline="", encoding="ascii") as fh:
        return list(csv.DictReader(fh))


@dataclass
class PlotSpec:
    title: str
    xlabel: str
    ylabel: str
    using: list[str] = field(default_factory=list)
    extra: str = ""
    surface: bool = False


def gnuplot_script(csv_name: str, plot: PlotSpec) -> str:
    """gnuplot commands that render ``csv_name`` to a PNG next to it."""
    stem = Path(csv_name).stem
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        "set terminal pngcairo size 900,650",
        f"set output '{stem}.png'",
        f"set title '{plot.title}'",
        f"set xlabel '{plot.xlabel}'",
        f"set ylabel '{plot.ylabel}'",
    ]
    if plot.extra:
        lines.append(plot.extra)
    cmd = "splot" if plot.surface else "plot"
    parts = [f"'{csv_name}' {u}" for u in plot.using]
    lines.append(f"{cmd} " + ", \\\n     ".join(parts))
    return "\n".join(lines) + "\n"
