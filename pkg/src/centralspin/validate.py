"""Cross-checks of the closed forms against the brute-force oracle."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import (
    BathModel,
    CentralSpinParams,
    decoherence_factor,
    random_bath,
    reduced_density_matrix,
)
from .oracle import (
    MAX_FULL_HILBERT_SPINS,
    decoherence_factor_exact,
    full_hilbert_reduced_density,
    trace_distance,
)
from .phase import (
    PERTURBATIVE_SIGN,
    QuadratureSpec,
    gp_exact,
    gp_kinematic,
    gp_perturbative,
    unitary_gp,
)

FACTOR_TOL = 1e-10
RHO_TOL = 1e-8
KINEMATIC_TOL = 1e-6
ORDER_RATIO_MIN = 8.0
MAGNITUDE_RTOL = 0.15


@dataclass
class SuiteResult:
    name: str
    value: float
    threshold: float
    passed: bool
    detail: str = ""
    evidence: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = f"{status} {self.name}: value={self.value:.6g} threshold={self.threshold:g}"
        return f"{text} {self.detail}".rstrip()


def check_factor_oracle(bath: BathModel, rng: np.random.Generator, random_configs: int = 20,
                        times: int = 1000) -> SuiteResult:
    """Closed-form F against the propagator product on sigma_x baths."""
    baths = [bath] if bath.has_real_factor else []
    for _ in range(random_configs):
        n = int(rng.integers(1, 11))
        baths.append(random_bath(n, rng, (1e-3, 2.0), (1e-3, 2.0), sigma_x=True))
    worst = 0.0
    for b in baths:
        t = rng.uniform(0.0, 50.0, size=times)
        worst = max(worst, float(np.max(np.abs(decoherence_factor(b, t) - decoherence_factor_exact(b, t)))))
    return SuiteResult("factor_closed_vs_exact", worst, FACTOR_TOL, worst < FACTOR_TOL,
                       f"configs={len(baths)} times={times}")


def check_full_hilbert(central: CentralSpinParams, bath: BathModel, rng: np.random.Generator,
                       random_n: int = 4, times: int = 20) -> SuiteResult:
    """Reduced matrix from the factorised formula against the full-state partial trace."""
    cases = [(central, bath)] if bath.n <= MAX_FULL_HILBERT_SPINS else []
    cases.append((CentralSpinParams(float(rng.uniform(0.5, 2.0)), float(rng.uniform(0, math.pi))),
                  random_bath(random_n, rng, (0.0, 2.0), (0.0, 2.0))))
    worst = 0.0
    for c, b in cases:
        t = np.sort(rng.uniform(0.0, 10.0, size=times))
        rho_full = full_hilbert_reduced_density(c, b, t)
        rho_formula = reduced_density_matrix(c, decoherence_factor_exact(b, t), t)
        worst = max(worst, float(np.max(trace_distance(rho_full, rho_formula))))
    return SuiteResult("rho_formula_vs_full_hilbert", worst, RHO_TOL, worst < RHO_TOL,
                       f"configs={len(cases)} times={times}")


def check_kinematic(central: CentralSpinParams, bath: BathModel,
                    spec: QuadratureSpec = QuadratureSpec()) -> SuiteResult:
    if not bath.has_real_factor:
        return SuiteResult("kinematic_vs_exact", math.nan, KINEMATIC_TOL, False,
                           "skipped: complex decoherence factor")
    exact = gp_exact(central, bath, 1, spec).phase
    kin = gp_kinematic(central, bath, 1, spec).phase
    diff = abs(kin - exact)
    return SuiteResult("kinematic_vs_exact", diff, KINEMATIC_TOL, diff < KINEMATIC_TOL,
                       f"gp_exact={exact:.12g} gp_kinematic={kin:.12g}")


def check_perturbative_order(sign: int = PERTURBATIVE_SIGN,
                             spec: QuadratureSpec = QuadratureSpec()) -> SuiteResult:
    """Residual exact - perturbative at lambda and lambda/2 (N=10, w=Omega=1, theta0=pi/2)."""
    central = CentralSpinParams(1.0, math.pi / 2)
    residuals = []
    for lam in (0.04, 0.02):
        exact = gp_exact(central, BathModel.homogeneous(10, 1.0, lam), 1, spec).phase
        residuals.append(abs(exact - gp_perturbative(central, 10, 1.0, lam, sign=sign)))
        if lam == 0.02:
            shift = abs(exact - float(unitary_gp(central.theta0)))
            predicted = 10 * lam ** 2 * math.pi
            rel = abs(shift - predicted) / predicted
    ratio = residuals[0] / residuals[1] if residuals[1] > 0 else math.inf
    passed = ratio >= ORDER_RATIO_MIN and rel < MAGNITUDE_RTOL
    return SuiteResult("perturbative_order", ratio, ORDER_RATIO_MIN, passed,
                       f"residual(0.04)={residuals[0]:.6g} residual(0.02)={residuals[1]:.6g} "
                       f"magnitude_rel_err={rel:.4g} sign={sign:+d}")


def sign_configurations() -> list[tuple[CentralSpinParams, BathModel]]:
    """20 weak-coupling points: 5 angles x N in {1, 10} x lambda_eff^2 in {0.0025, 0.01}."""
    configs = []
    for theta0 in np.linspace(0.1, math.pi - 0.1, 5):
        for n in (1, 10):
            for leff2 in (0.0025, 0.01):
                lam = math.sqrt(leff2 / n)
                configs.append((CentralSpinParams(1.0, float(theta0)), BathModel.homogeneous(n, 1.0, lam)))
    return configs


def determine_sign(spec: QuadratureSpec = QuadratureSpec(),
                   implemented: int = PERTURBATIVE_SIGN) -> SuiteResult:
    """Sign of gp_exact - gp_unitary over the weak-coupling configurations."""
    shifts = []
    for central, bath in sign_configurations():
        shifts.append(gp_exact(central, bath, 1, spec).phase - float(unitary_gp(central.theta0)))
    signs = {int(np.sign(s)) for s in shifts}
    constant = len(signs) == 1 and 0 not in signs
    sign = signs.pop() if constant else 0
    passed = constant and sign == implemented
    return SuiteResult("sign_determination", float(sign), float(implemented), passed,
                       f"determined_sign={sign:+d} implemented_sign={implemented:+d} configs={len(shifts)} "
                       f"min_shift={min(shifts):.6g} max_shift={max(shifts):.6g}",
                       {"shifts": shifts, "sign": sign})


def run_validation(central: CentralSpinParams, bath: BathModel, seed: int = 0,
                   spec: QuadratureSpec = QuadratureSpec(),
                   sign: int = PERTURBATIVE_SIGN) -> list[SuiteResult]:
    rng = np.random.default_rng(seed)
    return [
        check_factor_oracle(bath, rng),
        check_full_hilbert(central, bath, rng),
        check_kinematic(central, bath, spec),
        check_perturbative_order(sign, spec),
        determine_sign(spec, sign),
    ]
