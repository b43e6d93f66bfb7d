"""Central spin coupled to a bath of independent spins.

Model (hbar = 1)::

    H = (Omega/2) sz_c + sum_i w_i sx_i + sz_c (x) sum_i l_i sz_i

The central spin starts in cos(theta0/2)|0> + sin(theta0/2)|1> and each bath
spin in its own pure state. Because the coupling commutes with sz_c, the
populations of the central spin are frozen and only the coherence decays,
multiplied by the decoherence factor F(t).

Time arguments accept scalars or numpy arrays; everything broadcasts.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

SQRT_HALF = math.sqrt(0.5)

#: chunk length used when a very long time grid is sampled
_CHUNK = 1 << 18


@dataclass(frozen=True)
class CentralSpinParams:
    """Frequency and initial Bloch angle of the central qubit."""

    omega: float = 1.0
    theta0: float = 0.0

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError(f"central spin frequency must be > 0, got {self.omega}")
        if not 0.0 <= self.theta0 <= math.pi:
            raise ValueError(f"theta0 must lie in [0, pi], got {self.theta0}")

    @property
    def alpha(self) -> float:
        return math.cos(self.theta0 / 2)

    @property
    def beta(self) -> float:
        return math.sin(self.theta0 / 2)

    @property
    def period(self) -> float:
        """Duration of one (quasi) cycle, 2 pi / Omega."""
        return 2 * math.pi / self.omega


@dataclass(frozen=True)
class BathSpinParams:
    """One bath spin: self frequency, coupling and initial amplitudes (sz basis)."""

    omega: float
    lam: float
    amp0: complex = SQRT_HALF
    amp1: complex = SQRT_HALF

    def __post_init__(self):
        if self.omega < 0 or self.lam < 0:
            raise ValueError("bath frequency and coupling must be non-negative")
        norm = abs(self.amp0) ** 2 + abs(self.amp1) ** 2
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"initial bath state not normalised (|a0|^2+|a1|^2 = {norm!r})")

    @property
    def is_sigma_x_eigenstate(self) -> bool:
        # <sx> = 2 Re(conj(a0) a1) = +-1 exactly when <sy> = <sz> = 0
        return abs(abs(2 * (np.conj(self.amp0) * self.amp1).real) - 1.0) < 1e-12

    @property
    def state(self) -> np.ndarray:
        return np.array([self.amp0, self.amp1], dtype=complex)


@dataclass(frozen=True)
class BathModel:
    spins: tuple[BathSpinParams, ...]
    _groups: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        spins = tuple(self.spins)
        if not spins:
            raise ValueError("bath needs at least one spin")
        object.__setattr__(self, "spins", spins)
        counts = Counter((s.omega, s.lam) for s in spins)
        object.__setattr__(self, "_groups", tuple(sorted(counts.items())))

    @classmethod
    def homogeneous(cls, n: int, omega: float, lam: float,
                    amp0: complex = SQRT_HALF, amp1: complex = SQRT_HALF) -> BathModel:
        if n < 1:
            raise ValueError(f"bath size must be >= 1, got {n}")
        spin = BathSpinParams(omega, lam, amp0, amp1)
        return cls((spin,) * n)

    @property
    def n(self) -> int:
        return len(self.spins)

    @property
    def is_homogeneous(self) -> bool:
        return len(set(self.spins)) == 1

    @property
    def has_real_factor(self) -> bool:
        """True when every spin starts in a sx eigenstate (closed-form F is exact)."""
        return all(s.is_sigma_x_eigenstate for s in self.spins)

    @property
    def effective_coupling_sq(self) -> float:
        """sum_i (l_i/w_i)^2, i.e. N (lambda/omega)^2 for a homogeneous bath."""
        total = 0.0
        for s in self.spins:
            if s.lam == 0:
                continue
            if s.omega == 0:
                return math.inf
            total += (s.lam / s.omega) ** 2
        return total

    @property
    def max_dressed_frequency(self) -> float:
        return max(dressed_frequency(s) for s in self.spins)

    def frequency_groups(self) -> tuple[tuple[tuple[float, float], int], ...]:
        """Distinct (omega, lambda) pairs with their multiplicities."""
        return self._groups


def random_bath(n: int, rng: np.random.Generator, omega_range=(0.0, 2.0),
                lambda_range=(0.0, 2.0), sigma_x: bool = False) -> BathModel:
    """Heterogeneous bath with uniform parameters and Haar-random initial states.

    With ``sigma_x=True`` every spin starts in (|0>+|1>)/sqrt(2).
    """
    spins = []
    for _ in range(n):
        w = rng.uniform(*omega_range)
        lam = rng.uniform(*lambda_range)
        if sigma_x:
            spins.append(BathSpinParams(w, lam))
            continue
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        v /= np.linalg.norm(v)
        spins.append(BathSpinParams(w, lam, complex(v[0]), complex(v[1])))
    return BathModel(tuple(spins))


def dressed_frequency(spin: BathSpinParams) -> float:
    return math.hypot(spin.omega, spin.lam)


def _factor(omega: float, lam: float, t):
    r = math.hypot(omega, lam)
    if r == 0.0:
        return np.ones_like(np.asarray(t, dtype=float))
    return 1.0 - 2.0 * (lam / r) ** 2 * np.sin(r * np.asarray(t, dtype=float)) ** 2


def single_spin_factor(spin: BathSpinParams, t):
    """1 - 2 l^2/(w^2+l^2) sin^2(sqrt(w^2+l^2) t); identically 1 for w = l = 0."""
    return _factor(spin.omega, spin.lam, t)


def decoherence_factor(bath: BathModel, t):
    """Closed-form F(t) as a product over bath spins.

    Identical spins are grouped and raised to their multiplicity, so a
    homogeneous bath costs a single power regardless of N.
    """
    t = np.asarray(t, dtype=float)
    out = np.ones_like(t)
    for (omega, lam), count in bath.frequency_groups():
        out = out * _factor(omega, lam, t) ** count
    return out


def log_decoherence_factor(bath: BathModel, t):
    """sum_i log f_i(t); only meaningful where every factor is positive."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    for (omega, lam), count in bath.frequency_groups():
        out = out + count * np.log(_factor(omega, lam, t))
    return out


def mean_time_averaged_factor(bath: BathModel, horizon: float, samples: int,
                              seed: int = 0) -> tuple[float, float]:
    """Empirical time average of F and its standard deviation on [0, horizon].

    Times are drawn uniformly at random (seeded) to avoid aliasing against the
    bath periods.
    """
    if not horizon > 0:
        raise ValueError(f"horizon must be positive, got {horizon}")
    if samples < 2:
        raise ValueError(f"need at least 2 samples, got {samples}")
    rng = np.random.default_rng(seed)
    total = 0.0
    total_sq = 0.0
    left = samples
    while left:
        m = min(left, _CHUNK)
        f = decoherence_factor(bath, rng.uniform(0.0, horizon, size=m))
        total += float(f.sum())
        total_sq += float(np.dot(f, f))
        left -= m
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0)
    return mean, math.sqrt(var)


def reduced_density_matrix(central: CentralSpinParams, f, t=0.0) -> np.ndarray:
    """Central-spin density matrix with coherence alpha*beta*f*exp(-i Omega t).

    ``f`` and ``t`` broadcast; the result has shape ``broadcast_shape + (2, 2)``.
    """
    f = np.asarray(f)
    if np.any(np.abs(f) > 1.0 + 1e-12):
        raise ValueError("decoherence factor with |f| > 1 is unphysical")
    t = np.asarray(t, dtype=float)
    a, b = central.alpha, central.beta
    coh = a * b * f * np.exp(-1j * central.omega * t)
    shape = np.broadcast(f, t).shape
    rho = np.empty(shape + (2, 2), dtype=complex)
    rho[..., 0, 0] = a * a
    rho[..., 1, 1] = b * b
    rho[..., 0, 1] = coh
    rho[..., 1, 0] = np.conj(coh)
    return rho


def is_density_matrix(rho: np.ndarray, atol: float = 1e-12) -> bool:
    rho = np.asarray(rho)
    if not np.allclose(rho, np.conj(np.swapaxes(rho, -1, -2)), rtol=0, atol=atol):
        return False
    if np.any(np.abs(np.trace(rho, axis1=-2, axis2=-1) - 1.0) > atol):
        return False
    return bool(np.all(np.linalg.eigvalsh(rho) >= -atol))


def is_unitary(u: np.ndarray, atol: float = 1e-10) -> bool:
    u = np.asarray(u)
    prod = np.conj(np.swapaxes(u, -1, -2)) @ u
    return bool(np.max(np.abs(prod - np.eye(u.shape[-1]))) < atol)


def bath_from_rows(rows: Iterable[Iterable[float]]) -> BathModel:
    """Build a bath from (omega, lambda, a0_re, a0_im, a1_re, a1_im) rows."""
    spins = []
    for row in rows:
        w, lam, a0r, a0i, a1r, a1i = (float(x) for x in row)
        spins.append(BathSpinParams(w, lam, complex(a0r, a0i), complex(a1r, a1i)))
    return BathModel(tuple(spins))
