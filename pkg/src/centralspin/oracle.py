"""Brute-force reference evolution.

Two independent routes to the same physics:

* per-spin 2x2 propagators (closed-form Pauli exponentials), giving the exact
  complex decoherence factor for arbitrary bath initial states;
* the full 2^(N+1) dimensional state evolved under the complete Hamiltonian,
  followed by a partial trace over the bath.

Basis ordering of the full state: the central qubit is the most significant
bit and bath spin i (1-based) sits on bit N - i, i.e. after
``psi.reshape((2,) * (N + 1))`` axis 0 is the central spin and axis i is bath
spin i.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import BathModel, BathSpinParams, CentralSpinParams

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

#: largest bath handled by the full-Hilbert oracle
MAX_FULL_HILBERT_SPINS = 12
#: up to this size the Hamiltonian is diagonalised densely
MAX_EIGEN_SPINS = 8


@dataclass(frozen=True)
class PauliGenerator:
    """c0 I + cx sx + cy sy + cz sz."""

    cx: float = 0.0
    cy: float = 0.0
    cz: float = 0.0
    c0: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.norm) or not math.isfinite(self.c0):
            raise ValueError("generator coefficients must be finite")

    @property
    def norm(self) -> float:
        return math.sqrt(self.cx ** 2 + self.cy ** 2 + self.cz ** 2)

    def matrix(self) -> np.ndarray:
        return self.c0 * IDENTITY + self.cx * SIGMA_X + self.cy * SIGMA_Y + self.cz * SIGMA_Z


def pauli_exponential(g: PauliGenerator, t) -> np.ndarray:
    """exp(-i G t) for a 2x2 Pauli generator, shape ``t.shape + (2, 2)``."""
    t = np.asarray(t, dtype=float)
    r = g.norm
    phase = np.exp(-1j * g.c0 * t)[..., None, None]
    cos = np.cos(r * t)[..., None, None]
    if r == 0.0:
        return phase * cos * IDENTITY
    traceless = (g.cx * SIGMA_X + g.cy * SIGMA_Y + g.cz * SIGMA_Z) / r
    sin = np.sin(r * t)[..., None, None]
    return phase * (cos * IDENTITY - 1j * sin * traceless)


def series_exponential(a: np.ndarray, terms: int = 30) -> np.ndarray:
    """exp(A) by scaling and squaring of a truncated Taylor series.

    Deliberately shares nothing with :func:`pauli_exponential`; it is the
    cross-check for it.
    """
    a = np.asarray(a, dtype=complex)
    norm = np.linalg.norm(a, 1)
    squarings = max(0, int(math.ceil(math.log2(norm / 0.25)))) if norm > 0.25 else 0
    scaled = a / (2 ** squarings)
    result = np.eye(a.shape[0], dtype=complex)
    term = np.eye(a.shape[0], dtype=complex)
    for k in range(1, terms + 1):
        term = term @ scaled / k
        result = result + term
    for _ in range(squarings):
        result = result @ result
    return result


def single_spin_factor_exact(spin: BathSpinParams, t) -> np.ndarray:
    """<chi| exp(+i(w sx - l sz)t) exp(-i(w sx + l sz)t) |chi> (complex)."""
    u_plus = pauli_exponential(PauliGenerator(cx=spin.omega, cz=spin.lam), t)
    u_minus = pauli_exponential(PauliGenerator(cx=spin.omega, cz=-spin.lam), t)
    chi = spin.state
    left = u_minus @ chi
    right = u_plus @ chi
    return np.sum(np.conj(left) * right, axis=-1)


def decoherence_factor_exact(bath: BathModel, t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    out = np.ones(t.shape, dtype=complex)
    for spin in bath.spins:
        out = out * single_spin_factor_exact(spin, t)
    return out


# -- full Hilbert space -------------------------------------------------------

def initial_state(central: CentralSpinParams, bath: BathModel) -> np.ndarray:
    psi = np.array([central.alpha, central.beta], dtype=complex)
    for spin in bath.spins:
        psi = np.kron(psi, spin.state)
    return psi


def _embed(op: np.ndarray, site: int, n_sites: int) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for k in range(n_sites):
        out = np.kron(out, op if k == site else IDENTITY)
    return out


def build_hamiltonian(central: CentralSpinParams, bath: BathModel) -> np.ndarray:
    """Dense H_s + H_B + H_I (site 0 = central spin)."""
    sites = bath.n + 1
    h = 0.5 * central.omega * _embed(SIGMA_Z, 0, sites)
    v = np.zeros_like(h)
    for i, spin in enumerate(bath.spins, start=1):
        h = h + spin.omega * _embed(SIGMA_X, i, sites)
        v = v + spin.lam * _embed(SIGMA_Z, i, sites)
    return h + _embed(SIGMA_Z, 0, sites) @ v


def apply_hamiltonian(psi: np.ndarray, central: CentralSpinParams, bath: BathModel) -> np.ndarray:
    """H|psi> without forming H, using the tensor structure."""
    n = bath.n
    shape = (2,) * (n + 1)
    x = psi.reshape(shape)
    zc = np.array([1.0, -1.0]).reshape((2,) + (1,) * n)
    out = 0.5 * central.omega * zc * x
    v = np.zeros(shape)
    for i, spin in enumerate(bath.spins, start=1):
        out = out + spin.omega * np.flip(x, axis=i)
        zi = np.array([1.0, -1.0]).reshape((1,) * i + (2,) + (1,) * (n - i))
        v = v + spin.lam * zi
    out = out + zc * v * x
    return out.reshape(-1)


def central_block_hamiltonian(central: CentralSpinParams, bath: BathModel, sz: int) -> np.ndarray:
    """Real bath-space block of H for central sigma_z eigenvalue ``sz`` (+1 or -1).

    H commutes with the central sigma_z, so H = H_(+1) (+) H_(-1) with the
    central |0> half of the state vector first.
    """
    n = bath.n
    h = np.full(2 ** n, 0.5 * sz * central.omega)
    h = np.diag(h)
    x = np.array([[0.0, 1.0], [1.0, 0.0]])
    z = np.array([1.0, -1.0])
    diag = np.zeros(2 ** n)
    for i, spin in enumerate(bath.spins):
        left, right = 2 ** i, 2 ** (n - i - 1)
        h += spin.omega * np.kron(np.kron(np.eye(left), x), np.eye(right))
        diag += spin.lam * np.kron(np.kron(np.ones(left), z), np.ones(right))
    h[np.diag_indices_from(h)] += sz * diag
    return h


def hamiltonian_norm_bound(central: CentralSpinParams, bath: BathModel) -> float:
    return 0.5 * central.omega + sum(s.omega + s.lam for s in bath.spins)


def _rk4_steps(span: float, hnorm: float) -> int:
    # RK4 on a unitary flow: |R(iy)|^2 - 1 ~ -y^6/72 per step and phase error
    # ~ y^5/120; keep total norm drift < 1e-11 and total phase error < 1e-10.
    x = span * hnorm
    if x == 0:
        return 0
    n_norm = (x ** 6 / (72 * 1e-11)) ** 0.2
    n_phase = (x ** 5 / (120 * 1e-10)) ** 0.25
    return max(1, int(math.ceil(max(n_norm, n_phase, x / 0.1))))


def _evolve_rk4(psi, central, bath, times):
    hnorm = hamiltonian_norm_bound(central, bath)
    out = []
    t_now = 0.0
    for t in times:
        span = t - t_now
        steps = _rk4_steps(span, hnorm)
        if steps:
            h = span / steps
            for _ in range(steps):
                k1 = -1j * apply_hamiltonian(psi, central, bath)
                k2 = -1j * apply_hamiltonian(psi + 0.5 * h * k1, central, bath)
                k3 = -1j * apply_hamiltonian(psi + 0.5 * h * k2, central, bath)
                k4 = -1j * apply_hamiltonian(psi + h * k3, central, bath)
                psi = psi + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        t_now = t
        out.append(psi.copy())
    return out


def _evolve_blocks(psi0, central, bath, times):
    half = psi0.size // 2
    out = np.empty((len(times), psi0.size), dtype=complex)
    for k, sz in enumerate((1, -1)):
        energies, vecs = np.linalg.eigh(central_block_hamiltonian(central, bath, sz))
        coeffs = vecs.T @ psi0[k * half:(k + 1) * half]
        out[:, k * half:(k + 1) * half] = (vecs @ (np.exp(-1j * np.outer(energies, times)) * coeffs[:, None])).T
    return out


def evolve_state(central: CentralSpinParams, bath: BathModel, t, method: str | None = None) -> np.ndarray:
    """Full state at each requested time, shape ``(len(t), 2**(N+1))``.

    ``method``: "dense" diagonalises the full H, "blocks" the two central
    sigma_z sectors separately, "rk4" integrates directly. The default picks
    dense for small baths and blocks above ``MAX_EIGEN_SPINS``.
    """
    if bath.n > MAX_FULL_HILBERT_SPINS:
        raise ValueError(f"full-Hilbert oracle limited to N <= {MAX_FULL_HILBERT_SPINS}, got {bath.n}")
    times = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(times < 0):
        raise ValueError("times must be non-negative")
    psi0 = initial_state(central, bath)
    if method is None:
        method = "dense" if bath.n <= MAX_EIGEN_SPINS else "blocks"
    if method == "blocks":
        return _evolve_blocks(psi0, central, bath, times)
    if method == "dense":
        energies, vecs = np.linalg.eigh(build_hamiltonian(central, bath))
        coeffs = np.conj(vecs.T) @ psi0
        return (vecs @ (np.exp(-1j * np.outer(energies, times)) * coeffs[:, None])).T
    if method != "rk4":
        raise ValueError(f"unknown method {method!r}")
    order = np.argsort(times, kind="stable")
    states = _evolve_rk4(psi0, central, bath, times[order])
    out = np.empty((len(times), psi0.size), dtype=complex)
    for k, idx in enumerate(order):
        out[idx] = states[k]
    return out


def partial_trace_bath(psi: np.ndarray) -> np.ndarray:
    """Reduced 2x2 state of the most significant qubit; accepts stacked states."""
    psi = np.asarray(psi)
    m = psi.reshape(psi.shape[:-1] + (2, psi.shape[-1] // 2))
    return m @ np.conj(np.swapaxes(m, -1, -2))


def full_hilbert_reduced_density(central: CentralSpinParams, bath: BathModel, t,
                                 method: str | None = None) -> np.ndarray:
    """rho_r(t) from full evolution; scalar t gives (2, 2), array t gives (M, 2, 2)."""
    rho = partial_trace_bath(evolve_state(central, bath, t, method))
    return rho[0] if np.ndim(t) == 0 else rho


def trace_distance(rho, sigma) -> np.ndarray:
    diff = np.asarray(rho) - np.asarray(sigma)
    return 0.5 * np.sum(np.abs(np.linalg.eigvalsh(diff)), axis=-1)
