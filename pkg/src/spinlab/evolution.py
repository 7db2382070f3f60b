"""Exact, Trotterised and time-dependent propagation."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from . import kernels
from .errors import BudgetError, ContractError
from .spin_core import HERMITIAN_TOL, ManyBodyOperator, SpinState

UNITARY_TOL = 1e-10


@dataclass(frozen=True)
class Propagator:
    matrix: np.ndarray
    n_sites: int
    duration: float

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.complex128)
        dev = unitarity_error(m)
        if dev >= UNITARY_TOL:
            raise ContractError(f"propagator deviates from unitarity by {dev:.3e}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)

    def apply(self, state: SpinState) -> SpinState:
        psi = self.matrix @ state.amplitudes
        return SpinState(psi / np.linalg.norm(psi), state.n_sites)


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = 1e-3
    method: str = "midpoint_exponential"
    max_step_count: int = 10_000_000

    def __post_init__(self):
        if not self.dt > 0:
            raise ContractError("dt must be positive")
        if self.method != "midpoint_exponential":
            raise ContractError(f"unsupported integrator {self.method!r}")

    def halved(self) -> "IntegratorConfig":
        return IntegratorConfig(self.dt / 2, self.method, self.max_step_count)


@dataclass(frozen=True)
class DiagonalDrive:
    """``H(t) = static + f(t) * diag(drive)``.

    Every drive in this package only modulates Zeeman energies, so this form
    covers them; :func:`evolve_timedep` routes it to the compiled kernel.
    """

    static: np.ndarray
    drive: np.ndarray
    coefficient: Callable[[np.ndarray], np.ndarray]

    def __call__(self, t: float) -> np.ndarray:
        c = float(np.asarray(self.coefficient(np.asarray([t], dtype=float)))[0])
        return self.static + np.diag(c * self.drive)


HamiltonianOfTime = Union[DiagonalDrive, Callable[[float], object]]


def unitarity_error(m: np.ndarray) -> float:
    m = np.asarray(m)
    return float(np.linalg.norm(m.conj().T @ m - np.eye(m.shape[0])))


def _hermitian_matrix(H) -> np.ndarray:
    m = np.asarray(H, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ContractError("Hamiltonian must be a square matrix")
    scale = max(1.0, float(np.linalg.norm(m)))
    if np.linalg.norm(m - m.conj().T) >= HERMITIAN_TOL * scale:
        raise ContractError("Hamiltonian is not hermitian")
    return m


def _n_sites(dim: int) -> int:
    n = dim.bit_length() - 1
    if 1 << n != dim:
        raise ContractError(f"dimension {dim} is not a power of two")
    return n


def expm_hermitian(H: np.ndarray, t: float) -> np.ndarray:
    w, v = np.linalg.eigh(H)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def propagator_exact(H, t: float) -> Propagator:
    """``exp(-i H t)`` from the spectral decomposition of ``H``."""
    m = _hermitian_matrix(H)
    return Propagator(expm_hermitian(m, t), _n_sites(m.shape[0]), float(t))


def trotter_propagator(H1, H2, t: float, n: int) -> Propagator:
    """First-order splitting ``(exp(-i H1 t/n) exp(-i H2 t/n))^n``."""
    if n < 1:
        raise ContractError("slice count must be >= 1")
    a = _hermitian_matrix(H1)
    b = _hermitian_matrix(H2)
    step = expm_hermitian(a, t / n) @ expm_hermitian(b, t / n)
    return Propagator(np.linalg.matrix_power(step, n), _n_sites(a.shape[0]), float(t))


def _step_grid(t0: float, t1: float, config: IntegratorConfig) -> tuple[int, float]:
    if not t1 > t0:
        raise ContractError("need t1 > t0")
    steps = max(1, math.ceil((t1 - t0) / config.dt - 1e-9))
    if steps > config.max_step_count:
        raise BudgetError(f"{steps} steps exceed max_step_count={config.max_step_count}")
    return steps, (t1 - t0) / steps


def timedep_propagator(h_of_t: HamiltonianOfTime, t0: float, t1: float, config: IntegratorConfig) -> Propagator:
    """Midpoint-exponential propagator from ``t0`` to ``t1``.

    Each step applies the exact exponential of ``H`` at the step midpoint, so
    the product is unitary by construction and the global error is O(dt^2).
    """
    steps, h = _step_grid(t0, t1, config)
    mids = t0 + (np.arange(steps) + 0.5) * h
    if isinstance(h_of_t, DiagonalDrive):
        static = _hermitian_matrix(h_of_t.static)
        coeffs = np.asarray(h_of_t.coefficient(mids), dtype=float)
        U = kernels.midpoint_product(static, h_of_t.drive, coeffs, h)
    else:
        U = None
        for tm in mids:
            step = expm_hermitian(_hermitian_matrix(h_of_t(float(tm))), h)
            U = step if U is None else step @ U
    return Propagator(U, _n_sites(U.shape[0]), float(t1 - t0))


def evolve_timedep(
    h_of_t: HamiltonianOfTime,
    state: SpinState,
    t0: float,
    t1: float,
    config: IntegratorConfig | None = None,
) -> SpinState:
    """Propagate ``state`` from ``t0`` to ``t1`` under a time-dependent Hamiltonian."""
    config = config or IntegratorConfig()
    if isinstance(h_of_t, DiagonalDrive):
        return timedep_propagator(h_of_t, t0, t1, config).apply(state)
    steps, h = _step_grid(t0, t1, config)
    psi = np.array(state.amplitudes)
    for k in range(steps):
        H = _hermitian_matrix(h_of_t(t0 + (k + 0.5) * h))
        w, v = np.linalg.eigh(H)
        psi = v @ (np.exp(-1j * w * h) * (v.conj().T @ psi))
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > UNITARY_TOL:
        raise ContractError(f"norm drifted to {norm!r}")
    return SpinState(psi / norm, state.n_sites)


def phase_aligned_distance(U, V) -> float:
    """``min_phi ||U - exp(i phi) V||_F``, attained at ``phi = arg tr(V^dagger U)``."""
    a = np.asarray(U, dtype=np.complex128)
    b = np.asarray(V, dtype=np.complex128)
    overlap = np.trace(b.conj().T @ a)
    phase = np.exp(1j * np.angle(overlap)) if abs(overlap) > 0 else 1.0
    return float(np.linalg.norm(a - phase * b))
