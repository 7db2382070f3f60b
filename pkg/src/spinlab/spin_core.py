"""Spin states, embedded Pauli operators and XXZ chain Hamiltonians.

Conventions used everywhere in the package:

* hbar = 1, energies in units of the in-plane coupling J_XY.
* Per-site basis ``(|up>, |down>)`` with ``sigma^Z |up> = +|up>``.
* Site 0 is the most significant position of the product-basis index.
* ``sigma^+- = sigma^X +- i sigma^Y`` (no factor 1/2), so ``sigma^+`` has a
  single entry equal to 2.

The interaction is ``J sum (XX + YY) + J alpha sum ZZ`` over the bonds of the
chain. Every other matrix in the package is derived from it.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Literal, Sequence

import numpy as np

from . import kernels
from .errors import ContractError

MAX_SITES = 14
HERMITIAN_TOL = 1e-12

_PAULI = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}
_PAULI["plus"] = _PAULI["X"] + 1j * _PAULI["Y"]
_PAULI["minus"] = _PAULI["X"] - 1j * _PAULI["Y"]

Axis = Literal["X", "Y", "Z", "plus", "minus"]


@dataclass(frozen=True)
class ChainSpec:
    """A chain of spins with XXZ nearest-neighbour exchange.

    Attributes:
        n_sites: number of spins.
        topology: ``"ring"`` wraps the bond sum modulo ``n_sites``; ``"open"``
            stops at bond ``(n-2, n-1)``.
        j_xy: in-plane exchange J.
        alpha: anisotropy J_Z / J_XY.
        zeeman: per-site Zeeman energies B_j.
        max_sites: memory guard on the 2^N Hilbert space.
    """

    n_sites: int
    topology: Literal["ring", "open"] = "ring"
    j_xy: float = 1.0
    alpha: float = 1.0
    zeeman: tuple[float, ...] = ()
    max_sites: int = field(default=MAX_SITES, compare=False)

    def __post_init__(self):
        zeeman = tuple(float(b) for b in self.zeeman) if self.zeeman else (0.0,) * self.n_sites
        object.__setattr__(self, "zeeman", zeeman)
        if not 1 <= self.n_sites <= self.max_sites:
            raise ContractError(f"n_sites must lie in [1, {self.max_sites}], got {self.n_sites}")
        if self.topology not in ("ring", "open"):
            raise ContractError(f"unknown topology {self.topology!r}")
        if not (self.j_xy >= 0 and math.isfinite(self.j_xy)):
            raise ContractError("j_xy must be finite and non-negative")
        if not (self.alpha >= 0 and math.isfinite(self.alpha)):
            raise ContractError("alpha must be finite and non-negative")
        if len(zeeman) != self.n_sites:
            raise ContractError(f"expected {self.n_sites} Zeeman energies, got {len(zeeman)}")
        if not all(math.isfinite(b) for b in zeeman):
            raise ContractError("Zeeman energies must be finite")

    @property
    def j_z(self) -> float:
        return self.alpha * self.j_xy

    def bonds(self) -> list[tuple[int, int]]:
        return chain_bonds(self.n_sites, self.topology)

    def with_zeeman(self, zeeman: Sequence[float]) -> "ChainSpec":
        return ChainSpec(self.n_sites, self.topology, self.j_xy, self.alpha, tuple(zeeman), self.max_sites)

    def to_json(self) -> str:
        return json.dumps(
            {
                "n_sites": self.n_sites,
                "topology": self.topology,
                "j_xy": self.j_xy,
                "alpha": self.alpha,
                "zeeman": list(self.zeeman),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "ChainSpec":
        doc = json.loads(text)
        try:
            return cls(
                n_sites=int(doc["n_sites"]),
                topology=doc["topology"],
                j_xy=float(doc["j_xy"]),
                alpha=float(doc["alpha"]),
                zeeman=tuple(float(b) for b in doc["zeeman"]),
            )
        except KeyError as exc:
            raise ContractError(f"ChainSpec JSON missing field {exc}") from None


@dataclass(frozen=True)
class SpinState:
    amplitudes: np.ndarray
    n_sites: int

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (1 << self.n_sites,):
            raise ContractError(f"state of {self.n_sites} sites needs {1 << self.n_sites} amplitudes")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > 1e-12:
            raise ContractError(f"state is not normalised (|psi|^2 = {norm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    def __array__(self, dtype=None, copy=None):
        return self.amplitudes if dtype is None else self.amplitudes.astype(dtype)

    def expectation(self, op) -> complex:
        m = np.asarray(op)
        return complex(np.vdot(self.amplitudes, m @ self.amplitudes))

    def probability(self, index: int) -> float:
        return float(abs(self.amplitudes[index]) ** 2)


@dataclass(frozen=True)
class ManyBodyOperator:
    matrix: np.ndarray
    n_sites: int
    hermitian: bool = False

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.complex128)
        dim = 1 << self.n_sites
        if m.shape != (dim, dim):
            raise ContractError(f"operator on {self.n_sites} sites must be {dim}x{dim}, got {m.shape}")
        if self.hermitian and np.linalg.norm(m - m.conj().T) >= HERMITIAN_TOL * max(1.0, np.linalg.norm(m)):
            raise ContractError("operator flagged hermitian is not")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)

    def __add__(self, other: "ManyBodyOperator") -> "ManyBodyOperator":
        if self.n_sites != other.n_sites:
            raise ContractError("cannot add operators on different site counts")
        return ManyBodyOperator(self.matrix + other.matrix, self.n_sites, self.hermitian and other.hermitian)

    def __matmul__(self, other):
        if isinstance(other, ManyBodyOperator):
            return ManyBodyOperator(self.matrix @ other.matrix, self.n_sites)
        return self.matrix @ np.asarray(other)

    def diagonal(self) -> np.ndarray:
        return np.diag(self.matrix).copy()


def chain_bonds(n: int, topology: str) -> list[tuple[int, int]]:
    """Nearest-neighbour bonds ``(j, j+1)``; a ring adds ``(n-1, 0)``.

    The ring sum is taken literally modulo ``n``, so a two-site ring carries
    the bond twice.
    """
    if n < 2:
        return []
    bonds = [(j, j + 1) for j in range(n - 1)]
    if topology == "ring":
        bonds.append((n - 1, 0))
    return bonds


def embed_pauli(axis: Axis, site: int, n: int) -> ManyBodyOperator:
    """``I x ... x sigma^axis x ... x I`` with the Pauli factor at ``site``."""
    if axis not in _PAULI or axis == "I":
        raise ContractError(f"unknown Pauli axis {axis!r}")
    if not 0 <= site < n:
        raise IndexError(f"site {site} out of range for {n} sites")
    left = np.eye(1 << site, dtype=np.complex128)
    right = np.eye(1 << (n - site - 1), dtype=np.complex128)
    m = np.kron(np.kron(left, _PAULI[axis]), right)
    return ManyBodyOperator(m, n, hermitian=axis in ("X", "Y", "Z"))


def basis_index(spins_up: Sequence[bool]) -> int:
    """Product-basis index of a configuration given as up/down flags per site."""
    idx = 0
    for up in spins_up:
        idx = (idx << 1) | (0 if up else 1)
    return idx


def site_is_up(index: int, site: int, n: int) -> bool:
    return not (index >> (n - 1 - site)) & 1


def product_state(spins_up: Sequence[bool]) -> SpinState:
    n = len(spins_up)
    amps = np.zeros(1 << n, dtype=np.complex128)
    amps[basis_index(spins_up)] = 1.0
    return SpinState(amps, n)


def total_sz(n: int) -> ManyBodyOperator:
    idx = np.arange(1 << n)
    diag = np.zeros(1 << n)
    for site in range(n):
        diag += 1.0 - 2.0 * ((idx >> (n - 1 - site)) & 1)
    return ManyBodyOperator(np.diag(diag).astype(np.complex128), n, hermitian=True)


def build_xxz(
    n: int,
    bonds: Iterable[tuple[int, int]],
    j_xy: float | Sequence[float],
    j_z: float | Sequence[float],
    zeeman: Sequence[float],
) -> ManyBodyOperator:
    """XXZ Hamiltonian on an arbitrary bond graph (uniform or per-bond couplings)."""
    bonds = list(bonds)
    if n > MAX_SITES:
        raise ContractError(f"{n} sites exceeds the {MAX_SITES}-site cap")
    for i, j in bonds:
        if not (0 <= i < n and 0 <= j < n) or i == j:
            raise ContractError(f"invalid bond ({i}, {j}) for {n} sites")
    m = len(bonds)
    ei = np.array([b[0] for b in bonds], dtype=np.int64)
    ej = np.array([b[1] for b in bonds], dtype=np.int64)
    jxy = np.broadcast_to(np.asarray(j_xy, dtype=np.float64), (m,))
    jz = np.broadcast_to(np.asarray(j_z, dtype=np.float64), (m,))
    H = kernels.xxz_dense(n, ei, ej, jxy, jz, np.asarray(zeeman, dtype=np.float64))
    return ManyBodyOperator(H, n, hermitian=True)


def build_h_single(spec: ChainSpec) -> ManyBodyOperator:
    """Zeeman term ``sum_j B_j sigma^Z_j`` (diagonal)."""
    return build_xxz(spec.n_sites, [], 0.0, 0.0, spec.zeeman)


def build_h_int(spec: ChainSpec) -> ManyBodyOperator:
    """Exchange term ``J sum (XX + YY + alpha ZZ)`` over the chain bonds."""
    return build_xxz(spec.n_sites, spec.bonds(), spec.j_xy, spec.j_z, [0.0] * spec.n_sites)


def build_h(spec: ChainSpec) -> ManyBodyOperator:
    return build_xxz(spec.n_sites, spec.bonds(), spec.j_xy, spec.j_z, spec.zeeman)


def build_h1(spec: ChainSpec) -> ManyBodyOperator:
    """Ising part: Zeeman plus ``J alpha sum ZZ``. Diagonal in the product basis."""
    return build_xxz(spec.n_sites, spec.bonds(), 0.0, spec.j_z, spec.zeeman)


def build_h2(spec: ChainSpec) -> ManyBodyOperator:
    """Flip-flop part ``(J/2) sum (s+_j s-_{j+1} + s-_j s+_{j+1})``."""
    return build_xxz(spec.n_sites, spec.bonds(), spec.j_xy, 0.0, [0.0] * spec.n_sites)


def build_h_kron(spec: ChainSpec) -> ManyBodyOperator:
    """Reference construction of H from explicit Kronecker products.

    Slow; kept as an independent route for checking :func:`build_h`.
    """
    n = spec.n_sites
    Z = [embed_pauli("Z", j, n).matrix for j in range(n)]
    Sp = [embed_pauli("plus", j, n).matrix for j in range(n)]
    Sm = [embed_pauli("minus", j, n).matrix for j in range(n)]
    H = sum(b * z for b, z in zip(spec.zeeman, Z))
    H = H + np.zeros((1 << n, 1 << n), dtype=np.complex128)
    for i, j in spec.bonds():
        H = H + 0.5 * spec.j_xy * (Sp[i] @ Sm[j] + Sm[i] @ Sp[j])
        H = H + spec.j_z * (Z[i] @ Z[j])
    return ManyBodyOperator(H, n, hermitian=True)
