"""The qubit-barrier-qubit triplet and its primitive two-qubit gate.

Spins are labelled 0, 1, 2 here (1, 2, 3 in the usual qubit-barrier-qubit
picture); the barrier is the middle spin. The outer spins carry the
effective Zeeman energy ``a`` (bare ``A`` plus ``J_Z`` from a frozen outer
neighbour), the barrier carries ``b``.

Qubit encoding
--------------
By default ``|0> = |up>`` on qubit-bearing spins. With that labelling the
passive-referenced simulated gate equals the closed-form matrix returned by
:func:`primitive_gate_analytic` entry for entry. The opposite labelling
(``zero_state="down"``) gives the same gate conjugated by ``X (x) X``, which
swaps the ``|00>`` and ``|11>`` phases.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .errors import ContractError, ProtocolError
from .evolution import expm_hermitian, phase_aligned_distance, unitarity_error
from .spin_core import ManyBodyOperator, basis_index, build_xxz, chain_bonds

Frame = Literal["raw", "passive"]
ZeroState = Literal["up", "down"]

BASIS_LABELS = ("00", "01", "10", "11")

# three-spin subspaces, ordered as in the analytic treatment
UP_BLOCK = (
    basis_index([False, True, True]),
    basis_index([True, False, True]),
    basis_index([True, True, False]),
)
DOWN_BLOCK = (
    basis_index([True, False, False]),
    basis_index([False, True, False]),
    basis_index([False, False, True]),
)


@dataclass(frozen=True)
class TripletParams:
    a: float
    b: float
    j_xy: float = 1.0
    j_z: float = 0.0

    def __post_init__(self):
        if not self.j_xy > 0:
            raise ContractError("j_xy must be positive")
        if self.j_z < 0:
            raise ContractError("j_z must be non-negative")

    @classmethod
    def resonant(cls, j_xy: float = 1.0, j_z: float = 0.0, a: float = 0.0) -> "TripletParams":
        return cls(a, a, j_xy, j_z)

    @property
    def p(self) -> float:
        return (self.a - self.b - self.j_z) / self.j_xy

    @property
    def q(self) -> float:
        return (self.b - self.a - self.j_z) / self.j_xy

    @property
    def s_p(self) -> float:
        return math.sqrt(8.0 + self.p**2)

    @property
    def s_q(self) -> float:
        return math.sqrt(8.0 + self.q**2)


@dataclass(frozen=True)
class TwoQubitGate:
    """4x4 gate in the ordered basis ``|00>, |01>, |10>, |11>``.

    ``tolerance`` bounds the allowed deviation from unitarity; gates read off
    an imperfect revival set it to ``inf`` and expose ``leakage`` instead.
    """

    matrix: np.ndarray
    frame: Frame = "passive"
    meta: dict = field(default_factory=dict, compare=False)
    tolerance: float = 1e-10

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.complex128)
        if m.shape != (4, 4):
            raise ContractError("two-qubit gate must be 4x4")
        if self.frame not in ("raw", "passive"):
            raise ContractError(f"unknown frame {self.frame!r}")
        if unitarity_error(m) > self.tolerance:
            raise ContractError(f"gate is not unitary (deviation {unitarity_error(m):.3e})")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)

    @property
    def leakage(self) -> float:
        return unitarity_error(self.matrix)

    def to_json(self) -> str:
        doc = {
            "basis": list(BASIS_LABELS),
            "frame": self.frame,
            "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in self.matrix],
            "meta": self.meta,
        }
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "TwoQubitGate":
        doc = json.loads(text)
        m = np.array([[complex(re, im) for re, im in row] for row in doc["matrix"]])
        return cls(m, doc.get("frame", "passive"), doc.get("meta", {}), tolerance=np.inf)


@dataclass(frozen=True)
class SubspaceEigensystem:
    which: str
    block: np.ndarray
    energies: np.ndarray  # ordered (antisymmetric, -, +)
    vectors: np.ndarray  # columns match ``energies``
    closed_form: np.ndarray


@dataclass(frozen=True)
class FrozenNeighborReport:
    big_delta: float
    distance: float
    scaled_constant: float
    gate: TwoQubitGate
    reference: TwoQubitGate
    barrier_revival: float
    edge_sz: tuple[float, float]


def _zeeman_matrix(theta: float) -> np.ndarray:
    return np.diag([np.exp(1j * theta), np.exp(-1j * theta)])


def qubit_indices(
    n_sites: int,
    qubit_sites: Sequence[int],
    zero_state: ZeroState = "up",
) -> list[int]:
    """Basis indices of the computational states, every other spin up.

    The returned list follows the binary order of the qubit register, with
    ``qubit_sites[0]`` as the most significant qubit.
    """
    if zero_state not in ("up", "down"):
        raise ContractError("zero_state must be 'up' or 'down'")
    k = len(qubit_sites)
    out = []
    for label in range(1 << k):
        up = [True] * n_sites
        for pos, site in enumerate(qubit_sites):
            bit = (label >> (k - 1 - pos)) & 1
            up[site] = (bit == 0) if zero_state == "up" else (bit == 1)
        out.append(basis_index(up))
    return out


def keep_indices(n_sites: int, up_sites: Sequence[int]) -> np.ndarray:
    """All basis states in which every site of ``up_sites`` is up."""
    idx = np.arange(1 << n_sites)
    mask = np.ones(1 << n_sites, dtype=bool)
    for s in up_sites:
        mask &= ((idx >> (n_sites - 1 - s)) & 1) == 0
    return idx[mask]


def triplet_hamiltonian(params: TripletParams) -> ManyBodyOperator:
    """``a (Z_0 + Z_2) + b Z_1`` plus anisotropic exchange on bonds (0,1), (1,2).

    ``a`` is the effective outer Zeeman energy, i.e. the Zeeman prefactor
    ``A + J_Z`` itself; this is the reading under which the up-block equals
    ``b 1 + 2 J_XY [[0,1,0],[1,p,1],[0,1,0]]``.
    """
    return build_xxz(3, chain_bonds(3, "open"), params.j_xy, params.j_z, [params.a, params.b, params.a])


def subspace_eigensystem(params: TripletParams, which: Literal["up", "down"]) -> SubspaceEigensystem:
    """Eigenpairs of the single-flip ('up') or single-up ('down') block.

    Energies come from diagonalising the block of :func:`triplet_hamiltonian`;
    ``closed_form`` lists ``(E_a, E_-, E_+)`` from the analytic expressions
    ``+-b`` and ``+-b + J (p +- S_p)`` (``q``, ``S_q`` for the down block).
    """
    if which not in ("up", "down"):
        raise ContractError("which must be 'up' or 'down'")
    idx = UP_BLOCK if which == "up" else DOWN_BLOCK
    H = triplet_hamiltonian(params).matrix
    block = H[np.ix_(idx, idx)].real
    w, v = np.linalg.eigh(block)
    anti = np.array([1.0, 0.0, -1.0]) / math.sqrt(2.0)
    k_anti = int(np.argmax(np.abs(anti @ v)))
    rest = [k for k in range(3) if k != k_anti]
    order = [k_anti] + sorted(rest, key=lambda k: w[k])
    vecs = v[:, order]
    # unit vectors with a positive first entry, i.e. proportional to (1, 0, -1) and (1, x, 1)
    vecs *= np.sign(vecs[0, :])[None, :]
    if which == "up":
        x, s, base = params.p, params.s_p, params.b
    else:
        x, s, base = params.q, params.s_q, -params.b
    closed = np.array([base, base + params.j_xy * (x - s), base + params.j_xy * (x + s)])
    return SubspaceEigensystem(which, block, w[order], vecs, closed)


def revival_time(j_xy: float, j_z: float) -> float:
    """First simultaneous barrier revival at resonance: ``pi / sqrt(8 J_XY^2 + J_Z^2)``."""
    if not j_xy > 0:
        raise ContractError("j_xy must be positive")
    return math.pi / math.sqrt(8.0 * j_xy**2 + j_z**2)


def gate_phase(j_xy: float, j_z: float) -> float:
    """``phi = (pi/2) J_Z / sqrt(8 J_XY^2 + J_Z^2)``, regular at ``J_Z = 0``."""
    return 0.5 * math.pi * j_z / math.sqrt(8.0 * j_xy**2 + j_z**2)


def primitive_gate_analytic(j_xy: float = 1.0, j_z: float = 0.0) -> TwoQubitGate:
    if not j_xy > 0 or j_z < 0:
        raise ContractError("need j_xy > 0 and j_z >= 0")
    phi = gate_phase(j_xy, j_z)
    Q = -np.exp(1j * phi)
    s, c = math.sin(phi), math.cos(phi)
    W = -np.exp(-2j * phi)
    m = np.array(
        [
            [1, 0, 0, 0],
            [0, 1j * Q * s, Q * c, 0],
            [0, Q * c, 1j * Q * s, 0],
            [0, 0, 0, W],
        ],
        dtype=np.complex128,
    )
    meta = {"j_xy": j_xy, "j_z": j_z, "phi": phi, "t_R": revival_time(j_xy, j_z), "source": "analytic"}
    return TwoQubitGate(m, "passive", meta)


def barrier_revival(U: np.ndarray, n_sites: int, inputs: Sequence[int], up_sites: Sequence[int]) -> np.ndarray:
    """Probability that every spin in ``up_sites`` is up after ``U``, per input."""
    keep = keep_indices(n_sites, up_sites)
    cols = np.asarray(U)[:, list(inputs)]
    return np.sum(np.abs(cols[keep, :]) ** 2, axis=0)


def passive_phases(n_sites, bonds, j_z, zeeman, t) -> np.ndarray:
    """``exp(+i E t)`` for the Ising (diagonal) energies of the given chain."""
    diag = build_xxz(n_sites, bonds, 0.0, j_z, zeeman).diagonal().real
    return np.exp(1j * diag * t)


def primitive_gate_numeric(
    j_xy: float = 1.0,
    j_z: float = 0.0,
    *,
    a: float = 0.0,
    frame: Frame = "passive",
    zero_state: ZeroState = "up",
    resonance_by: Literal["central", "outer"] = "central",
    passive_offset: float = 100.0,
    revival_tol: float = 1e-8,
) -> TwoQubitGate:
    """Simulate one resonant pulse of length ``t_R`` on the isolated triplet.

    ``frame="passive"`` removes the evolution the qubits would have had with
    the triplet left detuned: the barrier (``resonance_by="central"``) or the
    outer spins (``"outer"``) sit ``passive_offset`` away from resonance.
    Shifting the outer spins only adds single-qubit Z rotations.
    """
    params = TripletParams.resonant(j_xy, j_z, a)
    t_r = revival_time(j_xy, j_z)
    H = triplet_hamiltonian(params).matrix
    U = expm_hermitian(H, t_r)
    idx = qubit_indices(3, (0, 2), zero_state)
    revival = barrier_revival(U, 3, idx, (1,))
    if 1.0 - revival.min() > revival_tol:
        raise ProtocolError(f"barrier failed to revive at t_R (worst 1-P = {1 - revival.min():.3e})")
    G = U[np.ix_(idx, idx)]
    if frame == "passive":
        if resonance_by == "central":
            zeeman = [a, a + passive_offset, a]
        elif resonance_by == "outer":
            zeeman = [a + passive_offset, a, a + passive_offset]
        else:
            raise ContractError(f"unknown resonance_by {resonance_by!r}")
        ph = passive_phases(3, chain_bonds(3, "open"), j_z, zeeman, t_r)
        G = ph[idx][:, None] * G
    meta = {
        "j_xy": j_xy,
        "j_z": j_z,
        "t_R": t_r,
        "revival_probabilities": [float(x) for x in revival],
        "zero_state": zero_state,
        "resonance_by": resonance_by,
        "source": "simulated",
    }
    return TwoQubitGate(G, frame, meta)


def frozen_neighbor_check(
    j_xy: float = 1.0,
    j_z: float = 0.0,
    big_delta: float = 100.0,
    *,
    a: float = 0.0,
    zero_state: ZeroState = "up",
) -> FrozenNeighborReport:
    """Embed the triplet in a 5-spin open chain with far-detuned, frozen ends.

    Spins 0 and 4 sit ``big_delta`` above the bare qubit Zeeman energy
    ``A = a - J_Z`` and start up; the barrier (spin 2) is tuned to ``a``.
    The qubit gate after ``t_R`` is compared with the isolated-triplet gate,
    both referenced to their passive evolution.
    """
    if not big_delta > 0:
        raise ContractError("big_delta must be positive")
    bare = a - j_z
    zeeman = [bare + big_delta, bare, a, bare, bare + big_delta]
    bonds = chain_bonds(5, "open")
    t_r = revival_time(j_xy, j_z)
    U = expm_hermitian(build_xxz(5, bonds, j_xy, j_z, zeeman).matrix, t_r)
    idx = qubit_indices(5, (1, 3), zero_state)
    ph = passive_phases(5, bonds, j_z, zeeman, t_r)
    G = ph[idx][:, None] * U[np.ix_(idx, idx)]
    gate = TwoQubitGate(G, "passive", {"big_delta": big_delta, "t_R": t_r}, tolerance=np.inf)
    reference = primitive_gate_numeric(j_xy, j_z, a=a, zero_state=zero_state)
    distance = phase_aligned_distance(G, reference.matrix)

    cols = U[:, idx]
    probs = np.abs(cols) ** 2
    barrier = barrier_revival(U, 5, idx, (2,))
    edge = []
    for site in (0, 4):
        up = np.zeros(32, dtype=bool)
        up[keep_indices(5, (site,))] = True
        sz = probs[up].sum(axis=0) - probs[~up].sum(axis=0)
        edge.append(float(sz.min()))
    return FrozenNeighborReport(
        big_delta=big_delta,
        distance=distance,
        scaled_constant=distance * big_delta / j_xy,
        gate=gate,
        reference=reference,
        barrier_revival=float(barrier.min()),
        edge_sz=(edge[0], edge[1]),
    )


def dressed_gate(j_xy: float = 1.0, j_z: float = 0.0) -> TwoQubitGate:
    """``Z(psi) (x) Z(psi)`` applied after the primitive, global phase removed.

    ``psi = (pi/4)(1 - J_Z / sqrt(8 J_XY^2 + J_Z^2))``; at ``J_Z = 0`` the
    result is iSWAP.
    """
    U = primitive_gate_analytic(j_xy, j_z).matrix
    psi = 0.25 * math.pi * (1.0 - j_z / math.sqrt(8.0 * j_xy**2 + j_z**2))
    z = _zeeman_matrix(psi)
    m = np.kron(z, z) @ U
    m = m * np.exp(-1j * np.angle(m[0, 0]))
    return TwoQubitGate(m, "passive", {"j_xy": j_xy, "j_z": j_z, "psi": psi})
