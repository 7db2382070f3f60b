"""Local invariants of two-qubit gates and numerical CNOT synthesis."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy.optimize import least_squares, minimize

from .errors import ContractError
from .evolution import phase_aligned_distance, unitarity_error

# Bell ("magic") basis; columns are the basis vectors.
MAGIC = np.array(
    [
        [1, 0, 0, 1j],
        [0, 1j, 1, 0],
        [0, 1j, -1, 0],
        [1, 0, 0, -1j],
    ],
    dtype=np.complex128,
) / math.sqrt(2)

CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=np.complex128)
SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=np.complex128)
ISWAP = np.array([[1, 0, 0, 0], [0, 0, 1j, 0], [0, 1j, 0, 0], [0, 0, 0, 1]], dtype=np.complex128)

ENTANGLING_TOL = 1e-9
UNITARY_TOL = 1e-8


@dataclass(frozen=True)
class MakhlinInvariants:
    g1: complex
    g2: float

    def as_array(self) -> np.ndarray:
        return np.array([self.g1.real, self.g1.imag, self.g2])

    def distance(self, other: "MakhlinInvariants") -> float:
        return float(np.max(np.abs(self.as_array() - other.as_array())))


def _as_unitary(U) -> np.ndarray:
    m = np.asarray(U, dtype=np.complex128)
    if m.shape != (4, 4):
        raise ContractError("expected a 4x4 matrix")
    if unitarity_error(m) > UNITARY_TOL:
        raise ContractError("gate is not unitary")
    return m


def makhlin(U) -> MakhlinInvariants:
    """Makhlin's local invariants ``(G1, G2)``.

    With ``U_B = Q^dagger U Q`` in the magic basis and ``m = U_B^T U_B``:

        G1 = tr(m)^2 / (16 det U)
        G2 = (tr(m)^2 - tr(m^2)) / (4 det U)

    The identity class is ``(1, 3)``, CNOT ``(0, 1)``, SWAP ``(-1, -3)``.
    """
    m = _as_unitary(U)
    ub = MAGIC.conj().T @ m @ MAGIC
    mm = ub.T @ ub
    det = np.linalg.det(m)
    tr = np.trace(mm)
    g1 = tr**2 / (16.0 * det)
    g2 = (tr**2 - np.trace(mm @ mm)) / (4.0 * det)
    return MakhlinInvariants(complex(g1), float(g2.real))


def is_entangling(U, tol: float = ENTANGLING_TOL) -> bool:
    """True unless ``U`` is locally equivalent to a product gate."""
    inv = makhlin(U)
    return inv.distance(MakhlinInvariants(1.0 + 0j, 3.0)) > tol


def phase_distance(U, V) -> float:
    _as_unitary(U)
    _as_unitary(V)
    return phase_aligned_distance(U, V)


def rz(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def ry(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


def euler_zyz(beta: float, gamma: float, rho: float) -> np.ndarray:
    """Single-qubit ``Rz(beta) Ry(gamma) Rz(rho)``."""
    return rz(beta) @ ry(gamma) @ rz(rho)


def local_layer(angles) -> np.ndarray:
    a = np.asarray(angles, dtype=float).reshape(2, 3)
    return np.kron(euler_zyz(*a[0]), euler_zyz(*a[1]))


@dataclass
class GateCircuit:
    """Alternating local layers and primitive applications, in time order.

    ``layers`` holds ``("local", [[b,g,r],[b,g,r]])`` or ``("primitive",)``
    entries. The first layer acts first.
    """

    primitive: np.ndarray
    layers: list = field(default_factory=list)

    @property
    def uses(self) -> int:
        return sum(1 for layer in self.layers if layer[0] == "primitive")

    def unitary(self) -> np.ndarray:
        U = np.eye(4, dtype=np.complex128)
        for layer in self.layers:
            if layer[0] == "primitive":
                U = self.primitive @ U
            else:
                U = local_layer(layer[1]) @ U
        return U

    def to_dict(self) -> dict:
        out = []
        for layer in self.layers:
            if layer[0] == "primitive":
                out.append({"type": "primitive"})
            else:
                angles = np.asarray(layer[1], dtype=float).reshape(2, 3)
                out.append({"type": "local", "angles": angles.tolist()})
        return {
            "euler_convention": "Rz(beta) Ry(gamma) Rz(rho) per qubit",
            "primitive": [[[float(z.real), float(z.imag)] for z in row] for row in self.primitive],
            "layers": out,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, doc: dict) -> "GateCircuit":
        prim = np.array([[complex(re, im) for re, im in row] for row in doc["primitive"]])
        layers = []
        for layer in doc["layers"]:
            if layer["type"] == "primitive":
                layers.append(("primitive",))
            else:
                layers.append(("local", np.asarray(layer["angles"], dtype=float)))
        return cls(prim, layers)

    @classmethod
    def from_angles(cls, primitive: np.ndarray, x: np.ndarray) -> "GateCircuit":
        x = np.asarray(x, dtype=float)
        uses = len(x) // 6 - 1
        layers: list = [("local", x[0:6].reshape(2, 3))]
        for k in range(uses):
            layers.append(("primitive",))
            layers.append(("local", x[6 * (k + 1) : 6 * (k + 2)].reshape(2, 3)))
        return cls(np.asarray(primitive), layers)


@dataclass
class SynthesisResult:
    circuit: GateCircuit
    distance: float
    converged: bool
    restarts_used: int
    seed: int

    def to_json(self) -> str:
        doc = self.circuit.to_dict()
        doc.update(
            distance=self.distance,
            converged=self.converged,
            restarts_used=self.restarts_used,
            seed=self.seed,
            uses=self.circuit.uses,
        )
        return json.dumps(doc, sort_keys=True)


def _residuals(x, primitive, target, uses):
    U = local_layer(x[0:6])
    for k in range(uses):
        U = local_layer(x[6 * (k + 1) : 6 * (k + 2)]) @ (primitive @ U)
    tr = np.trace(target.conj().T @ U)
    phase = np.exp(1j * np.angle(tr)) if abs(tr) > 0 else 1.0
    d = (U - phase * target).ravel()
    return np.concatenate([d.real, d.imag])


def _refine_simplex(x0, P, T, uses, max_nfev):
    f = lambda x: float(np.linalg.norm(_residuals(x, P, T, uses)))
    sol = minimize(
        f, x0, method="Nelder-Mead", options={"maxfev": max_nfev, "xatol": 1e-12, "fatol": 1e-14, "adaptive": True}
    )
    return sol.x, float(sol.fun)


def _refine_least_squares(x0, P, T, uses, max_nfev):
    # "lm" keeps state between calls in some scipy builds, which breaks seed reproducibility
    sol = least_squares(_residuals, x0, args=(P, T, uses), method="trf", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=max_nfev)
    return sol.x, float(np.linalg.norm(sol.fun))


def synthesize_cnot(
    primitive,
    uses: int,
    *,
    seed: int = 0,
    restarts: int = 64,
    tol: float = 1e-6,
    stop_below: float = 1e-11,
    target=CNOT,
    method: Literal["simplex", "least_squares"] = "simplex",
    max_nfev: int | None = None,
) -> SynthesisResult:
    """Fit ``uses + 1`` local layers around ``uses`` primitives to ``target``.

    Each restart draws angles uniformly in ``[0, 2 pi)`` from a seeded
    generator and refines them on the phase-aligned residual
    ``U - exp(i phi) target``: gradient-free adaptive Nelder-Mead by default,
    or a trust-region least-squares fit (about ten times faster). Restarts
    run in order and stop early once a circuit is closer than ``stop_below``.
    ``max_nfev`` caps residual evaluations per restart.
    """
    if not 1 <= uses <= 4:
        raise ContractError("uses must be in 1..4")
    if method not in ("simplex", "least_squares"):
        raise ContractError(f"unknown method {method!r}")
    P = _as_unitary(primitive)
    T = _as_unitary(target)
    rng = np.random.default_rng(seed)
    n_par = 6 * (uses + 1)
    refine = _refine_simplex if method == "simplex" else _refine_least_squares
    if max_nfev is None:
        max_nfev = 500 * n_par if method == "simplex" else 200
    best_x, best_d, used = None, math.inf, 0
    for r in range(restarts):
        x0 = rng.uniform(0.0, 2.0 * math.pi, n_par)
        x, d = refine(x0, P, T, uses, max_nfev)
        used = r + 1
        if d < best_d:
            best_x, best_d = np.mod(x, 4.0 * math.pi), d
        if best_d < stop_below:
            break
    circuit = GateCircuit.from_angles(P, best_x)
    # report the distance of the circuit as serialised, not the optimiser's last residual
    distance = phase_aligned_distance(circuit.unitary(), T)
    return SynthesisResult(circuit, distance, distance < tol, used, seed)
