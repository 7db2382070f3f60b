"""Qubit/barrier array layouts and multi-qubit revival searches."""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Literal, Sequence

import networkx as nx
import numpy as np
from scipy.optimize import minimize, minimize_scalar

from . import kernels
from ._config import max_threads
from .errors import ContractError
from .evolution import unitarity_error
from .spin_core import build_xxz, site_is_up

Role = Literal["qubit", "barrier"]


@dataclass(frozen=True)
class SpinGraph:
    roles: tuple[str, ...]
    edges: tuple[tuple[int, int], ...]
    name: str = ""

    def __post_init__(self):
        roles = tuple(self.roles)
        if any(r not in ("qubit", "barrier") for r in roles):
            raise ContractError("node roles must be 'qubit' or 'barrier'")
        seen = set()
        edges = []
        for u, v in self.edges:
            u, v = int(u), int(v)
            if u == v:
                raise ContractError(f"self-loop on node {u}")
            if not (0 <= u < len(roles) and 0 <= v < len(roles)):
                raise ContractError(f"edge ({u}, {v}) references a missing node")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ContractError(f"duplicate edge {key}")
            seen.add(key)
            edges.append(key)
        object.__setattr__(self, "roles", roles)
        object.__setattr__(self, "edges", tuple(edges))

    @property
    def n_nodes(self) -> int:
        return len(self.roles)

    def degrees(self) -> list[int]:
        deg = [0] * self.n_nodes
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def qubit_qubit_edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u, v in self.edges if self.roles[u] == self.roles[v] == "qubit"]

    def complement_roles(self) -> "SpinGraph":
        flip = {"qubit": "barrier", "barrier": "qubit"}
        return SpinGraph(tuple(flip[r] for r in self.roles), self.edges, f"{self.name}-complement")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "nodes": [{"id": i, "role": r} for i, r in enumerate(self.roles)],
            "edges": [list(e) for e in self.edges],
            "degrees": self.degrees(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, doc: dict) -> "SpinGraph":
        try:
            nodes = sorted(doc["nodes"], key=lambda n: int(n["id"]))
            if [int(n["id"]) for n in nodes] != list(range(len(nodes))):
                raise ContractError("node ids must be 0..n-1")
            return cls(tuple(n["role"] for n in nodes), tuple(tuple(e) for e in doc["edges"]), doc.get("name", ""))
        except (KeyError, TypeError, ValueError) as exc:
            raise ContractError(f"malformed graph document: {exc}") from None

    @classmethod
    def from_json(cls, text: str) -> "SpinGraph":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ContractError(f"graph file is not valid JSON: {exc}") from None
        if not isinstance(doc, dict):
            raise ContractError("graph document must be a JSON object")
        return cls.from_dict(doc)


def r_q(graph: SpinGraph) -> Fraction:
    """Fraction of spins that carry a qubit."""
    if graph.n_nodes == 0:
        raise ContractError("empty graph")
    return Fraction(sum(r == "qubit" for r in graph.roles), graph.n_nodes)


def insert_barriers(qubit_graph: nx.Graph, name: str = "") -> SpinGraph:
    """Replace every qubit-qubit edge by a barrier node joined to both ends."""
    nodes = list(qubit_graph.nodes())
    index = {v: i for i, v in enumerate(nodes)}
    roles = ["qubit"] * len(nodes)
    edges = []
    for u, v in qubit_graph.edges():
        if u == v:
            raise ContractError("qubit graph has a self-loop")
        b = len(roles)
        roles.append("barrier")
        edges.append((index[u], b))
        edges.append((b, index[v]))
    return SpinGraph(tuple(roles), tuple(edges), name)


def chain_layout(n_qubits: int = 8) -> SpinGraph:
    """Periodic 1-D chain alternating qubit and barrier spins."""
    return insert_barriers(nx.cycle_graph(n_qubits), "chain")


def hex_layout(rows: int = 4, cols: int = 4) -> SpinGraph:
    """Periodic honeycomb of qubits with a unique barrier on every bond."""
    g = nx.hexagonal_lattice_graph(rows, cols, periodic=True)
    return insert_barriers(g, "hex")


def hex_complement_layout(rows: int = 4, cols: int = 4) -> SpinGraph:
    """The honeycomb layout with qubit and barrier roles exchanged."""
    return hex_layout(rows, cols).complement_roles()


LATTICES = {"chain": chain_layout, "hex": hex_layout, "hex-complement": hex_complement_layout}


# ---------------------------------------------------------------------------
# commensurate revivals around one barrier


def star_hamiltonian(k: int, j_xy: float, j_z: float, detuning: float, a: float = 0.0) -> np.ndarray:
    """Barrier (site 0) coupled to ``k`` qubit spins; qubits at ``a``, barrier at ``a - detuning``."""
    bonds = [(0, q) for q in range(1, k + 1)]
    zeeman = [a - detuning] + [a] * k
    return build_xxz(k + 1, bonds, j_xy, j_z, zeeman).matrix


def _class_inputs(k: int) -> list[int]:
    """One representative input per number of down qubits, barrier up."""
    out = []
    for n_down in range(k + 1):
        up = [True] + [q >= n_down for q in range(k)]
        idx = 0
        for flag in up:
            idx = (idx << 1) | (0 if flag else 1)
        out.append(idx)
    return out


def _barrier_up_states(k: int) -> np.ndarray:
    return np.array([i for i in range(1 << (k + 1)) if site_is_up(i, 0, k + 1)], dtype=np.int64)


@dataclass
class CommensurateCandidate:
    detuning: float
    common_time: float
    max_error: float
    periods: list[float] = field(default_factory=list)
    multiples: list[int] = field(default_factory=list)
    gate_unitarity_error: float = 0.0


def _first_revival(evals, evecs, psi0, keep, t_max, scan_tol, n_scan=4000):
    """First local maximum of P(barrier up) above ``1 - scan_tol``, refined."""
    times = np.linspace(0.0, t_max, n_scan + 1)[1:]
    p = kernels.keep_probability(evals, evecs, psi0, keep, times)
    dt = times[1] - times[0]
    # skip the initial plateau where P has not yet dropped
    left = np.flatnonzero(p < 1.0 - 10 * scan_tol)
    if left.size == 0:
        return None
    start = left[0]
    for i in range(start + 1, len(p) - 1):
        if p[i] >= p[i - 1] and p[i] >= p[i + 1] and p[i] > 1.0 - 20 * scan_tol:
            f = lambda t: -kernels.keep_probability(evals, evecs, psi0, keep, np.array([t]))[0]
            res = minimize_scalar(f, bounds=(times[i] - dt, times[i] + dt), method="bounded", options={"xatol": 1e-12})
            if -res.fun > 1.0 - scan_tol:
                return float(res.x)
    return None


def _revival_errors(H, inputs, keep, t) -> np.ndarray:
    w, v = np.linalg.eigh(H)
    U = (v * np.exp(-1j * w * t)) @ v.conj().T
    cols = U[:, inputs]
    return 1.0 - np.sum(np.abs(cols[keep]) ** 2, axis=0)


def _fit_common(periods: Sequence[float], max_ratio: int, tol: float):
    """Smallest common time ``T = n_i p_i`` (``n_i <= max_ratio``) within relative ``tol``."""
    p_ref = max(periods)
    best = None
    for m in range(1, max_ratio + 1):
        T = m * p_ref
        mult = [round(T / p) for p in periods]
        if any(n < 1 or n > max_ratio for n in mult):
            continue
        mismatch = max(abs(T / p - n) / n for p, n in zip(periods, mult))
        if mismatch < tol:
            best = (T, mult)
            break
    return best


def commensurate_search(
    k: int,
    j_xy: float = 1.0,
    j_z: float = 1.0,
    detuning_grid: Sequence[float] | None = None,
    tolerance: float = 1e-6,
    *,
    max_ratio: int = 8,
    scan_tolerance: float = 1e-3,
    a: float = 0.0,
) -> list[CommensurateCandidate]:
    """Detunings ``a - b`` at which all inputs revive the barrier together.

    For every grid detuning the first-revival period of each input class is
    located on a dense time scan (loose ``scan_tolerance``). Periods whose
    ratios are small rationals (multiples up to ``max_ratio``) give a common
    time; the detuning and time are then jointly polished and the candidate
    is kept only if direct simulation shows every input's barrier revival
    error below ``tolerance``.
    """
    if k not in (2, 3, 4):
        raise ContractError("k must be 2, 3 or 4")
    if detuning_grid is None:
        detuning_grid = np.round(np.arange(-10.0, 10.0 + 1e-9, 0.01), 10) * j_xy
    grid = [float(d) for d in detuning_grid]
    inputs = _class_inputs(k)
    keep = _barrier_up_states(k)
    dim = 1 << (k + 1)
    basis = np.eye(dim, dtype=np.complex128)

    h_base = star_hamiltonian(k, j_xy, j_z, 0.0, a)
    z_barrier = np.array([1.0 if site_is_up(i, 0, k + 1) else -1.0 for i in range(dim)])

    def hamiltonian(d: float) -> np.ndarray:
        return h_base - d * np.diag(z_barrier)

    def periods_at(d: float):
        w, v = np.linalg.eigh(hamiltonian(d))
        out = []
        for i in inputs:
            p0 = kernels.keep_probability(w, v, basis[i], keep, np.linspace(0, 50.0 / j_xy, 2001))
            if p0.min() > 1.0 - 1e-12:
                continue  # stationary input, revives at every time
            span = max(w) - min(w)
            t_max = max_ratio * 2.0 * math.pi / max(1e-9, min(np.diff(np.unique(np.round(w, 12))).min(), span))
            t = _first_revival(w, v, basis[i], keep, min(t_max, 200.0 / j_xy), scan_tolerance)
            if t is None:
                return None
            out.append(t)
        return out

    def screen(pos: int):
        d = grid[pos]
        per = periods_at(d)
        if not per:
            return None
        fit = _fit_common(per, max_ratio, scan_tolerance)
        if fit is None:
            return None
        return pos, d, per, fit

    workers = max_threads()
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            screened = [s for s in pool.map(screen, range(len(grid))) if s is not None]
    else:
        screened = [s for s in map(screen, range(len(grid))) if s is not None]

    def worst(d, t):
        return float(_revival_errors(hamiltonian(d), inputs, keep, t).max())

    def polish_time(d, T):
        r = minimize_scalar(lambda t: worst(d, t), bounds=(T * (1 - 1e-2), T * (1 + 1e-2)), method="bounded", options={"xatol": 1e-13})
        return float(r.x), float(r.fun)

    # adjacent grid hits with the same multiples describe one resonance
    groups: list[list] = []
    for hit in screened:
        if groups and hit[0] == groups[-1][-1][0] + 1 and hit[3][1] == groups[-1][-1][3][1]:
            groups[-1].append(hit)
        else:
            groups.append([hit])

    all_inputs = [i for i in range(dim) if site_is_up(i, 0, k + 1)]
    out: list[CommensurateCandidate] = []
    for group in groups:
        polished = [(d, *polish_time(d, T), per, mult) for _, d, per, (T, mult) in group]
        d_best, t_best, err, per, mult = min(polished, key=lambda p: p[2])
        if err >= tolerance:
            r2 = minimize(
                lambda x: worst(x[0], x[1]),
                x0=[d_best, t_best],
                method="Nelder-Mead",
                options={"xatol": 1e-11, "fatol": 1e-15, "maxiter": 2000},
            )
            if r2.fun < err and abs(r2.x[0] - d_best) < 0.05 * j_xy:
                d_best, t_best = float(r2.x[0]), float(r2.x[1])
        d_best += 0.0  # drop a negative zero
        # independent check: fresh Hamiltonian and propagator, every barrier-up input
        H = star_hamiltonian(k, j_xy, j_z, d_best, a)
        w, v = np.linalg.eigh(H)
        U = (v * np.exp(-1j * w * t_best)) @ v.conj().T
        verified = float(1.0 - np.sum(np.abs(U[np.ix_(keep, all_inputs)]) ** 2, axis=0).min())
        verified = max(verified, 0.0)
        if verified >= tolerance:
            continue
        if any(c.multiples == list(mult) and abs(c.detuning - d_best) < 1e-3 * j_xy for c in out):
            continue
        block = U[np.ix_(all_inputs, all_inputs)]
        out.append(
            CommensurateCandidate(
                detuning=d_best,
                common_time=t_best,
                max_error=verified,
                periods=list(per),
                multiples=list(mult),
                gate_unitarity_error=unitarity_error(block),
            )
        )
    return out


def candidates_csv(cands: Sequence[CommensurateCandidate]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["detuning", "common_time", "max_error"])
    for c in cands:
        w.writerow([format(c.detuning, ".17g"), format(c.common_time, ".17g"), format(c.max_error, ".17g")])
    return buf.getvalue()
