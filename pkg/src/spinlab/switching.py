"""Smooth Zeeman switching of the barrier spin and the flat-duration search.

The barrier energy follows ``b(t) = resonant + passive_detuning * g(t)`` with
``g = 1`` when idle and ``g = 0`` at resonance. The ramp shapes over one
switch of length ``t_delta`` (``x = (t - t0) / t_delta``) are

    cos2:  g = cos^2(pi x / 2)
    sin4:  g = 1 - sin^4(pi x / 2)

followed by a flat resonant phase and the time-mirrored ramp back.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .errors import ContractError, NoRevivalWindowError
from .evolution import DiagonalDrive, IntegratorConfig, expm_hermitian, timedep_propagator
from .gate_synth import is_entangling, makhlin
from .spin_core import build_xxz, chain_bonds
from .triplet_gate import (
    TwoQubitGate,
    ZeroState,
    barrier_revival,
    passive_phases,
    qubit_indices,
    revival_time,
)

ProfileKind = Literal["abrupt", "cos2", "sin4"]

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def ramp_shape(kind: ProfileKind, x):
    """Idle weight ``g`` on the up-ramp, ``x`` in [0, 1] (1 -> 0)."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    if kind == "cos2":
        return np.cos(0.5 * np.pi * x) ** 2
    if kind == "sin4":
        return 1.0 - np.sin(0.5 * np.pi * x) ** 4
    if kind == "abrupt":
        return np.where(x > 0.0, 0.0, 1.0)
    raise ContractError(f"unknown profile kind {kind!r}")


@dataclass(frozen=True)
class SwitchProfile:
    kind: ProfileKind = "cos2"
    t0: float = 0.0
    t_delta: float = 1.25
    flat_duration: float = 0.0
    passive_detuning: float = 100.0
    resonant_value: float = 0.0

    def __post_init__(self):
        if self.kind not in ("abrupt", "cos2", "sin4"):
            raise ContractError(f"unknown profile kind {self.kind!r}")
        if self.kind != "abrupt" and not self.t_delta > 0:
            raise ContractError("smooth ramps need t_delta > 0")
        if self.flat_duration < 0:
            raise ContractError("flat_duration must be non-negative")

    @property
    def ramp(self) -> float:
        return 0.0 if self.kind == "abrupt" else self.t_delta

    @property
    def t_end(self) -> float:
        return self.t0 + 2 * self.ramp + self.flat_duration

    def weight(self, t):
        """Idle weight ``g(t)`` (1 passive, 0 resonant)."""
        t = np.asarray(t, dtype=float)
        if self.kind == "abrupt":
            inside = (t >= self.t0) & (t <= self.t_end)
            return np.where(inside, 0.0, 1.0)
        up = (t - self.t0) / self.ramp
        down = (self.t_end - t) / self.ramp
        return np.where(t <= self.t0 + self.ramp, ramp_shape(self.kind, up), ramp_shape(self.kind, down))

    def value(self, t):
        return self.resonant_value + self.passive_detuning * self.weight(t)

    def with_flat(self, flat_duration: float) -> "SwitchProfile":
        return SwitchProfile(
            self.kind, self.t0, self.t_delta, flat_duration, self.passive_detuning, self.resonant_value
        )


def profile_value(profile: SwitchProfile, t):
    return profile.value(t)


@dataclass(frozen=True)
class TripletSystem:
    """Isolated triplet whose barrier Zeeman energy is driven by a profile."""

    j_xy: float = 1.0
    alpha: float = 0.7
    a: float = 0.0
    zero_state: ZeroState = "up"

    @property
    def j_z(self) -> float:
        return self.alpha * self.j_xy

    def static(self) -> np.ndarray:
        # outer spins at a, barrier Zeeman left to the drive
        return build_xxz(3, chain_bonds(3, "open"), self.j_xy, self.j_z, [self.a, 0.0, self.a]).matrix

    def inputs(self) -> list[int]:
        return qubit_indices(3, (0, 2), self.zero_state)


BARRIER_Z = np.array([1.0 - 2.0 * ((i >> 1) & 1) for i in range(8)])


def _drive(system: TripletSystem, profile: SwitchProfile) -> DiagonalDrive:
    return DiagonalDrive(system.static(), BARRIER_Z, profile.value)


def window_propagator(system: TripletSystem, profile: SwitchProfile, config: IntegratorConfig) -> np.ndarray:
    """Propagator over the whole switching window, stepped uniformly."""
    if profile.t_end <= profile.t0:
        return np.eye(8, dtype=np.complex128)
    return timedep_propagator(_drive(system, profile), profile.t0, profile.t_end, config).matrix


def revival_errors(U: np.ndarray, system: TripletSystem) -> np.ndarray:
    """``1 - P(barrier up)`` for each computational input."""
    return np.clip(1.0 - barrier_revival(U, 3, system.inputs(), (1,)), 0.0, 1.0)


def revival_error(
    system: TripletSystem,
    profile: SwitchProfile,
    flat_duration: float | None = None,
    config: IntegratorConfig | None = None,
) -> float:
    """Worst-case barrier revival error after the full profile window."""
    if flat_duration is not None:
        profile = profile.with_flat(flat_duration)
    U = window_propagator(system, profile, config or IntegratorConfig())
    return float(revival_errors(U, system).max())


class RampedTriplet:
    """Switching window factored as ``U_down exp(-i H_res T) U_up``.

    The ramps do not depend on the flat duration ``T``, so they are
    integrated once; the flat phase is exact.
    """

    def __init__(self, system: TripletSystem, profile: SwitchProfile, config: IntegratorConfig):
        self.system = system
        self.profile = profile
        self.config = config
        static = system.static()
        res = static + np.diag(profile.resonant_value * BARRIER_Z)
        self._w, self._v = np.linalg.eigh(res)
        if profile.kind == "abrupt":
            self.u_up = np.eye(8, dtype=np.complex128)
            self.u_down = np.eye(8, dtype=np.complex128)
        else:
            ramp = profile.ramp
            up = DiagonalDrive(static, BARRIER_Z, lambda t: profile.resonant_value + profile.passive_detuning * ramp_shape(profile.kind, t / ramp))
            down = DiagonalDrive(
                static, BARRIER_Z, lambda t: profile.resonant_value + profile.passive_detuning * ramp_shape(profile.kind, 1.0 - t / ramp)
            )
            self.u_up = timedep_propagator(up, 0.0, ramp, config).matrix
            self.u_down = timedep_propagator(down, 0.0, ramp, config).matrix

    def propagator(self, flat_duration: float) -> np.ndarray:
        flat = (self._v * np.exp(-1j * self._w * flat_duration)) @ self._v.conj().T
        return self.u_down @ flat @ self.u_up

    def error(self, flat_duration: float) -> float:
        return float(revival_errors(self.propagator(flat_duration), self.system).max())

    def gate(self, flat_duration: float) -> TwoQubitGate:
        """Qubit block referenced to passive (Ising) evolution over the window."""
        U = self.propagator(flat_duration)
        idx = self.system.inputs()
        total = 2 * self.profile.ramp + flat_duration
        s = self.system
        ph = passive_phases(3, chain_bonds(3, "open"), s.j_z, [s.a, 0.0, s.a], total)
        G = ph[idx][:, None] * U[np.ix_(idx, idx)]
        meta = {"flat_duration": flat_duration, "window": total, "profile": self.profile.kind}
        return TwoQubitGate(G, "passive", meta, tolerance=np.inf)


def nearest_unitary(m: np.ndarray) -> np.ndarray:
    u, _, vh = np.linalg.svd(m)
    return u @ vh


def golden_section(f, lo: float, hi: float, tol: float) -> tuple[float, float]:
    """Minimise a unimodal ``f`` on ``[lo, hi]`` to bracket width ``tol``."""
    c = hi - GOLDEN * (hi - lo)
    d = lo + GOLDEN * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > tol:
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - GOLDEN * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + GOLDEN * (hi - lo)
            fd = f(d)
    x = 0.5 * (lo + hi)
    return x, f(x)


@dataclass
class RevivalSearchResult:
    optimal_flat_duration: float
    revival_error: float
    resulting_gate: TwoQubitGate
    entangling: bool
    profile: SwitchProfile
    dt: float
    threshold: float
    trace: list[tuple[float, float]] = field(default_factory=list)
    per_input_errors: list[float] = field(default_factory=list)

    @property
    def revived(self) -> bool:
        return self.revival_error < self.threshold

    def trace_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["flat_duration", "revival_error"])
        for t, e in self.trace:
            w.writerow([format(t, ".17g"), format(e, ".17g")])
        return buf.getvalue()

    def to_json(self) -> str:
        g = self.resulting_gate
        inv = makhlin(nearest_unitary(g.matrix))
        doc = {
            "profile": self.profile.kind,
            "t_delta": self.profile.t_delta,
            "passive_detuning": self.profile.passive_detuning,
            "optimal_flat_duration": self.optimal_flat_duration,
            "revival_error": self.revival_error,
            "per_input_errors": self.per_input_errors,
            "threshold": self.threshold,
            "revived": self.revived,
            "entangling": self.entangling,
            "dt": self.dt,
            "gate": json.loads(g.to_json()),
            "gate_leakage": g.leakage,
            "makhlin": {"g1": [inv.g1.real, inv.g1.imag], "g2": inv.g2},
        }
        return json.dumps(doc, sort_keys=True)


def _search_once(ramped: RampedTriplet, t_r: float, span: float, tol: float, threshold: float):
    step = t_r / 50.0
    # an abrupt window of zero length is the identity, not a revival
    start = step if ramped.profile.kind == "abrupt" else 0.0
    grid = np.arange(start, span + 0.5 * step, step)
    errs = np.array([ramped.error(T) for T in grid])
    trace = list(zip(grid.tolist(), errs.tolist()))
    if errs.min() >= 0.1:
        raise NoRevivalWindowError(f"no flat duration in [0, {span:.4g}] brings the error below 0.1")
    # local grid minima, best three, each refined inside its neighbouring cells
    minima = [i for i in range(len(grid)) if (i == 0 or errs[i] <= errs[i - 1]) and (i == len(grid) - 1 or errs[i] <= errs[i + 1])]
    refined = []
    for i in sorted(minima, key=lambda k: errs[k])[:3]:
        lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
        refined.append(golden_section(ramped.error, lo, hi, tol))
    # shortest window that meets the threshold, else the smallest error
    passing = [r for r in refined if r[1] < threshold]
    best = min(passing, key=lambda r: r[0]) if passing else min(refined, key=lambda r: r[1])
    return best[0], best[1], trace


def search_flat_duration(
    kind: ProfileKind = "cos2",
    *,
    t_delta: float = 1.25,
    alpha: float = 0.7,
    j_xy: float = 1.0,
    passive_detuning: float = 100.0,
    a: float = 0.0,
    config: IntegratorConfig | None = None,
    threshold: float = 1e-6,
    duration_tol: float = 1e-7,
    refine_tol: float = 1e-8,
    max_halvings: int = 4,
    zero_state: ZeroState = "up",
) -> RevivalSearchResult:
    """Find the flat resonant duration that best revives the barrier.

    Coarse grid on ``[0, 3 t_R]`` with step ``t_R / 50``, golden-section
    refinement of the three best local minima, then ``dt`` is halved until
    the optimal revival error moves by less than ``refine_tol``.
    """
    config = config or IntegratorConfig()
    system = TripletSystem(j_xy, alpha, a, zero_state)
    profile = SwitchProfile(kind, 0.0, t_delta, 0.0, passive_detuning, a)
    t_r = revival_time(j_xy, alpha * j_xy)

    ramped = RampedTriplet(system, profile, config)
    x, fx, trace = _search_once(ramped, t_r, 3 * t_r, duration_tol, threshold)
    if kind != "abrupt":
        for _ in range(max_halvings):
            config = config.halved()
            ramped = RampedTriplet(system, profile, config)
            x2, fx2, trace = _search_once(ramped, t_r, 3 * t_r, duration_tol, threshold)
            converged = abs(fx2 - fx) < refine_tol
            x, fx = x2, fx2
            if converged:
                break

    gate = ramped.gate(x)
    per_input = revival_errors(ramped.propagator(x), system).tolist()
    entangling = is_entangling(nearest_unitary(gate.matrix))
    return RevivalSearchResult(
        optimal_flat_duration=x,
        revival_error=fx,
        resulting_gate=gate,
        entangling=entangling,
        profile=profile.with_flat(x),
        dt=config.dt,
        threshold=threshold,
        trace=trace,
        per_input_errors=per_input,
    )


def barrier_trace(
    system: TripletSystem, profile: SwitchProfile, config: IntegratorConfig, samples: int = 400
) -> tuple[np.ndarray, np.ndarray]:
    """Barrier <sigma^Z>(t) for every computational input across the window.

    Returns ``(times, sz)`` with ``sz`` of shape ``(len(times), 4)``.
    """
    times = np.linspace(profile.t0, profile.t_end, samples)
    drive = _drive(system, profile)
    idx = system.inputs()
    psi = np.eye(8, dtype=np.complex128)[:, idx]
    out = np.empty((samples, len(idx)))
    out[0] = BARRIER_Z @ np.abs(psi) ** 2
    for k in range(1, samples):
        t_a, t_b = times[k - 1], times[k]
        if t_b > t_a:
            psi = timedep_propagator(drive, t_a, t_b, config).matrix @ psi
        out[k] = BARRIER_Z @ np.abs(psi) ** 2
    return times, out
