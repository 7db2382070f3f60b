"""End-to-end acceptance checks, one test per criterion.

Each test records a PASS/FAIL line that is printed in the terminal summary,
then asserts. Thresholds are the stated ones and are not relaxed.
"""
from __future__ import annotations

import math
import time
from fractions import Fraction
from functools import reduce

import numpy as np
import pytest
from scipy.linalg import expm

from spinlab.errors import NoRevivalWindowError
from spinlab.evolution import expm_hermitian, phase_aligned_distance, propagator_exact, trotter_propagator, unitarity_error
from spinlab.gate_synth import ISWAP, euler_zyz, is_entangling, makhlin, synthesize_cnot
from spinlab.geometry import chain_layout, commensurate_search, hex_complement_layout, hex_layout, r_q
from spinlab.ising_limit import DetuningPattern, scaling_sweep
from spinlab.spin_core import ChainSpec, build_h, build_h1, build_h2, total_sz
from spinlab.switching import nearest_unitary, search_flat_duration
from spinlab.triplet_gate import (
    TripletParams,
    barrier_revival,
    dressed_gate,
    frozen_neighbor_check,
    primitive_gate_analytic,
    primitive_gate_numeric,
    qubit_indices,
    revival_time,
    triplet_hamiltonian,
)

ALPHAS = [0.0, 0.3, 0.7, 1.0]
U_P = np.array([[1, 0, 0, 0], [0, 0, -1, 0], [0, -1, 0, 0], [0, 0, 0, -1]], dtype=complex)


def test_01_ising_limit_scaling(acceptance):
    start = time.perf_counter()
    slopes = {}
    for alpha in (0.0, 1.0):
        rep = scaling_sweep(DetuningPattern("ABAB"), [1 / 50, 1 / 100, 1 / 200, 1 / 400], 1.0, 6, alpha)
        slopes[alpha] = rep.fitted_slope
    elapsed = time.perf_counter() - start
    ok = all(abs(s - 1.0) <= 0.15 for s in slopes.values()) and elapsed < 10
    detail = ", ".join(f"alpha={a:g} slope {s:.4f}" for a, s in slopes.items()) + f"; {elapsed:.2f} s"
    assert acceptance(1, "Ising-limit slope 1.0 +- 0.15", ok, detail)


def test_02_revival_time(acceptance):
    start = time.perf_counter()
    worst = 1.0
    for alpha in ALPHAS:
        H = triplet_hamiltonian(TripletParams.resonant(1.0, alpha)).matrix
        t_r = math.pi / math.sqrt(8 + alpha**2)
        assert revival_time(1.0, alpha) == pytest.approx(t_r, abs=1e-15)
        for t in (t_r - 1e-9, t_r, t_r + 1e-9):
            p = barrier_revival(expm_hermitian(H, t), 3, qubit_indices(3, (0, 2)), (1,))
            worst = min(worst, float(p.min()))
    elapsed = time.perf_counter() - start
    ok = worst > 1 - 1e-10 and elapsed < 1
    assert acceptance(2, "revival at t_R for every input", ok, f"min P = 1 - {1 - worst:.2e}; {elapsed:.3f} s")


def test_03_primitive_gate(acceptance):
    moduli, invariants = 0.0, 0.0
    for alpha in ALPHAS:
        num = primitive_gate_numeric(1.0, alpha).matrix
        ana = primitive_gate_analytic(1.0, alpha).matrix
        moduli = max(moduli, float(np.max(np.abs(np.abs(num) - np.abs(ana)))))
        invariants = max(invariants, makhlin(num).distance(makhlin(ana)))
    d_up = phase_aligned_distance(primitive_gate_numeric(1.0, 0.0).matrix, U_P)
    ok = moduli <= 1e-8 and invariants <= 1e-8 and d_up < 1e-8
    detail = f"moduli {moduli:.1e}, Makhlin {invariants:.1e}, |U(0) - U_P| {d_up:.1e}"
    assert acceptance(3, "simulated gate matches analytic", ok, detail)


def test_04_dressed_iswap(acceptance):
    d = phase_aligned_distance(dressed_gate(1.0, 0.0).matrix, ISWAP)
    assert acceptance(4, "dressed XY gate is iSWAP", d < 1e-10, f"distance {d:.1e}")


def test_05_cnot_synthesis(acceptance):
    runs = [("U_P", U_P, 2)] + [(f"alpha={a:g}", primitive_gate_analytic(1.0, a).matrix, 4) for a in (0.3, 0.7, 1.0)]
    parts, ok = [], True
    for label, gate, uses in runs:
        start = time.perf_counter()
        res = synthesize_cnot(gate, uses, seed=0)
        elapsed = time.perf_counter() - start
        ok &= res.distance < 1e-6 and elapsed < 60
        parts.append(f"{label} x{uses}: {res.distance:.1e} ({elapsed:.2f} s)")
    assert acceptance(5, "CNOT synthesis", ok, "; ".join(parts))


def test_06_smooth_switching(acceptance):
    parts, ok = [], True
    for kind in ("cos2", "sin4"):
        start = time.perf_counter()
        try:
            res = search_flat_duration(kind, t_delta=1.25, alpha=0.7, passive_detuning=100.0)
        except NoRevivalWindowError as exc:
            ok = False
            parts.append(f"{kind}: no window ({exc})")
            continue
        elapsed = time.perf_counter() - start
        entangling = is_entangling(nearest_unitary(res.resulting_gate.matrix))
        ok &= res.revival_error < 1e-6 and entangling and elapsed < 120
        parts.append(
            f"{kind}: error {res.revival_error:.2e} at T={res.optimal_flat_duration:.6f}, "
            f"entangling {entangling} ({elapsed:.2f} s)"
        )
    assert acceptance(6, "smooth switching revival < 1e-6", ok, "; ".join(parts))


def test_07_frozen_neighbours(acceptance):
    r100 = frozen_neighbor_check(1.0, 0.0, 100.0)
    r200 = frozen_neighbor_check(1.0, 0.0, 200.0)
    ratio = r100.distance / r200.distance
    detail = f"distance {r100.distance:.3e} -> {r200.distance:.3e}, ratio {ratio:.3f}"
    assert acceptance(7, "frozen-neighbour distance halves", abs(ratio - 2.0) <= 0.5, detail)


def test_08_geometry_ratios(acceptance):
    got = [r_q(chain_layout()), r_q(hex_layout()), r_q(hex_complement_layout())]
    ok = got == [Fraction(1, 2), Fraction(2, 5), Fraction(3, 5)] and all(isinstance(x, Fraction) for x in got)
    assert acceptance(8, "exact r_q", ok, ", ".join(map(str, got)))


PAULI = {"I": np.eye(2), "X": np.array([[0, 1], [1, 0]]), "Y": np.array([[0, -1j], [1j, 0]]), "Z": np.diag([1, -1])}


def _star_kron(k, j_z, detuning):
    n = k + 1

    def op(ops):
        return reduce(np.kron, [PAULI[ops.get(i, "I")] for i in range(n)]).astype(complex)

    H = -detuning * op({0: "Z"})
    for q in range(1, n):
        H = H + op({0: "X", q: "X"}) + op({0: "Y", q: "Y"}) + j_z * op({0: "Z", q: "Z"})
    return H


def _direct_error(k, j_z, c):
    n = k + 1
    up = [i for i in range(1 << n) if not (i >> (n - 1)) & 1]
    U = expm(-1j * c.common_time * _star_kron(k, j_z, c.detuning))
    return float((1 - np.sum(np.abs(U[np.ix_(up, up)]) ** 2, axis=0)).max())


def test_09_commensuration(acceptance):
    start = time.perf_counter()
    k2 = commensurate_search(2, 1.0, 0.7, tolerance=1e-8)
    zero = [c for c in k2 if abs(c.detuning) < 1e-9]
    k2_ok = len(zero) == 1 and _direct_error(2, 0.7, zero[0]) < 1e-8
    k2_ok &= all(_direct_error(2, 0.7, c) < 1e-8 for c in k2)
    k3_parts, k3_ok = [], True
    for j_z in (0.7, 1.0):
        cands = commensurate_search(3, 1.0, j_z)
        errs = [_direct_error(3, j_z, c) for c in cands]
        k3_ok &= all(e < 1e-6 for e in errs)
        found = ", ".join(f"d={c.detuning:.6g} T={c.common_time:.6g}" for c in cands) or "none"
        k3_parts.append(f"k=3 J_Z={j_z:g}: {found}")
    elapsed = time.perf_counter() - start
    zero_err = f"{zero[0].max_error:.1e}" if zero else "missing"
    detail = f"k=2: {len(k2)} candidates, a-b=0 error {zero_err}; " + "; ".join(k3_parts) + f"; {elapsed:.1f} s"
    assert acceptance(9, "commensurate revivals verified", k2_ok and k3_ok, detail)


def _random_su2(rng):
    return euler_zyz(*rng.uniform(0, 2 * np.pi, 3))


def test_10_property_suites(acceptance):
    start = time.perf_counter()
    rng = np.random.default_rng(10)
    checks = {}

    unit, block = 0.0, 0.0
    for _ in range(30):
        n = int(rng.integers(2, 7))
        spec = ChainSpec(n, str(rng.choice(["ring", "open"])), float(rng.uniform(0.1, 2)), float(rng.uniform(0, 1.5)), tuple(rng.uniform(-3, 3, n)))
        U = propagator_exact(build_h(spec).matrix, float(rng.uniform(0, 3))).matrix
        unit = max(unit, unitarity_error(U))
        m = np.diag(total_sz(n).matrix).real
        block = max(block, float(np.abs(U[m[:, None] != m[None, :]]).max(initial=0.0)))
    checks["unitarity"] = (unit < 1e-10, f"{unit:.1e}")
    checks["magnetisation blocks"] = (block < 1e-12, f"{block:.1e}")

    inv = 0.0
    for alpha in ALPHAS:
        G = primitive_gate_analytic(1.0, alpha).matrix
        ref = makhlin(G)
        for _ in range(100):
            A, B, C, D = (_random_su2(rng) for _ in range(4))
            inv = max(inv, makhlin(np.kron(A, B) @ G @ np.kron(C, D)).distance(ref))
    checks["Makhlin invariance"] = (inv < 1e-9, f"{inv:.1e}")

    spec = ChainSpec(6, "ring", 1.0, 1.0, DetuningPattern("ABAB", 2.0).zeeman(6))
    H1, H2 = build_h1(spec).matrix, build_h2(spec).matrix
    exact = propagator_exact(H1 + H2, 1.0).matrix
    ns = [8, 16, 32, 64, 128, 256, 512]
    err = [np.linalg.norm(trotter_propagator(H1, H2, 1.0, n).matrix - exact) for n in ns]
    slope = float(np.polyfit(np.log(ns), np.log(err), 1)[0])
    checks["Trotter slope"] = (abs(slope + 1.0) <= 0.1, f"{slope:.4f}")

    elapsed = time.perf_counter() - start
    ok = all(v[0] for v in checks.values()) and elapsed < 60
    detail = ", ".join(f"{k} {v[1]}" for k, v in checks.items()) + f"; {elapsed:.2f} s"
    assert acceptance(10, "property suites", ok, detail)
