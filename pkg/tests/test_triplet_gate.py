from __future__ import annotations

import math

import numpy as np
import pytest

from spinlab.errors import ContractError
from spinlab.evolution import expm_hermitian, phase_aligned_distance, unitarity_error
from spinlab.gate_synth import ISWAP, is_entangling, makhlin
from spinlab.spin_core import basis_index
from spinlab.triplet_gate import (
    DOWN_BLOCK,
    UP_BLOCK,
    TripletParams,
    TwoQubitGate,
    barrier_revival,
    dressed_gate,
    frozen_neighbor_check,
    gate_phase,
    primitive_gate_analytic,
    primitive_gate_numeric,
    qubit_indices,
    revival_time,
    subspace_eigensystem,
    triplet_hamiltonian,
)

ALPHAS = [0.0, 0.3, 0.7, 1.0]
U_P = np.array([[1, 0, 0, 0], [0, 0, -1, 0], [0, -1, 0, 0], [0, 0, 0, -1]], dtype=complex)
XX = np.kron([[0, 1], [1, 0]], [[0, 1], [1, 0]])


class TestHamiltonian:
    def test_all_up_energy(self):
        # Zeeman a + b + a plus two aligned bonds of J_Z each
        p = TripletParams(0.4, -0.3, 1.0, 0.7)
        H = triplet_hamiltonian(p).matrix
        assert H[0, 0].real == pytest.approx(2 * 0.4 - 0.3 + 2 * 0.7)

    def test_block_structure(self):
        H = triplet_hamiltonian(TripletParams(0.2, 0.5, 1.0, 0.6)).matrix
        blocks = [(0,), UP_BLOCK, DOWN_BLOCK, (7,)]
        for i, bi in enumerate(blocks):
            for j, bj in enumerate(blocks):
                if i != j:
                    assert not np.any(H[np.ix_(bi, bj)])

    @pytest.mark.parametrize("a,b,jz", [(0.0, 0.0, 0.0), (0.3, -0.2, 0.7), (1.0, 0.5, 1.0)])
    def test_up_block_form(self, a, b, jz):
        p = TripletParams(a, b, 1.3, jz)
        H = triplet_hamiltonian(p).matrix
        expected = b * np.eye(3) + 2 * p.j_xy * np.array([[0, 1, 0], [1, p.p, 1], [0, 1, 0]])
        np.testing.assert_allclose(H[np.ix_(UP_BLOCK, UP_BLOCK)].real, expected, atol=1e-13)

    @pytest.mark.parametrize("a,b,jz", [(0.0, 0.0, 0.0), (0.3, -0.2, 0.7)])
    def test_down_block_form(self, a, b, jz):
        p = TripletParams(a, b, 1.3, jz)
        H = triplet_hamiltonian(p).matrix
        expected = -b * np.eye(3) + 2 * p.j_xy * np.array([[0, 1, 0], [1, p.q, 1], [0, 1, 0]])
        np.testing.assert_allclose(H[np.ix_(DOWN_BLOCK, DOWN_BLOCK)].real, expected, atol=1e-13)


class TestEigensystem:
    def test_xy_resonance(self):
        es = subspace_eigensystem(TripletParams(0.0, 0.0, 1.0, 0.0), "up")
        p = TripletParams(0.0, 0.0, 1.0, 0.0)
        assert p.p == p.q == 0.0
        assert p.s_p == p.s_q == pytest.approx(math.sqrt(8))
        # (1, +-sqrt2, 1) / 2 for the bright states
        np.testing.assert_allclose(np.abs(es.vectors[1, 1:]), [math.sqrt(2) / 2] * 2, atol=1e-14)

    @pytest.mark.parametrize("which", ["up", "down"])
    def test_closed_form_energies(self, which):
        es = subspace_eigensystem(TripletParams(0.3, -0.4, 1.0, 0.7), which)
        np.testing.assert_allclose(es.energies, es.closed_form, atol=1e-12)

    @pytest.mark.parametrize("which", ["up", "down"])
    def test_antisymmetric_state_energy(self, which):
        p = TripletParams(0.3, -0.4, 1.7, 0.5)
        es = subspace_eigensystem(p, which)
        np.testing.assert_allclose(es.vectors[:, 0], np.array([1, 0, -1]) / math.sqrt(2), atol=1e-12)
        assert es.energies[0] == pytest.approx(es.block[0, 0])

    def test_splitting(self):
        for which in ("up", "down"):
            es = subspace_eigensystem(TripletParams(0.0, 0.0, 1.0, 0.7), which)
            assert es.energies[2] - es.energies[1] == pytest.approx(2 * math.sqrt(8.49), abs=1e-12)

    def test_unit_vectors(self):
        es = subspace_eigensystem(TripletParams(0.1, 0.2, 1.0, 0.3), "down")
        np.testing.assert_allclose(np.linalg.norm(es.vectors, axis=0), 1.0)
        assert np.all(es.vectors[0] > 0)


class TestRevival:
    @pytest.mark.parametrize("jz,expected", [(0.0, math.pi / math.sqrt(8)), (1.0, math.pi / 3), (0.7, math.pi / math.sqrt(8.49))])
    def test_formula(self, jz, expected):
        assert revival_time(1.0, jz) == pytest.approx(expected, abs=1e-15)

    @pytest.mark.parametrize("alpha", ALPHAS)
    def test_all_inputs_revive_at_t_r(self, alpha):
        H = triplet_hamiltonian(TripletParams.resonant(1.0, alpha)).matrix
        U = expm_hermitian(H, revival_time(1.0, alpha))
        p = barrier_revival(U, 3, qubit_indices(3, (0, 2)), (1,))
        assert p.min() > 1 - 1e-10

    @pytest.mark.parametrize("alpha", ALPHAS)
    def test_first_revival(self, alpha):
        H = triplet_hamiltonian(TripletParams.resonant(1.0, alpha)).matrix
        t_r = revival_time(1.0, alpha)
        idx = qubit_indices(3, (0, 2))
        # 1 - P grows like t^2, so the first few percent of t_R sit above 1 - 1e-4 trivially
        for t in np.linspace(0.05 * t_r, 0.95 * t_r, 400):
            assert barrier_revival(expm_hermitian(H, t), 3, idx, (1,)).min() < 1 - 1e-4

    def test_all_up_is_stationary(self):
        H = triplet_hamiltonian(TripletParams.resonant(1.0, 0.7)).matrix
        for t in np.linspace(0, 5, 11):
            assert abs(expm_hermitian(H, t)[0, 0]) == pytest.approx(1.0, abs=1e-13)

    def test_phase_regular_at_zero(self):
        assert gate_phase(1.0, 0.0) == 0.0
        assert gate_phase(1.0, 1.0) == pytest.approx(math.pi / 6)


class TestGates:
    def test_analytic_xy_gate(self):
        np.testing.assert_allclose(primitive_gate_analytic(1.0, 0.0).matrix, U_P, atol=1e-15)

    def test_analytic_heisenberg_moduli(self):
        m = np.abs(primitive_gate_analytic(1.0, 1.0).matrix)
        assert m[1, 1] == pytest.approx(0.5)
        assert m[1, 2] == pytest.approx(math.sqrt(3) / 2)

    @pytest.mark.parametrize("alpha", ALPHAS)
    def test_numeric_matches_analytic(self, alpha):
        num = primitive_gate_numeric(1.0, alpha)
        ana = primitive_gate_analytic(1.0, alpha)
        assert np.max(np.abs(np.abs(num.matrix) - np.abs(ana.matrix))) <= 1e-8
        assert makhlin(num.matrix).distance(makhlin(ana.matrix)) <= 1e-8
        assert phase_aligned_distance(num.matrix, ana.matrix) < 1e-8
        assert unitarity_error(num.matrix) < 1e-10

    def test_xy_gate_numeric(self):
        assert phase_aligned_distance(primitive_gate_numeric(1.0, 0.0).matrix, U_P) < 1e-8

    @pytest.mark.parametrize("alpha", ALPHAS)
    def test_entangling(self, alpha):
        assert is_entangling(primitive_gate_analytic(1.0, alpha).matrix)

    @pytest.mark.parametrize("alpha", [0.3, 1.0])
    def test_other_encoding_is_bit_flipped(self, alpha):
        up = primitive_gate_numeric(1.0, alpha, zero_state="up").matrix
        down = primitive_gate_numeric(1.0, alpha, zero_state="down").matrix
        assert phase_aligned_distance(down, XX @ up @ XX) < 1e-12
        assert makhlin(down).distance(makhlin(up)) < 1e-10

    def test_outer_resonance_differs_by_local_z(self):
        central = primitive_gate_numeric(1.0, 0.7, resonance_by="central").matrix
        outer = primitive_gate_numeric(1.0, 0.7, resonance_by="outer").matrix
        assert makhlin(central).distance(makhlin(outer)) < 1e-10
        ratio = np.diag(outer) / np.diag(central)
        # product of two single-qubit Z phases: r00 r11 = r01 r10
        assert ratio[0] * ratio[3] == pytest.approx(ratio[1] * ratio[2], abs=1e-12)

    def test_raw_frame_is_local_equivalent(self):
        raw = primitive_gate_numeric(1.0, 0.7, frame="raw").matrix
        passive = primitive_gate_numeric(1.0, 0.7).matrix
        assert makhlin(raw).distance(makhlin(passive)) < 1e-10

    def test_dressed_gate_iswap(self):
        assert phase_aligned_distance(dressed_gate(1.0, 0.0).matrix, ISWAP) < 1e-10

    @pytest.mark.parametrize("alpha", ALPHAS)
    def test_dressed_gate_properties(self, alpha):
        d = dressed_gate(1.0, alpha).matrix
        assert d[0, 0] == pytest.approx(d[3, 3], abs=1e-12)
        assert makhlin(d).distance(makhlin(primitive_gate_analytic(1.0, alpha).matrix)) < 1e-10

    def test_json_round_trip(self):
        g = primitive_gate_numeric(1.0, 0.3)
        back = TwoQubitGate.from_json(g.to_json())
        np.testing.assert_array_equal(back.matrix, g.matrix)
        assert back.meta["t_R"] == g.meta["t_R"]

    def test_rejects_non_unitary(self):
        with pytest.raises(ContractError):
            TwoQubitGate(np.eye(4) * 1.1)

    def test_qubit_indices(self):
        assert qubit_indices(3, (0, 2)) == [0, 1, 4, 5]
        assert qubit_indices(3, (0, 2), "down")[0] == basis_index([False, True, False])


class TestFrozenNeighbours:
    def test_xy_distance_small(self):
        assert frozen_neighbor_check(1.0, 0.0, 100.0).distance < 0.05

    @pytest.mark.parametrize("alpha", [0.0, 0.7, 1.0])
    def test_distance_halves(self, alpha):
        r100 = frozen_neighbor_check(1.0, alpha, 100.0)
        r200 = frozen_neighbor_check(1.0, alpha, 200.0)
        assert r100.distance / r200.distance == pytest.approx(2.0, abs=0.5)

    @pytest.mark.parametrize("big", [100.0, 200.0])
    def test_edges_stay_up(self, big):
        rep = frozen_neighbor_check(1.0, 0.7, big)
        assert min(rep.edge_sz) > 1 - 10 / big**2
        assert rep.barrier_revival > 1 - 1e-3
