import numpy as np
import pytest
from hypothesis import given, settings

from graphpurify import oracle
from graphpurify.bipartite import BellDiagState
from graphpurify.diag import depolarize_all, perfect_state
from graphpurify.graphs import build_graph, correlation_operator, edge_graph, path, ring

from conftest import graphs


def _pauli_string_matrix(p):
    return p.sign * oracle.pauli_matrix(p.letters)


class TestGraphBasis:
    def test_single_vertex_plus(self):
        psi = oracle.graph_basis_state(build_graph(1, []), 0)
        np.testing.assert_allclose(psi, np.array([1, 1]) / np.sqrt(2), atol=1e-12)

    def test_edge_state(self):
        psi = oracle.graph_basis_state(edge_graph(), 0)
        # qubit 0 is the low bit: (|0+> + |1->)/sqrt2 in (q1 q0) order
        plus, minus = np.array([1, 1]) / np.sqrt(2), np.array([1, -1]) / np.sqrt(2)
        ref = (np.kron(plus, [1, 0]) + np.kron(minus, [0, 1])) / np.sqrt(2)
        assert abs(abs(np.vdot(ref, psi)) - 1.0) < 1e-12

    def test_ring_gram(self):
        u = oracle.basis_matrix(ring(5))
        np.testing.assert_allclose(u.conj().T @ u, np.eye(32), atol=1e-10)

    @settings(max_examples=25, deadline=None)
    @given(graphs(1, 5))
    def test_eigen_relations(self, g):
        ks = [_pauli_string_matrix(correlation_operator(g, a)) for a in range(g.n)]
        for mu in range(1 << g.n):
            psi = oracle.graph_basis_state(g, mu)
            for a, k in enumerate(ks):
                np.testing.assert_allclose(k @ psi, (-1) ** ((mu >> a) & 1) * psi, atol=1e-12)

    def test_size_cap(self):
        with pytest.raises(oracle.OracleError):
            oracle.graph_basis_state(path(oracle.MAX_QUBITS + 1), 0)


class TestGates:
    def test_identity(self):
        rho = oracle.density_from_diag(perfect_state(ring(3)))
        np.testing.assert_allclose(oracle.apply_channel_or_gate(rho, np.eye(8)), rho)

    def test_dimension_mismatch(self):
        rho = oracle.density_from_diag(perfect_state(ring(3)))
        with pytest.raises(oracle.OracleError):
            oracle.apply_channel_or_gate(rho, np.eye(4))
        with pytest.raises(oracle.OracleError):
            oracle.apply_channel_or_gate(rho, ("cnot", 0, 5))

    def test_cnot_adds_edges(self):
        # CNOT a -> b between two graph states joins a to every neighbour of b
        g = build_graph(6, [(0, 1), (0, 2), (3, 4), (3, 5), (4, 5)])
        rho = oracle.density_from_diag(perfect_state(g))
        out = oracle.apply_channel_or_gate(rho, ("cnot", 0, 3))
        joined = build_graph(6, [(0, 1), (0, 2), (3, 4), (3, 5), (4, 5), (0, 4), (0, 5)])
        d, off = oracle.graph_diagonal_extract(out, joined)
        assert d.lam[0] == pytest.approx(1.0, abs=1e-12)
        assert off < 1e-12

    def test_depolarize_matches_diag(self):
        g = ring(4)
        rho = oracle.density_from_diag(perfect_state(g))
        for v in range(4):
            rho = oracle.apply_channel_or_gate(rho, ("depolarize", v, 0.8))
        ref, off = oracle.graph_diagonal_extract(rho, g)
        np.testing.assert_allclose(ref.lam, depolarize_all(perfect_state(g), 0.8).lam, atol=1e-12)
        assert off <= 1e-12


class TestPartialTrace:
    def test_product_factor(self):
        a = oracle.to_density(np.array([1, 0], dtype=complex))
        b = np.eye(2) / 2
        np.testing.assert_allclose(oracle.partial_trace(oracle.tensor(a, b), [0]), a, atol=1e-14)
        np.testing.assert_allclose(oracle.partial_trace(oracle.tensor(a, b), [1]), b, atol=1e-14)

    def test_ring_adjacent_pair_entropy(self):
        rho = oracle.density_from_diag(perfect_state(ring(5)))
        red = oracle.partial_trace(rho, [0, 1])
        ev = np.sort(np.linalg.eigvalsh(red))
        np.testing.assert_allclose(ev, [0.25] * 4, atol=1e-12)
        assert oracle.von_neumann_entropy(red) == pytest.approx(2.0, abs=1e-12)

    def test_ring_pairs_all_two_bits(self):
        rho = oracle.density_from_diag(perfect_state(ring(5)))
        for a in range(5):
            for b in range(a + 1, 5):
                assert oracle.von_neumann_entropy(oracle.partial_trace(rho, [a, b])) == pytest.approx(2.0, abs=1e-10)


class TestPPT:
    def test_maximally_mixed(self):
        assert oracle.ppt_min_eigenvalue(np.eye(4) / 4) == pytest.approx(0.25, abs=1e-14)

    def test_werner_boundary(self):
        pair = BellDiagState.from_x(1.0 / 3.0).as_diag()
        assert abs(oracle.ppt_min_eigenvalue(oracle.density_from_diag(pair))) < 1e-12

    def test_bell_pair(self):
        pair = perfect_state(edge_graph())
        assert oracle.ppt_min_eigenvalue(oracle.density_from_diag(pair)) == pytest.approx(-0.5, abs=1e-12)

    def test_rejects_three_qubits(self):
        with pytest.raises(oracle.OracleError):
            oracle.ppt_min_eigenvalue(np.eye(8) / 8)


class TestExtract:
    def test_projector(self):
        g = ring(4)
        rho = oracle.to_density(oracle.graph_basis_state(g, 5))
        d, off = oracle.graph_diagonal_extract(rho, g)
        assert d.lam[5] == pytest.approx(1.0)
        assert off < 1e-12

    def test_rotated_is_not_diagonal(self):
        g = ring(3)
        rho = oracle.density_from_diag(perfect_state(g))
        _, off = oracle.graph_diagonal_extract(oracle.apply_1q(rho, oracle.HAD, 0), g)
        assert off > 0.1

    def test_size_mismatch(self):
        with pytest.raises(oracle.OracleError):
            oracle.graph_diagonal_extract(np.eye(4) / 4, ring(3))
