import numpy as np
import pytest

from onebitnet import (NetworkSpec, build_uniform_matrix, from_matrix,
                       neighbor_sets_from_edges, offdiag_square_sum,
                       reference_topology)
from onebitnet.network import NetworkError


def random_network(rng):
    S = int(rng.integers(2, 12))
    ring = [(i, (i + 1) % S) for i in range(S)]
    extra = [(i, j) for i in range(S) for j in range(i + 1, S) if rng.random() < 0.3]
    return build_uniform_matrix(neighbor_sets_from_edges(S, ring + extra),
                                rng.uniform(0.05, 1.0, S))


class TestUniformMatrix:
    def test_single_neighbor_row(self):
        net = build_uniform_matrix(reference_topology(), 0.25)
        row = net.A[9]
        assert row[9] == 0.25
        assert row[7] == 0.75
        assert np.count_nonzero(row) == 2

    def test_five_neighbor_row(self):
        net = build_uniform_matrix(reference_topology(), 0.25)
        row = net.A[3]
        np.testing.assert_allclose(row[row > 0].sum(), 1.0, atol=1e-15)
        off = np.delete(row, 3)
        assert row[3] == 0.25
        np.testing.assert_allclose(off[off > 0], 0.15, rtol=0, atol=1e-15)
        assert np.count_nonzero(off) == 5

    def test_full_self_reliance_is_identity_row(self):
        net = build_uniform_matrix(reference_topology(), 1.0)
        np.testing.assert_array_equal(net.A, np.eye(10))

    def test_isolated_node_requires_unit_weight(self):
        neighbors = [frozenset({0}), frozenset({1, 2}), frozenset({1, 2})]
        with pytest.raises(NetworkError, match="isolated"):
            build_uniform_matrix(neighbors, 0.5)
        net = build_uniform_matrix(neighbors, [1.0, 0.5, 0.5])
        assert net.A[0, 0] == 1.0

    def test_self_weight_range_enforced(self):
        for bad in (0.0, -0.1, 1.2):
            with pytest.raises(NetworkError):
                build_uniform_matrix(reference_topology(), bad)

    @pytest.mark.parametrize("a", [0.1, 0.25, 0.5, 0.9])
    def test_invariants(self, a):
        net = build_uniform_matrix(reference_topology(), a)
        np.testing.assert_allclose(net.A.sum(axis=1), 1.0, rtol=0, atol=1e-12)
        assert np.all(net.A >= 0)
        for k in range(net.size):
            assert k in net.neighbors[k]
            outside = set(np.nonzero(net.A[k])[0]) - set(net.neighbors[k])
            assert not outside

    def test_random_networks_valid(self):
        rng = np.random.default_rng(7)
        for _ in range(30):
            net = random_network(rng)
            np.testing.assert_allclose(net.A.sum(axis=1), 1.0, atol=1e-12)


class TestReferenceTopology:
    def test_benchmark_degrees(self):
        topo = reference_topology()
        assert len(topo) == 10
        assert len(topo[3]) == 6  # five neighbors plus self
        assert len(topo[9]) == 2  # one neighbor plus self

    def test_connected(self):
        net = build_uniform_matrix(reference_topology(), 0.5)
        assert net.is_connected()


class TestOffdiagSquareSum:
    def test_uniform_row_attains_local_lower_bound(self):
        net = build_uniform_matrix(reference_topology(), 0.25)
        got = offdiag_square_sum(net, 3)
        np.testing.assert_allclose(got, 5 * 0.15 ** 2, rtol=0, atol=1e-15)
        np.testing.assert_allclose(got, (1 - 0.25) ** 2 / (net.degree(3) - 1),
                                   rtol=0, atol=1e-15)

    def test_pure_self_reliance_gives_zero(self):
        net = build_uniform_matrix(reference_topology(), 1.0)
        assert offdiag_square_sum(net, 4) == 0.0

    def test_global_bounds_over_random_networks(self):
        rng = np.random.default_rng(11)
        for _ in range(40):
            net = random_network(rng)
            S = net.size
            for k in range(S):
                a_k = net.self_weight(k)
                ssq = offdiag_square_sum(net, k)
                lo = (1 - a_k) ** 2 / (S - 1) if S > 1 else 0.0
                assert lo - 1e-12 <= ssq <= (1 - a_k) + 1e-12


class TestMatrixValidation:
    def test_non_stochastic_rejected(self):
        A = np.array([[0.5, 0.4], [0.5, 0.5]])
        with pytest.raises(NetworkError, match="sum to 1"):
            from_matrix(A)

    def test_explicit_renormalization(self):
        A = np.array([[0.5, 0.4], [0.5, 0.5]])
        net = from_matrix(A, renormalize=True)
        np.testing.assert_allclose(net.A.sum(axis=1), 1.0, atol=1e-15)

    def test_negative_weight_rejected(self):
        A = np.array([[1.1, -0.1], [0.5, 0.5]])
        with pytest.raises(NetworkError, match="nonnegative"):
            from_matrix(A)

    def test_weight_outside_neighborhood_rejected(self):
        neighbors = (frozenset({0}), frozenset({1}))
        A = np.array([[0.5, 0.5], [0.0, 1.0]])
        with pytest.raises(NetworkError, match="neighborhood"):
            NetworkSpec(neighbors=neighbors, A=A)

    def test_node_params(self):
        net = build_uniform_matrix(reference_topology(), 0.5)
        node = net.node_params(3, 0.1)
        assert node.eta == (1 - 0.1) * 0.5
        assert node.c_row[3] == 0.0
        np.testing.assert_array_equal(np.delete(node.c_row, 3),
                                      np.delete(net.A[3], 3))
