import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphcorr.graphs import (
    BinaryGraph,
    Permutation,
    WeightedGraph,
    all_pairs,
    canonical_pair,
    intersect,
    induced_edge_weight,
    pair_from_index,
    pair_index,
    pairs_from_indices,
    read_binary_graph,
    read_permutation,
    read_weighted_graph,
    relabel,
    write_binary_graph,
    write_permutation,
    write_weighted_graph,
)


def g(n, edges):
    return BinaryGraph(n, frozenset(edges))


class TestPermutation:
    def test_identity_and_inverse(self):
        pi = Permutation((2, 0, 1))
        assert pi.invert().compose(pi) == Permutation.identity(3)

    def test_composition_convention(self):
        # (pi o tau)(i) = pi(tau(i))
        pi = Permutation((1, 2, 0))
        tau = Permutation((0, 2, 1))
        assert pi.compose(tau).mapping == tuple(pi(tau(i)) for i in range(3))

    def test_rejects_non_bijection(self):
        with pytest.raises(ValueError):
            Permutation((0, 0, 1))

    def test_from_cycles(self):
        pi = Permutation.from_cycles(4, [(0, 1), (2, 3)])
        assert pi.mapping == (1, 0, 3, 2)


class TestPairIndex:
    def test_round_trip_all(self):
        for n in (2, 3, 7, 12):
            for idx, (i, j) in enumerate(all_pairs(n)):
                assert pair_index(i, j, n) == idx
                assert pair_from_index(idx, n) == (i, j)

    def test_vectorized_matches_scalar(self):
        n = 57
        idx = np.arange(n * (n - 1) // 2)
        i, j = pairs_from_indices(idx, n)
        for t in range(0, len(idx), 97):
            assert (int(i[t]), int(j[t])) == pair_from_index(int(idx[t]), n)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            pair_index(1, 1, 4)
        with pytest.raises(ValueError):
            pair_from_index(6, 4)


class TestRelabel:
    def test_identity(self):
        b = g(4, {(0, 1), (2, 3)})
        assert relabel(b, Permutation.identity(4)) == b

    def test_single_edge_pullback(self):
        # result[i][j] = B[pi(i)][pi(j)]: the edge {1,2} of B appears where
        # pi maps to it, here at {3,1} (1-based)
        b = g(3, {(0, 1)})
        pi = Permutation((1, 2, 0))
        assert relabel(b, pi).edges == frozenset({(0, 2)})
        dense = relabel(b, pi).to_dense()
        bd = b.to_dense()
        for i in range(3):
            for j in range(3):
                assert dense[i, j] == bd[pi(i), pi(j)]

    def test_inverse_round_trip(self):
        b = g(5, {(0, 1), (1, 4), (2, 3)})
        pi = Permutation((3, 0, 4, 1, 2))
        assert relabel(relabel(b, pi), pi.invert()) == b

    def test_weighted(self):
        rng = np.random.default_rng(0)
        w = rng.standard_normal((4, 4))
        w = np.triu(w, 1) + np.triu(w, 1).T
        wg = WeightedGraph(w)
        pi = Permutation((2, 3, 1, 0))
        out = relabel(wg, pi)
        for i in range(4):
            for j in range(4):
                assert out.weight[i, j] == w[pi(i), pi(j)]

    def test_size_mismatch(self):
        with pytest.raises(ValueError):
            relabel(g(3, set()), Permutation.identity(4))

    @settings(max_examples=60, deadline=None)
    @given(st.data(), st.integers(3, 8))
    def test_composition_action(self, data, n):
        pi = Permutation(tuple(data.draw(st.permutations(range(n)))))
        tau = Permutation(tuple(data.draw(st.permutations(range(n)))))
        edges = data.draw(
            st.sets(
                st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)).filter(
                    lambda e: e[0] != e[1]
                ),
                max_size=8,
            )
        )
        b = g(n, {canonical_pair(*e) for e in edges})
        assert relabel(b, pi.compose(tau)) == relabel(relabel(b, pi), tau)
        assert relabel(b, pi).edge_count == b.edge_count


class TestIntersect:
    def test_idempotent_and_commutative(self):
        a = g(4, {(0, 1), (0, 2)})
        b = g(4, {(0, 1), (1, 2)})
        assert intersect(a, a) == a
        assert intersect(a, b) == intersect(b, a) == g(4, {(0, 1)})

    def test_with_empty(self):
        a = g(4, {(0, 1), (0, 2)})
        assert intersect(a, BinaryGraph.empty(4)) == BinaryGraph.empty(4)

    def test_associative(self):
        a = g(5, {(0, 1), (0, 2), (3, 4)})
        b = g(5, {(0, 1), (1, 2), (3, 4)})
        c = g(5, {(0, 1), (3, 4), (2, 4)})
        assert intersect(intersect(a, b), c) == intersect(a, intersect(b, c))

    def test_weighted_product(self):
        w1 = WeightedGraph(np.array([[0.0, 2.0], [2.0, 0.0]]))
        w2 = WeightedGraph(np.array([[0.0, -3.0], [-3.0, 0.0]]))
        assert intersect(w1, w2).weight[0, 1] == -6.0


class TestInducedEdgeWeight:
    def test_empty_set(self):
        assert induced_edge_weight(g(4, {(0, 1)}), set()) == 0

    def test_complete_graph(self):
        assert induced_edge_weight(BinaryGraph.complete(4), {0, 1, 2}) == 3

    def test_partial(self):
        a = g(4, {(0, 1), (2, 3)})
        assert induced_edge_weight(a, {0, 1, 2}) == 1

    def test_weighted(self):
        w = np.zeros((3, 3))
        w[0, 1] = w[1, 0] = 2.5
        w[1, 2] = w[2, 1] = -1.0
        assert induced_edge_weight(WeightedGraph(w), {0, 1, 2}) == 1.5


class TestValidation:
    def test_no_self_loops(self):
        with pytest.raises(ValueError):
            BinaryGraph(3, frozenset({(1, 1)}))

    def test_canonicalizes_pairs(self):
        assert BinaryGraph(3, frozenset({(2, 0)})).edges == frozenset({(0, 2)})

    def test_weighted_graph_symmetry(self):
        with pytest.raises(ValueError):
            WeightedGraph(np.array([[0.0, 1.0], [2.0, 0.0]]))

    def test_weighted_graph_readonly(self):
        wg = WeightedGraph(np.zeros((3, 3)))
        with pytest.raises(ValueError):
            wg.weight[0, 1] = 5.0


class TestFileFormats:
    def test_binary_round_trip(self, tmp_path):
        b = g(5, {(0, 4), (1, 2)})
        path = tmp_path / "g.txt"
        write_binary_graph(b, path)
        assert path.read_text().splitlines()[0] == "5"
        assert read_binary_graph(path) == b

    def test_weighted_round_trip(self, tmp_path):
        rng = np.random.default_rng(1)
        w = rng.standard_normal((4, 4))
        w = np.triu(w, 1) + np.triu(w, 1).T
        path = tmp_path / "w.txt"
        write_weighted_graph(WeightedGraph(w), path)
        assert np.allclose(read_weighted_graph(path).weight, w)

    def test_permutation_round_trip(self, tmp_path):
        pi = Permutation((2, 0, 3, 1))
        path = tmp_path / "pi.txt"
        write_permutation(pi, path)
        assert path.read_text().strip() == "3 1 4 2"
        assert read_permutation(path) == pi
