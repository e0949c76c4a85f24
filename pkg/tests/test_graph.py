from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_graph
from regmatch.errors import ConstructionError, DomainError, InvalidMatchingError, ParityError
from regmatch.graph import (
    Graph,
    classify_alpha_regular,
    complete_bipartite,
    complete_graph,
    cycle_graph,
    disjoint_edges,
    gen_regular_bipartite,
    gen_regular_general,
    path_graph,
    read_edge_list,
    remove_matched,
    validate,
    write_edge_list,
)
from regmatch.matching import Matching


class TestGraphType:
    def test_rejects_self_loop(self):
        with pytest.raises(ValueError):
            Graph.from_edges(3, [(1, 1)])

    def test_rejects_parallel_edge(self):
        with pytest.raises(ValueError):
            Graph.from_edges(3, [(0, 1), (1, 0)])

    def test_rejects_edge_inside_side(self):
        with pytest.raises(ValueError):
            Graph.from_edges(3, [(0, 1)], side=[0, 0, 1])

    def test_adjacency_sorted_and_symmetric(self):
        g = Graph.from_edges(4, [(3, 0), (2, 0), (1, 2)])
        adj = g.adjacency()
        assert adj == [[2, 3], [2], [0, 1], [0]]
        for u, nb in enumerate(adj):
            for v in nb:
                assert u in adj[v]

    def test_edges_canonical(self):
        g = Graph.from_edges(3, [(2, 1), (1, 0)])
        assert g.edges.tolist() == [[0, 1], [1, 2]]

    def test_immutable_arrays(self):
        g = path_graph(3)
        with pytest.raises(ValueError):
            g.edges[0, 0] = 2


class TestGenerators:
    def test_bipartite_one_permutation(self):
        g = gen_regular_bipartite(2, 1, 5)
        assert g.node_count == 4 and g.edge_count == 2
        assert set(g.degrees.tolist()) == {1}

    def test_bipartite_complete(self):
        g = gen_regular_bipartite(4, 4, 3)
        assert g.edge_count == 16
        rep = validate(g)
        assert rep.is_regular and rep.regular_degree == 4 and rep.is_bipartite

    def test_bipartite_validates(self):
        rep = validate(gen_regular_bipartite(1000, 16, 7))
        assert rep.is_regular and rep.regular_degree == 16 and rep.is_bipartite

    def test_bipartite_delta_too_large(self):
        with pytest.raises(DomainError):
            gen_regular_bipartite(3, 4, 0)

    def test_bipartite_retry_cap(self):
        with pytest.raises(ConstructionError):
            gen_regular_bipartite(40, 39, 1, retry_cap=0)

    def test_general_k4(self):
        g = gen_regular_general(4, 3, 1)
        assert sorted(map(tuple, g.edges.tolist())) == sorted(map(tuple, complete_graph(4).edges.tolist()))

    def test_general_triangle(self):
        g = gen_regular_general(3, 2, 9)
        assert g.edge_count == 3 and set(g.degrees.tolist()) == {2}

    def test_general_validates(self):
        rep = validate(gen_regular_general(2000, 50, 11))
        assert rep.is_regular and rep.regular_degree == 50

    def test_general_parity(self):
        with pytest.raises(ParityError):
            gen_regular_general(5, 3, 0)

    def test_zero_degree(self):
        assert gen_regular_bipartite(5, 0, 1).edge_count == 0
        assert gen_regular_general(6, 0, 1).edge_count == 0

    @given(st.integers(1, 30), st.integers(0, 6), st.integers(0, 2**63 - 1))
    def test_bipartite_property(self, n, d, seed):
        d = min(d, n)
        g = gen_regular_bipartite(n, d, seed)
        rep = validate(g)
        assert rep.is_bipartite
        assert set(g.degrees.tolist()) <= {d}
        assert g.edge_count == n * d

    @given(st.integers(2, 30), st.integers(0, 5), st.integers(0, 2**63 - 1))
    def test_general_property(self, n, d, seed):
        d = min(d, n - 1)
        if n * d % 2:
            n += 1
        g = gen_regular_general(n, d, seed)
        assert g.edge_count == n * d // 2
        assert np.all(g.degrees == d)

    @pytest.mark.parametrize("gen,args", [(gen_regular_bipartite, (50, 5)), (gen_regular_general, (60, 7 - 1))])
    def test_deterministic(self, gen, args):
        a = gen(*args, 123)
        b = gen(*args, 123)
        c = gen(*args, 124)
        assert np.array_equal(a.edges, b.edges)
        assert not np.array_equal(a.edges, c.edges)


class TestValidate:
    def test_c4(self):
        rep = validate(cycle_graph(4))
        assert rep.is_regular and rep.regular_degree == 2 and rep.is_bipartite

    def test_c5(self):
        rep = validate(cycle_graph(5))
        assert rep.is_regular and not rep.is_bipartite

    def test_k4(self):
        rep = validate(complete_graph(4))
        assert rep.regular_degree == 3 and not rep.is_bipartite

    def test_irregular(self):
        rep = validate(path_graph(4))
        assert not rep.is_regular and rep.regular_degree is None
        assert rep.min_degree == 1 and rep.max_degree == 2
        assert rep.mean_degree == Fraction(3, 2)

    def test_disconnected_odd_cycle(self):
        g = Graph.from_edges(7, [(0, 1), (2, 3), (3, 4), (4, 2)])
        assert not validate(g).is_bipartite

    @given(st.integers(1, 14), st.floats(0, 1), st.integers(0, 1000))
    def test_report_invariants(self, n, p, seed):
        g = random_graph(n, p, seed)
        rep = validate(g)
        assert sum(rep.degree_histogram.values()) == n
        assert rep.is_regular == (rep.min_degree == rep.max_degree)


def _brute_alpha_regular(g, alpha, delta):
    lo, hi = delta * (1 - alpha), delta * (1 + alpha)
    out = set()
    for u in range(g.node_count):
        if all(lo <= int(g.degrees[v]) <= hi for v in g.ball(u, 2)):
            out.add(u)
    return out


class TestAlphaRegular:
    def test_regular_all(self):
        g = gen_regular_bipartite(20, 3, 1)
        assert classify_alpha_regular(g, 0, 3) == set(range(40))

    def test_c6_chord(self):
        g = Graph.from_edges(6, [(i, (i + 1) % 6) for i in range(6)] + [(0, 3)])
        res = classify_alpha_regular(g, 0, 2)
        assert res == _brute_alpha_regular(g, 0, 2)
        # every node of C6 is within 2 hops of node 0 or node 3
        assert res == set()

    def test_c8_chord(self):
        g = Graph.from_edges(8, [(i, (i + 1) % 8) for i in range(8)] + [(0, 4)])
        res = classify_alpha_regular(g, 0, 2)
        assert res == _brute_alpha_regular(g, 0, 2) == set()
        g = Graph.from_edges(10, [(i, (i + 1) % 10) for i in range(10)] + [(0, 2)])
        assert classify_alpha_regular(g, 0, 2) == {5, 6, 7} == _brute_alpha_regular(g, 0, 2)

    def test_empty_graph(self):
        assert classify_alpha_regular(Graph.from_edges(5, []), 0, 1) == set()

    @given(st.integers(2, 12), st.floats(0.05, 0.9), st.integers(0, 500),
           st.fractions(0, 1), st.fractions(0, 1), st.integers(1, 6))
    def test_matches_brute_and_monotone(self, n, p, seed, a1, a2, delta):
        g = random_graph(n, p, seed)
        lo, hi = sorted((a1, a2))
        small = classify_alpha_regular(g, lo, delta)
        big = classify_alpha_regular(g, hi, delta)
        assert small == _brute_alpha_regular(g, lo, delta)
        assert small <= big


class TestRemoveMatched:
    def test_c4_one_edge(self):
        g = cycle_graph(4)
        r = remove_matched(g, Matching.from_edges(4, [(0, 1)]))
        assert r.node_count == 2 and r.edge_count == 1
        assert r.origin.tolist() == [2, 3]

    def test_empty_matching(self):
        g = cycle_graph(5)
        r = remove_matched(g, Matching.empty(5))
        assert np.array_equal(r.edges, g.edges) and r.node_count == 5

    def test_perfect(self):
        g = complete_bipartite(3, 3)
        m = Matching.from_edges(6, [(0, 3), (1, 4), (2, 5)])
        r = remove_matched(g, m)
        assert r.node_count == 0 and r.edge_count == 0

    def test_non_edge(self):
        with pytest.raises(InvalidMatchingError):
            remove_matched(path_graph(4), Matching.from_edges(4, [(0, 2)]))

    def test_shared_endpoint(self):
        with pytest.raises(InvalidMatchingError):
            Matching.from_edges(3, [(0, 1), (1, 2)])

    @given(st.integers(2, 14), st.floats(0.1, 0.9), st.integers(0, 500))
    def test_node_count(self, n, p, seed):
        g = random_graph(n, p, seed)
        used, edges = set(), []
        for a, b in g.edges.tolist():
            if a not in used and b not in used:
                used |= {a, b}
                edges.append((a, b))
        m = Matching.from_edges(n, edges)
        r = remove_matched(g, m)
        assert r.node_count == n - 2 * m.size
        # surviving edges are exactly those between unmatched nodes
        keep = [(a, b) for a, b in g.edges.tolist() if a not in used and b not in used]
        back = sorted(tuple(sorted((int(r.origin[a]), int(r.origin[b])))) for a, b in r.edges.tolist())
        assert back == sorted(keep)


class TestEdgeList:
    def test_roundtrip(self, tmp_path):
        g = gen_regular_bipartite(10, 3, 2)
        path = tmp_path / "g.edges"
        write_edge_list(g, path)
        h = read_edge_list(path)
        assert h.node_count == g.node_count and np.array_equal(h.edges, g.edges)
        assert h.side is not None

    def test_header_format(self, tmp_path):
        path = tmp_path / "c4.edges"
        write_edge_list(cycle_graph(4), path)
        assert path.read_text().splitlines()[0].split()[:2] == ["4", "4"]

    def test_rejects_parallel(self, tmp_path):
        path = tmp_path / "bad.edges"
        path.write_text("3 2\n0 1\n1 0\n")
        with pytest.raises(ValueError):
            read_edge_list(path)

    def test_rejects_short(self, tmp_path):
        path = tmp_path / "bad.edges"
        path.write_text("3 2\n0 1\n")
        with pytest.raises(ValueError):
            read_edge_list(path)

    def test_disjoint_edges_helper(self):
        g = disjoint_edges(3)
        assert g.node_count == 6 and np.all(g.degrees == 1)
