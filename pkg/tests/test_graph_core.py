# -*- coding: utf-8 -*-
"""
graph_core 测试：边列表读取、双度序列、可图性判定、图距离与子图预处理
"""
import itertools
from functools import lru_cache

import networkx as nx
import numpy as np
import pytest

from modules.errors import DomainError, EdgeListParseError
from modules.graph_core import (BiDegreeSequence, DirectedGraph, IntegerBiSequence, bi_degree_sequence,
                                degree_quantiles, drop_zero_degree, graph_distance, is_bigraphical,
                                load_edge_list, parse_edge_list, preprocess_subgraph, single_pass_filter,
                                write_edge_list)


@lru_cache(maxsize=None)
def realizable_sequences(n: int) -> frozenset:
    """穷举 n 个节点的全部有向图得到的双度序列集合"""
    slots = [(i, j) for i in range(n) for j in range(n) if i != j]
    found = set()
    for bits in itertools.product((0, 1), repeat=len(slots)):
        out = [0] * n
        inn = [0] * n
        for (i, j), bit in zip(slots, bits):
            out[i] += bit
            inn[j] += bit
        found.add(tuple(out + inn))
    return frozenset(found)


class TestLoadEdgeList:

    def test_two_way_pair(self):
        g = load_edge_list("0 1\n1 0\n")
        assert g.n == 2
        assert g.adjacency[0, 1] and g.adjacency[1, 0]

    def test_duplicates_and_self_loops(self):
        parsed = parse_edge_list("0 1\n0 1\n0 0\n")
        assert parsed.graph.n == 2
        assert parsed.graph.num_edges == 1
        assert parsed.self_loops_dropped == 1
        assert parsed.duplicates_collapsed == 1

    def test_comments_blank_lines_and_trailing_columns(self):
        text = "# header\n\n10 20 1082040961\n20 30 1082040999\n"
        parsed = parse_edge_list(text)
        assert parsed.graph.n == 3
        assert parsed.graph.labels == (10, 20, 30)
        assert parsed.graph.adjacency[0, 1] and parsed.graph.adjacency[1, 2]

    def test_malformed_line_reports_line_number(self):
        with pytest.raises(EdgeListParseError) as excinfo:
            load_edge_list("0 1\n1 x\n")
        assert excinfo.value.line_number == 2

    def test_single_token_line(self):
        with pytest.raises(EdgeListParseError):
            load_edge_list("0 1\n7\n")

    def test_fewer_than_two_nodes(self):
        with pytest.raises(DomainError):
            load_edge_list("3 3\n")

    def test_write_then_read_keeps_isolated_nodes(self):
        g = DirectedGraph.from_edges(4, [(0, 1), (2, 1)])
        again = load_edge_list(write_edge_list(g))
        assert again.n == 4
        np.testing.assert_array_equal(again.adjacency, g.adjacency)

    def test_write_keeps_original_labels(self):
        g = load_edge_list("10 20\n20 30\n30 10\n")
        assert write_edge_list(g) == "10 20\n20 30\n30 10\n"

    def test_isolated_labelled_node_survives(self):
        g = load_edge_list("# node -4\n7 3\n")
        assert g.labels == (-4, 3, 7)
        text = write_edge_list(g)
        assert text == "# node -4\n7 3\n"
        again = load_edge_list(text)
        assert again.labels == g.labels
        np.testing.assert_array_equal(again.adjacency, g.adjacency)


class TestDirectedGraph:

    def test_rejects_self_loop(self):
        adj = np.zeros((3, 3), dtype=int)
        adj[1, 1] = 1
        with pytest.raises(DomainError):
            DirectedGraph(adj)

    def test_rejects_non_binary(self):
        with pytest.raises(DomainError):
            DirectedGraph(np.array([[0, 2], [0, 0]]))

    def test_adjacency_is_read_only(self):
        g = DirectedGraph.complete(3)
        with pytest.raises(ValueError):
            g.adjacency[0, 1] = False


class TestBiDegreeSequence:

    def test_empty_graph(self):
        seq = bi_degree_sequence(DirectedGraph.empty(3))
        assert seq.out_degrees.tolist() == [0, 0, 0]
        assert seq.in_degrees.tolist() == [0, 0, 0]

    def test_complete_graph(self):
        seq = bi_degree_sequence(DirectedGraph.complete(3))
        assert seq.out_degrees.tolist() == [2, 2, 2]
        assert seq.in_degrees.tolist() == [2, 2, 2]

    def test_hand_count(self):
        seq = bi_degree_sequence(DirectedGraph.from_edges(3, [(0, 1), (0, 2), (2, 1)]))
        assert seq.out_degrees.tolist() == [2, 0, 1]
        assert seq.in_degrees.tolist() == [0, 2, 1]

    def test_sums_agree_on_random_graphs(self, rng):
        for _ in range(20):
            g = DirectedGraph((rng.random((15, 15)) < 0.3) & ~np.eye(15, dtype=bool))
            seq = bi_degree_sequence(g)
            assert seq.out_degrees.sum() == seq.in_degrees.sum()
            assert seq.out_degrees.max() <= 14

    def test_matches_networkx(self, rng):
        adj = (rng.random((12, 12)) < 0.4) & ~np.eye(12, dtype=bool)
        seq = bi_degree_sequence(DirectedGraph(adj))
        nx_graph = nx.from_numpy_array(adj.astype(int), create_using=nx.DiGraph)
        assert seq.out_degrees.tolist() == [nx_graph.out_degree(i) for i in range(12)]
        assert seq.in_degrees.tolist() == [nx_graph.in_degree(i) for i in range(12)]

    def test_negative_entry_rejected(self):
        with pytest.raises(DomainError):
            BiDegreeSequence(np.array([1, -1]), np.array([0, 0]))


class TestIsBigraphical:

    def test_examples(self):
        assert is_bigraphical([0, 0, 0, 0, 0, 0], 3)
        assert is_bigraphical([2, 2, 2, 2, 2, 2], 3)
        assert not is_bigraphical([2, 0, 0, 2, 0, 0], 3)

    def test_out_of_range_and_sum_mismatch(self):
        assert not is_bigraphical([-1, 1, 0, 0], 2)
        assert not is_bigraphical([2, 0, 1, 1], 2)
        assert not is_bigraphical([1, 0, 0, 0], 2)

    def test_length_mismatch(self):
        with pytest.raises(DomainError):
            is_bigraphical([0, 0, 0, 0], 3)

    def test_accepts_typed_sequences(self):
        seq = bi_degree_sequence(DirectedGraph.from_edges(3, [(0, 1), (1, 2)]))
        assert is_bigraphical(seq)
        assert is_bigraphical(IntegerBiSequence.from_bidegree(seq))

    @pytest.mark.parametrize('n', [2, 3])
    def test_agrees_with_enumeration_exhaustively(self, n):
        realizable = realizable_sequences(n)
        for values in itertools.product(range(-1, n + 1), repeat=2 * n):
            assert is_bigraphical(list(values), n) == (values in realizable), values

    def test_agrees_with_enumeration_n4_sampled(self, rng):
        realizable = realizable_sequences(4)
        samples = rng.integers(-1, 5, size=(100_000, 8))
        # 保证正例足量
        positives = np.array(sorted(realizable))[rng.integers(0, len(realizable), size=10_000)]
        for values in np.vstack([samples, positives]):
            assert is_bigraphical(values, 4) == (tuple(int(v) for v in values) in realizable)


class TestGraphDistance:

    def test_examples(self):
        g = DirectedGraph.from_edges(3, [(0, 1)])
        assert graph_distance(g, g) == 0
        assert graph_distance(DirectedGraph.empty(3), DirectedGraph.complete(3)) == 6
        assert graph_distance(DirectedGraph.from_edges(2, [(0, 1)]), DirectedGraph.from_edges(2, [(1, 0)])) == 2

    def test_mismatched_sizes(self):
        with pytest.raises(DomainError):
            graph_distance(DirectedGraph.empty(2), DirectedGraph.empty(3))

    def test_metric_properties(self, rng):
        off = ~np.eye(8, dtype=bool)
        for _ in range(30):
            a, b, c = (DirectedGraph((rng.random((8, 8)) < 0.5) & off) for _ in range(3))
            assert graph_distance(a, b) == graph_distance(b, a)
            assert graph_distance(a, c) <= graph_distance(a, b) + graph_distance(b, c)
            assert (graph_distance(a, b) == 0) == np.array_equal(a.adjacency, b.adjacency)


class TestPreprocessSubgraph:

    def test_negative_thresholds_keep_everything(self, rng):
        g = DirectedGraph((rng.random((10, 10)) < 0.2) & ~np.eye(10, dtype=bool))
        sub, keep = preprocess_subgraph(g, -1, -1)
        assert keep.tolist() == list(range(10))
        np.testing.assert_array_equal(sub.adjacency, g.adjacency)

    def test_star_has_no_survivors(self):
        star = DirectedGraph.from_edges(4, [(0, 1), (0, 2), (0, 3)])
        with pytest.raises(DomainError):
            preprocess_subgraph(star, 0, 0)

    def test_iteration_reaches_fixed_point(self):
        # 0↔1↔2 的环带一条悬挂链 2→3→4；删除 4 后 3 的出度随之降为 0
        edges = [(0, 1), (1, 0), (1, 2), (2, 1), (2, 0), (0, 2), (2, 3), (3, 4), (4, 3)]
        g = DirectedGraph.from_edges(5, edges)
        sub, keep = preprocess_subgraph(g, 0, 0)
        assert keep.tolist() == [0, 1, 2, 3, 4]

        g = DirectedGraph.from_edges(5, [(0, 1), (1, 0), (1, 2), (2, 1), (2, 3), (3, 4)])
        sub, keep = preprocess_subgraph(g, 0, 0)
        assert keep.tolist() == [0, 1, 2]
        single, single_keep = single_pass_filter(g, 0, 0)
        assert single_keep.tolist() == [0, 1, 2, 3]

    def test_survivors_exceed_thresholds(self, rng):
        g = DirectedGraph((rng.random((60, 60)) < 0.2) & ~np.eye(60, dtype=bool))
        sub, keep = preprocess_subgraph(g, 5, 5)
        seq = bi_degree_sequence(sub)
        assert seq.out_degrees.min() > 5
        assert seq.in_degrees.min() > 5
        assert sub.labels == tuple(keep.tolist())

    def test_drop_zero_degree_on_fixture(self, fixture_edges):
        with open(fixture_edges, 'r', encoding='utf-8') as f:
            parsed = parse_edge_list(f)
        assert parsed.graph.n == 50
        assert parsed.self_loops_dropped == 1
        nonzero, keep = drop_zero_degree(parsed.graph)
        seq = bi_degree_sequence(nonzero)
        assert nonzero.n < 50
        assert seq.out_degrees.min() > 0 and seq.in_degrees.min() > 0


def test_degree_quantiles():
    seq = BiDegreeSequence(np.array([0, 1, 2, 3, 4]), np.array([4, 3, 2, 1, 0]))
    summary = degree_quantiles(seq)
    assert summary['quantiles'] == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert summary['out'] == [0.0, 1.0, 2.0, 3.0, 4.0]
    assert summary['in'] == [0.0, 1.0, 2.0, 3.0, 4.0]
