import io

import numpy as np
import pytest
from hypothesis import given

from ccmis.graph import DegreeClassPartition, Graph, Matching, VertexSet, read_edge_list, write_edge_list
from ccmis.generators import complete_graph, path_graph

from conftest import small_graphs


def test_from_edges_builds_symmetric_sorted_rows():
    g = Graph.from_edges(4, [(2, 0), (0, 1), (3, 1)])
    g.validate()
    assert g.n == 4 and g.m == 3
    assert g.neighbors(0).tolist() == [1, 2]
    assert g.neighbors(1).tolist() == [0, 3]
    assert g.degrees.tolist() == [2, 2, 1, 1]
    assert g.has_edge(3, 1) and not g.has_edge(2, 3)
    assert g.edges().tolist() == [[0, 1], [0, 2], [1, 3]]


def test_rejects_loops_duplicates_and_range():
    with pytest.raises(ValueError):
        Graph.from_edges(3, [(1, 1)])
    with pytest.raises(ValueError):
        Graph.from_edges(3, [(0, 1), (1, 0)])
    with pytest.raises(ValueError):
        Graph.from_edges(3, [(0, 3)])
    g = Graph.from_edges(3, [(0, 1), (1, 0), (2, 2)], check_simple=False)
    assert g.m == 1


def test_validate_catches_asymmetry():
    g = Graph(np.array([0, 1, 1]), np.array([1]))
    with pytest.raises(ValueError):
        g.validate()


@given(small_graphs())
def test_degree_sum_and_stats(g):
    assert int(g.degrees.sum()) == 2 * g.m
    if g.n:
        assert g.min_degree <= g.avg_degree <= g.max_degree
    g.validate()


@given(small_graphs())
def test_induced_keeps_original_labels(g):
    keep = np.arange(g.n) % 2 == 0
    h = g.induced(keep)
    h.validate()
    assert h.root_n == g.n
    assert h.labels.tolist() == np.flatnonzero(keep).tolist()
    lab = h.labels
    for a, b in h.edges().tolist():
        assert g.has_edge(int(lab[a]), int(lab[b]))
    expected = sum(1 for a, b in g.edges().tolist() if keep[a] and keep[b])
    assert h.m == expected
    # inducing twice composes labels
    hh = h.induced(np.arange(h.n) % 2 == 0)
    assert set(hh.labels.tolist()) <= set(lab.tolist())


@given(small_graphs())
def test_edge_list_round_trip(g):
    buf = io.StringIO()
    write_edge_list(g, buf)
    text = buf.getvalue()
    lines = text.splitlines()
    assert lines[0] == f"{g.n} {g.m}"
    for ln in lines[1:]:
        u, v = map(int, ln.split())
        assert u < v


def test_edge_list_file_round_trip_and_errors(tmp_path):
    g = complete_graph(5)
    p = tmp_path / "k5.txt"
    write_edge_list(g, p)
    assert read_edge_list(p) == g
    bad = tmp_path / "bad.txt"
    bad.write_text("3 2\n0 1\n0 1\n")
    with pytest.raises(ValueError):
        read_edge_list(bad)
    bad.write_text("3 1\n1 1\n")
    with pytest.raises(ValueError):
        read_edge_list(bad)
    bad.write_text("3 2\n0 1\n")
    with pytest.raises(ValueError):
        read_edge_list(bad)
    bad.write_text("3 1\n2 1\n")
    with pytest.raises(ValueError):
        read_edge_list(bad)


def test_vertex_set_and_matching_containers():
    s = VertexSet([3, 1, 3], 5)
    assert s.members.tolist() == [1, 3] and 3 in s and 2 not in s
    assert s.mask().tolist() == [False, True, False, True, False]
    with pytest.raises(ValueError):
        VertexSet([5], 5)
    m = Matching([(3, 2), (0, 1)], 4)
    assert m.pairs.tolist() == [[0, 1], [2, 3]]
    assert (2, 3) in m and len(m) == 2
    with pytest.raises(ValueError):
        Matching([(0, 1), (1, 2)], 3)
    mate = np.array([1, 0, -1])
    assert Matching.from_mate(mate).pairs.tolist() == [[0, 1]]


def test_graph_equality_and_networkx_export():
    assert path_graph(4) == Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
    nxg = path_graph(4).to_networkx()
    assert nxg.number_of_edges() == 3
    assert DegreeClassPartition((), VertexSet([], 0), 0).threshold(3) == 8
