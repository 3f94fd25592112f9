import networkx as nx
import numpy as np
import pytest
from hypothesis import given, strategies as st

from ccmis.generators import (cluster_cliques, complete_graph, cycle_graph, disjoint_union, gen_gnm,
                              gen_gnp, gen_gnp_avg, gen_structured, interval_graph, line_graph,
                              path_graph, perfect_matching_graph, petersen_graph, star_graph)
from ccmis.oracles import brute_beta


def test_gnp_extremes():
    assert gen_gnp(5, 0.0, 1).m == 0
    assert gen_gnp(5, 1.0, 1) == complete_graph(5)
    with pytest.raises(ValueError):
        gen_gnp(5, 1.5, 0)


def test_gnp_edge_count_band():
    # binomial mean C(10^4, 2) * 1e-3 = 49995; band [44000, 56000]
    inside = sum(44000 <= gen_gnp(10_000, 1e-3, s).m <= 56000 for s in range(100))
    assert inside >= 99


def test_gnp_is_deterministic_and_seed_sensitive():
    a, b, c = gen_gnp(3000, 0.01, 7), gen_gnp(3000, 0.01, 7), gen_gnp(3000, 0.01, 8)
    assert a == b and a != c
    a.validate()


def test_gnp_pairs_are_uniform():
    # every pair position is equally likely: lower-id endpoints spread like C(n,2) rows
    n = 400
    counts = np.zeros(n)
    for s in range(40):
        e = gen_gnp(n, 0.05, s).edges()
        counts += np.bincount(e[:, 0], minlength=n)
    expected = 40 * 0.05 * (n - 1 - np.arange(n))
    # compare the first and second halves of the row profile
    assert abs(counts[:200].sum() / expected[:200].sum() - 1) < 0.03
    assert abs(counts[200:].sum() / expected[200:].sum() - 1) < 0.06


def test_gnp_avg_degree_close():
    g = gen_gnp_avg(20_000, 40, 0)
    assert abs(g.avg_degree - 40) < 1.0


@given(st.integers(2, 60), st.data())
def test_gnm_exact_edge_count(n, data):
    m = data.draw(st.integers(0, n * (n - 1) // 2))
    g = gen_gnm(n, m, data.draw(st.integers(0, 100)))
    assert g.m == m
    g.validate()


def test_gnm_large_path_uses_rejection():
    g = gen_gnm(20_000, 30_000, 3)
    assert g.m == 30_000
    assert g == gen_gnm(20_000, 30_000, 3)


def test_structured_examples():
    g = gen_structured("cluster-cliques", {"sizes": [3, 3]}, 0)
    assert g.m == 6 and g.n == 6
    lp = gen_structured("line-graph-of-gnp", {"base": path_graph(6)}, 0)
    assert lp == path_graph(5)
    assert brute_beta(lp) == 2
    for s in range(20):
        iv = gen_structured("interval", {"n": 8, "d": 3}, s)
        assert brute_beta(iv) <= 2
    with pytest.raises(ValueError):
        gen_structured("nope", {}, 0)
    with pytest.raises(ValueError):
        gen_structured("line-graph-of-gnp", {"n": 5}, 0)


def test_line_graph_matches_networkx():
    base = gen_gnp(40, 0.15, 2)
    lg = line_graph(base)
    ref = nx.line_graph(base.to_networkx())
    assert lg.n == ref.number_of_nodes() and lg.m == ref.number_of_edges()
    edges = [tuple(e) for e in base.edges().tolist()]
    idx = {e: i for i, e in enumerate(edges)}
    got = {tuple(sorted((idx[a], idx[b]))) for a, b in
           ((tuple(sorted(x)), tuple(sorted(y))) for x, y in ref.edges())}
    assert got == {tuple(e) for e in lg.edges().tolist()}


def test_line_graphs_and_unit_intervals_have_beta_at_most_two():
    for s in range(10):
        base = gen_gnp(12, 0.4, s)
        lg = line_graph(base)
        if lg.m and lg.max_degree <= 40:
            assert brute_beta(lg) <= 2
        rng = np.random.default_rng(s)
        assert brute_beta(interval_graph(rng.uniform(0, 4, size=14))) <= 2


def test_interval_graph_adjacency():
    g = interval_graph([0.0, 0.5, 1.2, 3.0])
    assert g.edges().tolist() == [[0, 1], [1, 2]]


def test_cluster_cliques_with_cross_edges():
    g = cluster_cliques([4, 4, 4], q=0.5, seed=1)
    assert g.m >= 18
    with pytest.raises(ValueError):
        cluster_cliques([0])


def test_named_graphs():
    pg = petersen_graph()
    assert pg.n == 10 and pg.m == 15 and set(pg.degrees.tolist()) == {3}
    assert nx.is_isomorphic(pg.to_networkx(), nx.petersen_graph())
    assert cycle_graph(5).m == 5 and star_graph(4).max_degree == 4
    assert perfect_matching_graph(3).m == 3
    u = disjoint_union(complete_graph(3), path_graph(2))
    assert u.n == 5 and u.m == 4 and u.has_edge(3, 4)
    with pytest.raises(ValueError):
        cycle_graph(2)
