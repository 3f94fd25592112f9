import networkx as nx
import numpy as np
import pytest

from ccmis.generators import cycle_graph, gen_gnp, path_graph, perfect_matching_graph, star_graph
from ccmis.graph import Graph
from ccmis.sim.ledger import RoundLedger
from ccmis.sim.oproute import (OpRouteRefused, bfs_view_edges, op_route, route_precondition)


def _nx_view(g: Graph, v: int, r: int) -> set:
    dist = nx.single_source_shortest_path_length(g.to_networkx(), v, cutoff=r)
    return {(a, b) for a, b in g.edges().tolist() if a in dist and b in dist}


def _ids_to_edges(g: Graph, ids) -> set:
    e = g.edges()
    return {tuple(e[i]) for i in np.asarray(ids).tolist()}


def test_precondition_arithmetic():
    # 2^6 * (3*1 + 12) = 960 <= 4096
    assert route_precondition(2, 4096, 2, 1)
    assert not route_precondition(100, 101, 1, 1)
    assert route_precondition(1, 8, 3, 1)  # 4 * 1 + 3 = 7 <= 8, log Delta taken as 1
    assert not route_precondition(1, 4, 3, 1)  # 4 * 1 + 2 = 6 > 4
    assert route_precondition(0, 5, 4)


def test_star_is_refused():
    with pytest.raises(OpRouteRefused):
        op_route(star_graph(100), 1)


def test_radius_zero_is_incident_edges_and_free():
    g = gen_gnp(200, 0.05, 1)
    led = RoundLedger(g.n)
    res = op_route(g, 0, ledger=led)
    assert len(led) == 0 and res.rounds_charged == 0
    for v in range(g.n):
        want = {tuple(sorted((v, int(u)))) for u in g.neighbors(v)}
        assert _ids_to_edges(g, res.view_edge_ids(v)) == want


def test_bfs_ground_truth_matches_networkx():
    g = gen_gnp(60, 0.05, 3)
    for v in range(0, 60, 7):
        for r in (0, 1, 2, 3):
            assert _ids_to_edges(g, bfs_view_edges(g, v, r)) == _nx_view(g, v, r)


@pytest.mark.parametrize("seed", range(5))
def test_cycle_views_complete_in_two_rounds(seed):
    g = cycle_graph(4096)
    led = RoundLedger(g.n)
    res = op_route(g, 2, c=1, seed=seed, ledger=led)
    assert res.incomplete == 0 and res.attempts == 1
    assert len(led) == 2 and led.violations == 0
    for v in (0, 1, 2047, 4095):
        view = res.view(v)
        assert {tuple(e) for e in view.edges.tolist()} == _nx_view(g, v, 2)
        assert view.degrees[v] == 2


def test_views_on_matching_and_path():
    g = perfect_matching_graph(300)
    res = op_route(g, 1, seed=2)
    assert res.incomplete == 0
    assert _ids_to_edges(g, res.view_edge_ids(5)) == {(4, 5)}
    p = path_graph(3000)
    res = op_route(p, 1, seed=0)
    assert res.incomplete == 0
    assert _ids_to_edges(p, res.view_edge_ids(0)) == {(0, 1)}
    assert _ids_to_edges(p, res.view_edge_ids(10)) == {(9, 10), (10, 11)}


def test_routing_on_induced_subgraph_charges_root_nodes():
    g = cycle_graph(4096)
    h = g.induced(np.arange(4096) != 7)
    led = RoundLedger(g.n)
    res = op_route(h, 1, seed=0, ledger=led)
    assert res.incomplete == 0 and len(led) == 2
    assert led.rounds[0].sent[7] == 0
