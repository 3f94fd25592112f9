import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ccmis.checks import beta_sparsification_bound, cross_residual_bound
from ccmis.generators import (cluster_cliques, complete_graph, cycle_graph, disjoint_union,
                              gen_gnp_avg, gen_structured, perfect_matching_graph, star_graph)
from ccmis.graph import Graph
from ccmis.oracles import brute_alpha, verify_maximal_matching, verify_mis
from ccmis.sim.ledger import RoundLedger
from ccmis.solvers import (independence_rounds_for, mis_by_avg_degree, mis_by_independence,
                           mis_by_neighborhood_independence, mm_pipeline, reduction_rounds_for)

from conftest import small_graphs

MIS_PIPELINES = {
    "avg": lambda g, s: mis_by_avg_degree(g, s),
    "independence": lambda g, s: mis_by_independence(g, 0.5, s),
    "neighborhood": lambda g, s: mis_by_neighborhood_independence(g, s),
}
MM_MODES = {
    "avg": lambda g, s: mm_pipeline(g, "avg-degree", s),
    "independence": lambda g, s: mm_pipeline(g, "independence", s, mu=0.5),
    "neighborhood": lambda g, s: mm_pipeline(g, "neighborhood-independence", s),
}


def _central_within_budget(res):
    return all(e["m"] <= res.ledger.budget for e in res.endgame
               if e["kind"] in ("central", "central-sparse"))


# round-count formulas ----------------------------------------------------------


def test_reduction_rounds_formula():
    assert reduction_rounds_for(2 ** 16, 1) == 1
    assert reduction_rounds_for(2 ** 16, 16) == 1      # log d = 4 = sqrt(log n)
    assert reduction_rounds_for(2 ** 16, 32) == 2      # 5 / 4 -> ceil(log2 1.25) = 1
    assert reduction_rounds_for(2 ** 14, 2 ** 7) == 2  # 7 / sqrt(14) = 1.87
    assert reduction_rounds_for(10 ** 5, 4096) == 3    # 12 / 4 = 3 -> ceil(log2 3) = 2
    assert reduction_rounds_for(2 ** 10, 2 ** 10) == 3
    for k in (12, 14, 16, 18):
        assert reduction_rounds_for(2 ** k, 2 ** math.isqrt(k)) == 1


def test_independence_rounds_formula():
    assert independence_rounds_for(1) == 1
    assert independence_rounds_for(0.5) == 2
    assert independence_rounds_for(0.1) == 5
    with pytest.raises(ValueError):
        independence_rounds_for(0)


# fixed examples ----------------------------------------------------------------


@pytest.mark.parametrize("name", list(MIS_PIPELINES))
def test_edgeless_graph_gives_all_vertices(name):
    g = Graph.empty(50)
    res = MIS_PIPELINES[name](g, 0)
    assert len(res.solution) == 50 and res.iterations == 0 and res.valid


@pytest.mark.parametrize("name", list(MIS_PIPELINES))
def test_clique_gives_one_vertex(name):
    res = MIS_PIPELINES[name](complete_graph(40), 3)
    assert len(res.solution) == 1 and res.valid


def test_star_forest():
    g = disjoint_union(*[star_graph(k) for k in (1, 3, 7, 20)])
    res = mis_by_neighborhood_independence(g, 1)
    assert res.valid
    for v in res.solution.members.tolist():
        assert not any(int(u) in set(res.solution.members.tolist()) for u in g.neighbors(v))


@pytest.mark.parametrize("seed", range(5))
def test_avg_degree_moderate_instance(seed):
    g = gen_gnp_avg(2 ** 14, 2 ** 7, seed)
    res = mis_by_avg_degree(g, seed)
    assert res.valid and res.iterations <= 3
    assert res.violations == 0 and _central_within_budget(res)


def test_independence_mode_on_disjoint_cliques():
    d = 64
    g = cluster_cliques([d] * 64)
    assert brute_alpha(cluster_cliques([4] * 3)) == 3  # alpha = n / d on a small copy
    res = mis_by_independence(g, 1.0, 2)
    assert res.valid and res.notes["r_independence"] == 1
    after = res.notes["after_reduction"]
    assert after["m"] <= g.n * math.log2(g.n) ** 2
    # residual edges against n * Delta(H)^2 / d^mu
    assert after["m"] <= max(1, g.n * after["max_degree"] ** 2 / d)


@pytest.mark.parametrize("seed", range(3))
def test_independence_mode_on_random_graph(seed):
    g = gen_gnp_avg(10 ** 4, 100, seed)
    res = mis_by_independence(g, 0.5, seed)
    assert res.valid and res.iterations <= res.notes["r_independence"] + 3


@pytest.mark.parametrize("seed", range(3))
def test_neighborhood_mode_on_line_graph(seed):
    g = gen_structured("line-graph-of-gnp", {"n": 3000, "d": 30}, seed)
    res = mis_by_neighborhood_independence(g, seed)
    assert res.valid
    ok, _, _ = beta_sparsification_bound(res.notes["after_nonuniform"]["m"], 2, g.n)
    assert ok


def test_matching_examples():
    g = perfect_matching_graph(100)
    for name, fn in MM_MODES.items():
        res = fn(g, 0)
        assert len(res.solution) == 100 and res.valid, name
        res = fn(complete_graph(4), 0)
        assert len(res.solution) == 2 and res.valid, name


@pytest.mark.parametrize("seed", range(3))
def test_matching_by_classes_on_line_graph(seed):
    g = gen_structured("line-graph-of-gnp", {"n": 3000, "d": 30}, seed)
    res = mm_pipeline(g, "neighborhood-independence", seed)
    assert res.valid
    assert res.notes["free_not_independent_in_class"] == 0
    ok, _, _ = cross_residual_bound(res.notes["cross_residual_edges"], 2, g.n)
    assert ok


def test_unknown_matching_mode():
    with pytest.raises(ValueError):
        mm_pipeline(cycle_graph(5), "bogus")
    with pytest.raises(ValueError):
        mm_pipeline(cycle_graph(5), "independence")


def test_forced_local_endgame_stays_valid():
    g = cycle_graph(4096)
    res = mis_by_avg_degree(g, 1, endgame_mode="local")
    assert res.valid and res.endgame[0]["kind"] == "local"
    assert res.endgame[-1]["kind"] == "central"
    res = mm_pipeline(g, seed=1, endgame_mode="local")
    assert res.valid and res.endgame[0]["kind"] == "local"


def test_shared_ledger_accumulates():
    g = gen_gnp_avg(3000, 20, 0)
    led = RoundLedger(g.n)
    a = mis_by_avg_degree(g, 0, ledger=led)
    before = len(led)
    assert before > 0
    mm_pipeline(g, seed=0, ledger=led)
    assert len(led) > before and a.rounds == len(led)  # results read the shared ledger


def test_result_json_fields():
    res = mis_by_avg_degree(gen_gnp_avg(500, 10, 1), 1)
    d = res.to_dict()
    assert set(d) == {"solution_size", "iterations", "rounds", "residual_stats",
                      "budget_violations", "endgame", "valid"}
    assert len(d["residual_stats"]) == len(res.reports)


# properties ----------------------------------------------------------------------


@given(small_graphs(12), st.sampled_from(list(MIS_PIPELINES)), st.integers(0, 2 ** 32))
def test_every_mis_pipeline_output_is_valid(g, name, seed):
    res = MIS_PIPELINES[name](g, seed)
    assert res.valid and verify_mis(g, res.solution)
    assert _central_within_budget(res)


@given(small_graphs(12), st.sampled_from(list(MM_MODES)), st.integers(0, 2 ** 32))
def test_every_mm_pipeline_output_is_valid(g, name, seed):
    res = MM_MODES[name](g, seed)
    assert res.valid and verify_maximal_matching(g, res.solution)
    assert _central_within_budget(res)


@given(small_graphs(12), st.integers(0, 2 ** 32))
def test_pipelines_are_seed_deterministic(g, seed):
    a = mis_by_avg_degree(g, seed)
    b = mis_by_avg_degree(g, seed)
    assert a.solution == b.solution and a.rounds == b.rounds


@pytest.mark.parametrize("family", ["gnp", "line", "interval", "cliques"])
def test_pipelines_on_families(family):
    if family == "gnp":
        g = gen_gnp_avg(4000, 50, 7)
    elif family == "line":
        g = gen_structured("line-graph-of-gnp", {"n": 600, "d": 12}, 7)
    elif family == "interval":
        g = gen_structured("interval", {"n": 3000, "d": 20}, 7)
    else:
        g = cluster_cliques([30] * 40, q=0.01, seed=7)
    for fn in list(MIS_PIPELINES.values()) + list(MM_MODES.values()):
        res = fn(g, 7)
        assert res.valid and res.violations == 0
