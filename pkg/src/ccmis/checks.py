"""Numeric bounds checked against measured runs, and small-graph oracle laws.

Every bound function returns (ok, measured, bound) so harness summaries can
report margins, not only pass/fail.
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .graph import Graph
from .oracles import alpha_of_subset, brute_alpha, brute_beta


def _log2sq(n: int) -> float:
    return math.log2(max(n, 2)) ** 2


def sampled_edges_bound(sampled_edges: int, n: int, c: float = 36.0):
    """Edges inside a 1/sqrt(d)-vertex sample stay below c * n."""
    bound = c * n
    return sampled_edges <= bound, sampled_edges, bound


def mis_residual_degree_bound(max_degree: int, d: float, n: int):
    """After one 1/sqrt(d) vertex-sampling step: Delta(H) <= 2 sqrt(d) ln n."""
    bound = 2.0 * math.sqrt(d) * math.log(max(n, 2))
    return max_degree <= bound, max_degree, bound


def mm_residual_degree_bound(max_degree: int, d: float, n: int):
    """After one 1/d edge-sampling step: Delta(H) <= 2 d ln n."""
    bound = 2.0 * d * math.log(max(n, 2))
    return max_degree <= bound, max_degree, bound


def repeated_reduction_bound(max_degree: int, d: float, r: int, n: int, c: float = 8.0):
    """After r reduction steps: Delta(H) <= c * d^(1/2^r) * log2(n)^2."""
    bound = c * d ** (1.0 / 2 ** r) * _log2sq(n)
    return max_degree <= bound, max_degree, bound


def beta_sparsification_bound(edges: int, beta: int, n: int, c: float = 16.0):
    """After the non-uniform step: |E(H)| <= c * beta * n * log2(n)^3."""
    bound = c * beta * n * math.log2(max(n, 2)) ** 3
    return edges <= bound, edges, bound


def independence_residual_bound(edges: int, n: int, c: float = 1.0):
    """Residual of one reduction step on alpha-bounded input: O(n log^2 n) edges."""
    bound = c * n * _log2sq(n)
    return edges <= bound, edges, bound


def cross_residual_bound(edges: int, beta: int, n: int):
    """Cross-class residual of the matching pipeline: <= 2 beta n log2 n edges."""
    bound = 2.0 * beta * n * math.log2(max(n, 2))
    return edges <= bound, edges, bound


# oracle laws on small graphs ------------------------------------------------


def turan_law(g: Graph) -> bool:
    """n / (d + 1) <= alpha(G)."""
    if g.n == 0:
        return True
    return g.n <= brute_alpha(g) * (g.avg_degree + 1) + 1e-9


def monotone_alpha_law(g: Graph, subset) -> bool:
    """alpha(G[A]) <= alpha(G)."""
    return alpha_of_subset(g, subset) <= brute_alpha(g)


def degree_floor_law(g: Graph, subset, beta: Optional[int] = None) -> bool:
    """alpha(G[A]) <= n beta(G) / delta with delta = min_{v in A} deg_G(v) > 0."""
    subset = np.asarray(subset, dtype=np.int64)
    if subset.size == 0:
        return True
    delta = int(g.degrees[subset].min())
    if delta == 0:
        return True
    b = brute_beta(g) if beta is None else beta
    return alpha_of_subset(g, subset) * delta <= g.n * b


def random_small_graph(rng: np.random.Generator, max_n: int = 16) -> Graph:
    n = int(rng.integers(1, max_n + 1))
    p = float(rng.uniform(0.0, 1.0))
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(iu.shape[0]) < p
    return Graph.from_edges(n, np.stack([iu[keep], ju[keep]], axis=1))


def oracle_law_suite(count: int, seed: int = 0, max_n: int = 16) -> dict:
    """Run the three laws on ``count`` random graphs; returns failure counts."""
    rng = np.random.default_rng(seed)
    fails = {"turan": 0, "monotone": 0, "degree_floor": 0}
    for _ in range(count):
        g = random_small_graph(rng, max_n)
        sub = np.flatnonzero(rng.random(g.n) < 0.5)
        if not turan_law(g):
            fails["turan"] += 1
        if not monotone_alpha_law(g, sub):
            fails["monotone"] += 1
        floor = sub[g.degrees[sub] > 0]
        if not degree_floor_law(g, floor):
            fails["degree_floor"] += 1
    return {"graphs": count, "failures": fails}
