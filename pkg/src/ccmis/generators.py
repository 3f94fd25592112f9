"""Random and structured graph generators.

All generators are deterministic functions of their arguments and seed.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from . import _kernels as K
from .graph import Graph
from .rng import sub_seed


def gen_gnp(n: int, p: float, seed: int) -> Graph:
    """Erdos-Renyi G(n, p) by geometric skipping over the pair sequence."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    pairs = n * (n - 1) // 2
    mean = pairs * p
    cap = int(mean + 8.0 * math.sqrt(mean + 1.0) + 64)
    cap = min(cap, pairs) if pairs else 0
    s = sub_seed(seed, 0x61)
    while True:
        counts, cols, ok = K.gnp_upper(n, float(p), s, max(cap, 1))
        if ok:
            break
        cap = min(2 * cap + 64, pairs)
    return Graph.from_upper(n, counts, cols)


def gen_gnp_avg(n: int, d: float, seed: int) -> Graph:
    """G(n, p) with p chosen so the expected average degree is ``d``."""
    p = min(1.0, d / (n - 1)) if n > 1 else 0.0
    return gen_gnp(n, p, seed)


def gen_gnm(n: int, m: int, seed: int) -> Graph:
    """Uniform graph with exactly ``m`` edges."""
    pairs = n * (n - 1) // 2
    if not 0 <= m <= pairs:
        raise ValueError("m out of range")
    rng = np.random.default_rng(sub_seed(seed, 0x62))
    if m == 0:
        return Graph.empty(n)
    if pairs <= 50_000_000:
        codes = np.sort(rng.choice(pairs, size=m, replace=False))
        u, v = _unrank_pairs(codes, n)
        return Graph.from_edges(n, np.stack([u, v], axis=1))
    got = np.zeros(0, dtype=np.int64)
    while got.shape[0] < m:
        need = m - got.shape[0]
        k = int(need * 1.05) + 16
        a = rng.integers(0, n, size=k)
        b = rng.integers(0, n, size=k)
        keep = a != b
        a, b = a[keep], b[keep]
        code = np.minimum(a, b) * n + np.maximum(a, b)
        # keep first-drawn occurrences so the result does not depend on sorting
        code = np.concatenate([got, code])
        _, first = np.unique(code, return_index=True)
        code = code[np.sort(first)]
        got = code[:m]
    got = np.sort(got)
    return Graph.from_edges(n, np.stack([got // n, got % n], axis=1))


def _unrank_pairs(codes: np.ndarray, n: int):
    # row u holds pairs (u, u+1..n-1); row start s(u) = u*n - u*(u+1)/2
    u = np.floor(((2 * n - 1) - np.sqrt((2.0 * n - 1) ** 2 - 8.0 * codes)) / 2).astype(np.int64)
    u = np.clip(u, 0, n - 2)
    start = u * n - u * (u + 1) // 2
    # fix float rounding at row boundaries
    low = codes < start
    while np.any(low):
        u[low] -= 1
        start = u * n - u * (u + 1) // 2
        low = codes < start
    nxt = (u + 1) * n - (u + 1) * (u + 2) // 2
    high = codes >= nxt
    while np.any(high):
        u[high] += 1
        start = u * n - u * (u + 1) // 2
        nxt = (u + 1) * n - (u + 1) * (u + 2) // 2
        high = codes >= nxt
    v = codes - start + u + 1
    return u, v


# structured families ------------------------------------------------------


def line_graph(g: Graph) -> Graph:
    """Line graph; vertex i is the i-th edge of ``g`` in lexicographic order."""
    eid = K.edge_ids(g.indptr, g.indices)
    a, b = K.line_graph_upper(g.indptr, g.indices, eid, g.m)
    return Graph.from_edges(g.m, np.stack([a, b], axis=1))


def interval_graph(starts) -> Graph:
    """Unit-interval graph: i ~ j iff |start_i - start_j| < 1, ids by position."""
    x = np.sort(np.asarray(starts, dtype=np.float64))
    n = x.shape[0]
    right = np.searchsorted(x, x + 1.0, side="left")
    counts = (right - np.arange(n) - 1).astype(np.int64)
    cols = np.concatenate([np.arange(i + 1, right[i]) for i in range(n)]) if n else np.zeros(0)
    return Graph.from_upper(n, counts, cols.astype(np.int32))


def cluster_cliques(sizes: Sequence[int], q: float = 0.0, seed: int = 0) -> Graph:
    """Disjoint cliques of the given sizes, plus inter-clique edges w.p. ``q``."""
    sizes = [int(s) for s in sizes]
    if any(s < 1 for s in sizes):
        raise ValueError("clique sizes must be positive")
    if not 0.0 <= q <= 1.0:
        raise ValueError("q must lie in [0, 1]")
    n = sum(sizes)
    cid = np.repeat(np.arange(len(sizes)), sizes)
    parts = []
    off = 0
    for s in sizes:
        iu, ju = np.triu_indices(s, 1)
        parts.append(np.stack([iu + off, ju + off], axis=1))
        off += s
    if q > 0.0 and n > 1:
        r = gen_gnp(n, q, sub_seed(seed, 0x63))
        e = r.edges()
        parts.append(e[cid[e[:, 0]] != cid[e[:, 1]]])
    edges = np.concatenate(parts) if parts else np.zeros((0, 2), dtype=np.int64)
    return Graph.from_edges(n, edges)


def gen_structured(kind: str, params: dict, seed: int) -> Graph:
    """Claw-limited test families.

    kinds: ``line-graph-of-gnp`` (params ``n`` and ``d`` or ``p``, or a
    ``base`` graph), ``interval`` (``n``, optional ``d`` target degree),
    ``cluster-cliques`` (``sizes``, optional ``q``).
    """
    params = dict(params)
    if kind == "line-graph-of-gnp":
        base = params.get("base")
        if base is None:
            n = int(params["n"])
            if "p" in params:
                base = gen_gnp(n, float(params["p"]), seed)
            elif "d" in params:
                base = gen_gnp_avg(n, float(params["d"]), seed)
            else:
                raise ValueError("line-graph-of-gnp needs 'p', 'd' or 'base'")
        return line_graph(base)
    if kind == "interval":
        n = int(params["n"])
        if n < 1:
            raise ValueError("n must be at least 1")
        d = float(params.get("d", 4.0))
        if d <= 0:
            raise ValueError("d must be positive")
        span = max(1.0, 2.0 * n / d)
        rng = np.random.default_rng(sub_seed(seed, 0x64))
        return interval_graph(rng.uniform(0.0, span, size=n))
    if kind == "cluster-cliques":
        if "sizes" not in params:
            raise ValueError("cluster-cliques needs 'sizes'")
        return cluster_cliques(params["sizes"], float(params.get("q", 0.0)), seed)
    raise ValueError(f"unknown structured kind {kind!r}")


# small named graphs --------------------------------------------------------


def path_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise ValueError("cycle needs at least 3 vertices")
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def complete_graph(n: int) -> Graph:
    iu, ju = np.triu_indices(n, 1)
    return Graph.from_edges(n, np.stack([iu, ju], axis=1))


def star_graph(leaves: int) -> Graph:
    return Graph.from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def perfect_matching_graph(pairs: int) -> Graph:
    return Graph.from_edges(2 * pairs, [(2 * i, 2 * i + 1) for i in range(pairs)])


def petersen_graph() -> Graph:
    """Petersen graph as the Kneser graph K(5,2).

    Vertex i is the i-th 2-subset of {0..4} in lexicographic order; two
    vertices are adjacent iff their subsets are disjoint.
    """
    subsets = [(a, b) for a in range(5) for b in range(a + 1, 5)]
    edges = [(i, j) for i in range(10) for j in range(i + 1, 10)
             if not set(subsets[i]) & set(subsets[j])]
    return Graph.from_edges(10, edges)


def disjoint_union(*graphs: Graph) -> Graph:
    parts = []
    off = 0
    for g in graphs:
        parts.append(g.edges() + off)
        off += g.n
    edges = np.concatenate(parts) if parts else np.zeros((0, 2), dtype=np.int64)
    return Graph.from_edges(off, edges)
