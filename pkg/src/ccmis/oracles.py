"""Exact small-graph oracles and result verifiers."""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from . import _kernels as K
from .graph import DegreeClassPartition, Graph, Matching, VertexSet

ALPHA_MAX_N = 40
BETA_MAX_DEGREE = 40


class SizeLimitError(ValueError):
    pass


def _adj_masks(g: Graph) -> list:
    masks = []
    for v in range(g.n):
        m = 0
        for u in g.neighbors(v).tolist():
            m |= 1 << u
        masks.append(m)
    return masks


def _alpha_masks(adj: list, cand: int) -> int:
    """Maximum independent set size inside the vertex bitmask ``cand``."""
    best = 0

    def cover_bound(p: int) -> int:
        # greedy clique cover: each clique holds at most one MIS vertex
        k = 0
        while p:
            low = p & -p
            v = low.bit_length() - 1
            clique = low
            rest = p & adj[v]
            while rest:
                lb = rest & -rest
                w = lb.bit_length() - 1
                clique |= lb
                rest &= adj[w]
            p &= ~clique
            k += 1
        return k

    def search(p: int, size: int) -> None:
        nonlocal best
        # strip isolated vertices first: they always belong to some optimum
        while p:
            free = 0
            q = p
            while q:
                lb = q & -q
                v = lb.bit_length() - 1
                if adj[v] & p == 0:
                    free |= lb
                q ^= lb
            if not free:
                break
            size += bin(free).count("1")
            p &= ~free
        if not p:
            if size > best:
                best = size
            return
        if size + cover_bound(p) <= best:
            return
        # branch on a max-degree vertex: take it, or drop it
        q = p
        pick = -1
        pick_deg = -1
        while q:
            lb = q & -q
            v = lb.bit_length() - 1
            d = bin(adj[v] & p).count("1")
            if d > pick_deg:
                pick, pick_deg = v, d
            q ^= lb
        bit = 1 << pick
        search(p & ~bit & ~adj[pick], size + 1)
        search(p & ~bit, size)

    search(cand, 0)
    return best


def brute_alpha(g: Graph) -> int:
    """Independence number by branch and bound (n <= 40)."""
    if g.n > ALPHA_MAX_N:
        raise SizeLimitError(f"brute_alpha limited to n <= {ALPHA_MAX_N}, got {g.n}")
    if g.n == 0:
        return 0
    return _alpha_masks(_adj_masks(g), (1 << g.n) - 1)


def alpha_of_subset(g: Graph, vertices) -> int:
    vs = np.asarray(vertices, dtype=np.int64)
    return brute_alpha(g.induced(vs)) if vs.size else 0


def brute_beta(g: Graph) -> int:
    """Neighbourhood independence: max over v of alpha(G[N(v)]); 0 if edgeless."""
    if g.m == 0:
        return 0
    if g.max_degree > BETA_MAX_DEGREE:
        raise SizeLimitError(f"brute_beta limited to max degree <= {BETA_MAX_DEGREE}")
    best = 0
    for v in range(g.n):
        nb = g.neighbors(v)
        if nb.shape[0] <= best:
            continue
        best = max(best, brute_alpha(g.induced(nb)))
    return best


def sampled_beta_lower_bound(g: Graph, vertices) -> int:
    """Lower bound on beta from greedy independent sets in chosen neighbourhoods."""
    best = 0
    for v in np.asarray(vertices, dtype=np.int64).tolist():
        h = g.induced(g.neighbors(v))
        in_set, _ = K.greedy_mis(h.indptr, h.indices, np.arange(h.n, dtype=np.int64))
        best = max(best, int(in_set.sum()))
    return best


def lfmis(g: Graph, order: Optional[Sequence[int]] = None) -> VertexSet:
    if order is None:
        order = np.arange(g.n, dtype=np.int64)
    else:
        order = np.asarray(order, dtype=np.int64)
        if order.shape[0] != g.n or not np.array_equal(np.sort(order), np.arange(g.n)):
            raise ValueError("order must be a permutation of the vertices")
    in_set, _ = K.greedy_mis(g.indptr, g.indices, order)
    return VertexSet.from_mask(in_set)


def lfmm(g: Graph, edge_order=None) -> Matching:
    if edge_order is None:
        edges = g.edges()
    else:
        edges = np.asarray(edge_order, dtype=np.int64).reshape(-1, 2)
        if edges.shape[0] != g.m:
            raise ValueError("edge order must list every edge exactly once")
        canon = np.sort(edges, axis=1)
        if not np.array_equal(np.unique(canon, axis=0), g.edges()):
            raise ValueError("edge order must be a permutation of the edges")
    mate = K.greedy_mm_order(g.indptr, g.indices, edges)
    return Matching.from_mate(mate)


def verify_mis(g: Graph, s) -> bool:
    """True iff ``s`` is independent and dominating in ``g``."""
    members = s.members if isinstance(s, VertexSet) else np.asarray(list(s), dtype=np.int64)
    mask = np.zeros(g.n, dtype=np.bool_)
    if members.size:
        if members.min() < 0 or members.max() >= g.n:
            return False
        mask[members] = True
    hits = K.neighbour_hits(g.indptr, g.indices, mask)
    if np.any(hits[mask] > 0):
        return False
    return bool(np.all(mask | (hits > 0)))


def verify_matching(g: Graph, m) -> bool:
    pairs = m.pairs if isinstance(m, Matching) else np.asarray(list(m), dtype=np.int64).reshape(-1, 2)
    if pairs.size == 0:
        return True
    flat = pairs.ravel()
    if flat.min() < 0 or flat.max() >= g.n or np.unique(flat).shape[0] != flat.shape[0]:
        return False
    return all(g.has_edge(int(u), int(v)) for u, v in pairs.tolist())


def verify_maximal_matching(g: Graph, m) -> bool:
    """True iff ``m`` is a matching of ``g`` with no edge between two free vertices."""
    if not verify_matching(g, m):
        return False
    pairs = m.pairs if isinstance(m, Matching) else np.asarray(list(m), dtype=np.int64).reshape(-1, 2)
    matched = np.zeros(g.n, dtype=np.bool_)
    matched[pairs.ravel()] = True
    free = ~matched
    hits = K.neighbour_hits(g.indptr, g.indices, free)
    return not bool(np.any(hits[free] > 0))


def degree_classes(g: Graph) -> DegreeClassPartition:
    deg = np.asarray(g.degrees, dtype=np.int64)
    zero = VertexSet(np.flatnonzero(deg == 0), g.n)
    if g.n == 0 or deg.max() == 0:
        return DegreeClassPartition((), zero, g.n)
    cls = np.full(g.n, -1, dtype=np.int64)
    pos = deg > 0
    cls[pos] = np.floor(np.log2(deg[pos])).astype(np.int64)
    # guard against float rounding at exact powers of two
    lo = np.left_shift(np.int64(1), np.maximum(cls, 0))
    cls[pos & (lo > deg)] -= 1
    cls[pos & ((lo << 1) <= deg)] += 1
    top = int(cls.max())
    classes = tuple(VertexSet(np.flatnonzero(cls == i), g.n) for i in range(top + 1))
    return DegreeClassPartition(classes, zero, g.n)
