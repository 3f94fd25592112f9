"""Layered clique instances that resist sampling-based sparsification.

Vertices are split into levels; level i is cut into cliques ("clusters") whose
size shrinks as k^(1/b^i), and every pair (u in level i, v in a higher level)
becomes an edge with probability q_i = k^(1/b^i - 1) / log2(n)^2.  The level-0
clique alone has ~k^2/2 edges, so cliques are kept implicit: a ClusterGraph
stores the cluster ranges and only the sparse cross-level edges explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .. import _kernels as K
from ..graph import Graph, Matching, VertexSet
from ..rng import TAG_HARD, sub_seed

MAX_MATERIALIZED_EDGES = 50_000_000


@dataclass(frozen=True)
class ClusterGraph:
    """Disjoint cliques given by contiguous id ranges plus explicit extra edges.

    ``cluster_ptr[c]:cluster_ptr[c+1]`` are the members of cluster c; the
    cross edges form a symmetric CSR (``xptr``, ``xidx``) and never join two
    vertices of the same cluster.
    """

    cluster_ptr: np.ndarray
    xptr: np.ndarray
    xidx: np.ndarray

    def __post_init__(self):
        sizes = np.diff(self.cluster_ptr)
        object.__setattr__(self, "cluster_of",
                           np.repeat(np.arange(sizes.shape[0], dtype=np.int64), sizes))

    @property
    def n(self) -> int:
        return int(self.cluster_ptr[-1])

    @property
    def n_clusters(self) -> int:
        return int(self.cluster_ptr.shape[0] - 1)

    @property
    def cluster_sizes(self) -> np.ndarray:
        return np.diff(self.cluster_ptr)

    @property
    def cross_m(self) -> int:
        return int(self.xidx.shape[0] // 2)

    @property
    def clique_m(self) -> int:
        s = self.cluster_sizes.astype(np.int64)
        return int((s * (s - 1) // 2).sum())

    @property
    def m(self) -> int:
        return self.clique_m + self.cross_m

    @property
    def degrees(self) -> np.ndarray:
        return (self.cluster_sizes[self.cluster_of] - 1) + np.diff(self.xptr)

    @property
    def avg_degree(self) -> float:
        return 2.0 * self.m / self.n if self.n else 0.0

    def cross_edges(self) -> np.ndarray:
        return K.edge_list(self.xptr, self.xidx)

    @classmethod
    def from_graph(cls, g: Graph) -> "ClusterGraph":
        """Every vertex its own cluster; all edges are cross edges."""
        return cls(np.arange(g.n + 1, dtype=np.int64), g.indptr.astype(np.int64),
                   g.indices.astype(np.int32))

    def to_graph(self, max_edges: int = MAX_MATERIALIZED_EDGES) -> Graph:
        if self.m > max_edges:
            raise ValueError(f"{self.m} edges exceed the materialization cap {max_edges}")
        parts = [self.cross_edges()]
        for c in range(self.n_clusters):
            a, b = int(self.cluster_ptr[c]), int(self.cluster_ptr[c + 1])
            if b - a < 2:
                continue
            iu, ju = np.triu_indices(b - a, 1)
            parts.append(np.stack([iu + a, ju + a], axis=1))
        edges = np.concatenate(parts).astype(np.int64) if parts else np.zeros((0, 2), np.int64)
        return Graph.from_edges(self.n, edges, check_simple=False)

    def is_independent(self, s: VertexSet) -> bool:
        members = s.members
        if np.unique(self.cluster_of[members]).shape[0] != members.shape[0]:
            return False
        mask = s.mask()
        for v in members.tolist():
            if mask[self.xidx[self.xptr[v]:self.xptr[v + 1]]].any():
                return False
        return True

    def is_maximal_independent(self, s: VertexSet) -> bool:
        if not self.is_independent(s):
            return False
        mask = s.mask()
        hit = np.zeros(self.n_clusters, dtype=np.bool_)
        hit[self.cluster_of[s.members]] = True
        dominated = hit[self.cluster_of] | mask
        if dominated.all():
            return True
        for v in np.flatnonzero(~dominated).tolist():
            if not mask[self.xidx[self.xptr[v]:self.xptr[v + 1]]].any():
                return False
        return True


@dataclass(frozen=True)
class HardGraphSpec:
    k: int
    levels: int
    b: int
    variant: str
    level_of: np.ndarray
    cluster_of: np.ndarray
    q: np.ndarray  # q[i] for edges from level i to higher levels
    level_sizes: tuple
    cluster_size: tuple  # nominal (rounded) cluster size per level

    @property
    def n(self) -> int:
        return int(self.level_of.shape[0])


def _root_floor(k: int, b: int, i: int) -> int:
    """floor(k^(1/b^i)), corrected against float error with integer powers."""
    e = b ** i
    t = int(math.floor(k ** (1.0 / e)))
    while (t + 1) ** e <= k:
        t += 1
    while t > 1 and t ** e > k:
        t -= 1
    return max(t, 1)


def hard_cluster_size(k: int, b: int, i: int, variant: str) -> int:
    t = _root_floor(k, b, i)
    if variant == "MM":
        return max(2 * (t // 2), 2)
    return max(t, 1)


def hard_level_size(k: int, i: int, variant: str) -> int:
    return k * 4 ** i if variant == "MM" else k


def hard_q(k: int, b: int, levels: int, n: int) -> np.ndarray:
    lg = math.log2(n)
    return np.array([k ** (1.0 / b ** i - 1.0) / (lg * lg) for i in range(levels)])


def _check_params(k: int, levels: int, b: int, variant: str):
    if variant not in ("MIS", "MM"):
        raise ValueError(f"variant must be MIS or MM, got {variant!r}")
    if k < 2 or k & (k - 1):
        raise ValueError(f"k must be a power of two >= 2, got {k}")
    if levels < 1:
        raise ValueError(f"levels must be >= 1, got {levels}")
    if b < 2:
        raise ValueError(f"shrink base must be >= 2, got {b}")


def gen_hard(k: int, levels: int, b: int = 4, variant: str = "MIS",
             seed: int = 0) -> tuple[ClusterGraph, HardGraphSpec]:
    """Sample a layered clique instance; ids are level-major, clusters contiguous."""
    _check_params(k, levels, b, variant)
    sizes = [hard_level_size(k, i, variant) for i in range(levels)]
    n = sum(sizes)
    cluster_bounds = [0]
    level_of = np.repeat(np.arange(levels, dtype=np.int32), sizes)
    nominal = []
    start = 0
    for i, size in enumerate(sizes):
        cs = hard_cluster_size(k, b, i, variant)
        nominal.append(cs)
        full, rem = divmod(size, cs)
        cluster_bounds.extend(start + cs * np.arange(1, full + 1))
        if rem:
            cluster_bounds.append(start + size)
        start += size
    cluster_ptr = np.array(cluster_bounds, dtype=np.int64)
    q = hard_q(k, b, levels, n)

    rng = np.random.default_rng(sub_seed(seed, TAG_HARD, levels, k, b))
    chunks = []
    start = 0
    for i, size in enumerate(sizes[:-1]):
        hi_start = start + size
        width = n - hi_start
        cells = size * width
        cnt = int(rng.binomial(cells, min(1.0, q[i])))
        pick = np.sort(rng.choice(cells, size=cnt, replace=False)) if cnt else np.zeros(0, np.int64)
        u = start + pick // width
        v = hi_start + pick % width
        chunks.append(np.stack([u, v], axis=1))
        start = hi_start
    cross = np.concatenate(chunks) if chunks else np.zeros((0, 2), dtype=np.int64)
    cg = Graph.from_edges(n, cross, check_simple=False)
    graph = ClusterGraph(cluster_ptr, cg.indptr.astype(np.int64), cg.indices.astype(np.int32))
    layout = HardGraphSpec(k, levels, b, variant, level_of, graph.cluster_of, q,
                         tuple(sizes), tuple(nominal))
    if variant == "MM":
        cluster_perfect_matching(graph)
    return graph, layout


def cluster_perfect_matching(g: ClusterGraph) -> Matching:
    """Pairs consecutive members inside each cluster; needs every size even."""
    if (g.cluster_sizes % 2).any():
        raise ValueError("a cluster has odd size, no in-cluster perfect matching")
    ids = np.arange(g.n, dtype=np.int64)
    return Matching(np.stack([ids[0::2], ids[1::2]], axis=1), g.n)


def level_counts(level_of: Optional[np.ndarray], mask: np.ndarray, levels: int) -> np.ndarray:
    """Per-level count of vertices set in ``mask`` (level 0 only when unlabelled)."""
    if level_of is None:
        return np.array([int(mask.sum())], dtype=np.int64)
    return np.bincount(level_of[mask], minlength=levels).astype(np.int64)
