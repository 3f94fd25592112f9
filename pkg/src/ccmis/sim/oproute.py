"""Randomised constant-round collection of r-hop neighbourhoods.

Every vertex j samples n incident edges with replacement and sends the i-th
one to vertex i.  Vertices are split into k = Delta^(r+1) contiguous blocks;
inside a block, each x forwards to every y the received edges that lie within
distance r of y in x's received subgraph.  Finally y keeps the edges whose
both endpoints are within distance r in the union of what it received.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .. import _kernels as K
from ..graph import Graph
from ..rng import TAG_ROUTE, stream_key
from .ledger import RoundLedger

MAX_ATTEMPTS = 3


class OpRouteRefused(ValueError):
    """The degree/radius budget does not allow routing in constant rounds."""


class OpRouteFailed(RuntimeError):
    """Every attempt left at least one incomplete view."""


@dataclass(frozen=True)
class NeighborhoodView:
    center: int
    radius: int
    edges: np.ndarray  # (k, 2) local ids, u < v, lexicographic
    degrees: dict = field(default_factory=dict)  # vertex -> degree in the host graph

    def vertices(self) -> np.ndarray:
        vs = np.unique(np.concatenate([self.edges.ravel(), [self.center]]))
        return vs.astype(np.int64)


def _log2_or_one(x: int) -> float:
    return 1.0 if x <= 1 else math.log2(x)


def route_precondition(max_degree: int, n: int, r: int, c: int = 1) -> bool:
    """Delta^(2(r+1)) * ((r+1) log Delta + c log n) <= n, log Delta taken as 1 at Delta=1."""
    if r <= 0 or max_degree == 0:
        return True
    lhs = float(max_degree) ** (2 * (r + 1)) * ((r + 1) * _log2_or_one(max_degree)
                                               + c * math.log2(max(n, 2)))
    return lhs <= n


@dataclass
class OpRouteResult:
    graph: Graph
    radius: int
    view_ptr: np.ndarray
    view_edges: np.ndarray  # edge ids into graph.edges()
    attempts: int
    incomplete_per_attempt: list
    rounds_charged: int

    @property
    def incomplete(self) -> int:
        return self.incomplete_per_attempt[-1] if self.incomplete_per_attempt else 0

    def view_edge_ids(self, v: int) -> np.ndarray:
        return self.view_edges[self.view_ptr[v]:self.view_ptr[v + 1]]

    def view(self, v: int) -> NeighborhoodView:
        e = self.graph.edges()[self.view_edge_ids(v)]
        vs = np.unique(np.concatenate([e.ravel(), [v]])).tolist()
        deg = {int(u): self.graph.degree(u) for u in vs}
        return NeighborhoodView(int(v), self.radius, e, deg)


def _truth(g: Graph, r: int):
    eid = K.edge_ids(g.indptr, g.indices)
    return K.true_views(g.indptr, g.indices, eid, r)


def op_route(g: Graph, r: int, c: int = 1, seed: int = 0,
             ledger: Optional[RoundLedger] = None,
             max_attempts: int = MAX_ATTEMPTS) -> OpRouteResult:
    """Give every vertex its radius-r edge view.

    Radius 0 needs no communication (a vertex knows its incident edges).  For
    r >= 1 each attempt charges two rounds (distribute, return); an attempt
    with an incomplete view is recorded and repeated with a fresh key.
    """
    n = g.n
    if r < 0:
        raise ValueError("radius must be non-negative")
    if r == 0:
        ptr = g.indptr.copy()
        eid = K.edge_ids(g.indptr, g.indices)
        return OpRouteResult(g, 0, ptr, eid, 1, [0], 0)
    delta = g.max_degree
    if not route_precondition(delta, n, r, c):
        raise OpRouteRefused(
            f"Delta={delta}, r={r}, c={c}: Delta^(2(r+1))((r+1)log Delta + c log n) exceeds n={n}")
    truth_ptr, truth = _truth(g, r)
    if delta == 0:
        return OpRouteResult(g, r, truth_ptr, truth, 1, [0], 0)
    k = delta ** (r + 1)
    bounds = np.array([(n * i) // k for i in range(k + 1)], dtype=np.int64)
    block_of = np.repeat(np.arange(k, dtype=np.int64), np.diff(bounds))
    eid = K.edge_ids(g.indptr, g.indices)
    e = g.edges()
    ends_u = np.ascontiguousarray(e[:, 0])
    ends_v = np.ascontiguousarray(e[:, 1])
    incomplete = []
    charged = 0
    for attempt in range(max_attempts):
        key = np.uint64(stream_key(seed, TAG_ROUTE, attempt))
        ys, es, s1, r1, s3, r3 = K.oproute_collect(g.indptr, g.indices, eid, key, r,
                                                   block_of, bounds)
        if ledger is not None:
            ledger.charge_round(_pad(s1, ledger.n, g), _pad(r1, ledger.n, g), "route-distribute")
            ledger.charge_round(_pad(s3, ledger.n, g), _pad(r3, ledger.n, g), "route-return")
        charged += 2
        code = np.unique(ys * max(g.m, 1) + es)
        ys_u = code // max(g.m, 1)
        es_u = code % max(g.m, 1)
        yptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(ys_u, minlength=n), out=yptr[1:])
        ptr, views = K.oproute_views(n, ends_u, ends_v, yptr, es_u, r)
        bad = _count_incomplete(ptr, views, truth_ptr, truth)
        incomplete.append(bad)
        if bad == 0:
            return OpRouteResult(g, r, ptr, views, attempt + 1, incomplete, charged)
    raise OpRouteFailed(f"{incomplete[-1]} incomplete views after {max_attempts} attempts")


def _pad(counts: np.ndarray, ledger_n: int, g: Graph) -> np.ndarray:
    """Per-vertex counts of ``g`` mapped onto the ledger's node ids."""
    if ledger_n == g.n and g.root_n == g.n:
        return counts
    out = np.zeros(ledger_n, dtype=np.int64)
    np.add.at(out, g.labels, counts)
    return out


def _count_incomplete(ptr, views, truth_ptr, truth) -> int:
    n = ptr.shape[0] - 1
    if np.array_equal(ptr, truth_ptr) and np.array_equal(views, truth):
        return 0
    bad = 0
    for v in range(n):
        a = views[ptr[v]:ptr[v + 1]]
        b = truth[truth_ptr[v]:truth_ptr[v + 1]]
        if not np.array_equal(a, b):
            bad += 1
    return bad


def bfs_view_edges(g: Graph, v: int, r: int) -> np.ndarray:
    """Ground-truth E^r(v) as edge ids, for tests and audits."""
    ptr, truth = _truth(g, r)
    return truth[ptr[v]:ptr[v + 1]]
