"""Immutable simple undirected graphs in CSR form plus result containers."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels as K


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


class Graph:
    """Simple undirected graph with sorted adjacency rows.

    ``labels`` maps local ids to the ids of the graph this one was induced
    from (``None`` means identity), so residual graphs can report results in
    terms of the original vertices.
    """

    __slots__ = ("indptr", "indices", "_labels", "root_n", "_deg")

    def __init__(self, indptr, indices, labels=None, root_n=None, *, check=False):
        self.indptr = _frozen(np.ascontiguousarray(indptr, dtype=np.int64))
        self.indices = _frozen(np.ascontiguousarray(indices, dtype=np.int32))
        n = self.indptr.shape[0] - 1
        if labels is not None:
            labels = _frozen(np.ascontiguousarray(labels, dtype=np.int64))
            if labels.shape[0] != n:
                raise ValueError("labels length differs from vertex count")
        self._labels = labels
        self.root_n = int(root_n) if root_n is not None else n
        self._deg = None
        if check:
            self.validate()

    # construction -------------------------------------------------------

    @classmethod
    def empty(cls, n: int) -> "Graph":
        return cls(np.zeros(n + 1, dtype=np.int64), np.zeros(0, dtype=np.int32))

    @classmethod
    def from_edges(cls, n: int, edges, *, check_simple: bool = True) -> "Graph":
        """Build from an (m, 2) array-like of undirected edges.

        With ``check_simple`` duplicates and self-loops raise; otherwise they
        are silently merged/dropped.
        """
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if e.size and (e.min() < 0 or e.max() >= n):
            raise ValueError("edge endpoint out of range")
        if np.any(e[:, 0] == e[:, 1]):
            if check_simple:
                raise ValueError("self-loop in edge list")
            e = e[e[:, 0] != e[:, 1]]
        lo = np.minimum(e[:, 0], e[:, 1])
        hi = np.maximum(e[:, 0], e[:, 1])
        code = np.unique(lo * n + hi)
        if check_simple and code.shape[0] != e.shape[0]:
            raise ValueError("duplicate edge in edge list")
        lo = code // n
        hi = code % n
        counts = np.bincount(lo, minlength=n).astype(np.int64)
        indptr, indices = K.symmetrize(n, counts, hi.astype(np.int32))
        return cls(indptr, indices)

    @classmethod
    def from_upper(cls, n: int, upper_counts, cols) -> "Graph":
        indptr, indices = K.symmetrize(n, np.asarray(upper_counts, dtype=np.int64),
                                       np.asarray(cols, dtype=np.int32))
        return cls(indptr, indices)

    def validate(self) -> None:
        n = self.n
        if self.indptr[0] != 0 or np.any(np.diff(self.indptr) < 0):
            raise ValueError("bad indptr")
        if self.indptr[-1] != self.indices.shape[0]:
            raise ValueError("indptr does not cover indices")
        if self.indices.size and (self.indices.min() < 0 or self.indices.max() >= n):
            raise ValueError("neighbour id out of range")
        rows = np.repeat(np.arange(n), np.diff(self.indptr))
        if np.any(rows == self.indices):
            raise ValueError("self-loop")
        code = rows * n + self.indices
        if np.any(np.diff(code) <= 0):
            raise ValueError("rows not strictly sorted (parallel edge?)")
        rev = np.sort(self.indices.astype(np.int64) * n + rows)
        if not np.array_equal(rev, code):
            raise ValueError("adjacency not symmetric")

    # basic statistics ---------------------------------------------------

    @property
    def n(self) -> int:
        return self.indptr.shape[0] - 1

    @property
    def m(self) -> int:
        return self.indices.shape[0] // 2

    @property
    def labels(self) -> np.ndarray:
        if self._labels is None:
            self._labels = _frozen(np.arange(self.n, dtype=np.int64))
        return self._labels

    @property
    def degrees(self) -> np.ndarray:
        if self._deg is None:
            self._deg = _frozen(np.diff(self.indptr))
        return self._deg

    def degree(self, v: int) -> int:
        return int(self.indptr[v + 1] - self.indptr[v])

    @property
    def avg_degree(self) -> float:
        return 2.0 * self.m / self.n if self.n else 0.0

    @property
    def max_degree(self) -> int:
        return int(self.degrees.max()) if self.n else 0

    @property
    def min_degree(self) -> int:
        return int(self.degrees.min()) if self.n else 0

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        row = self.neighbors(u)
        i = np.searchsorted(row, v)
        return bool(i < row.shape[0] and row[i] == v)

    def edges(self) -> np.ndarray:
        """(m, 2) array of edges with u < v in lexicographic order."""
        return K.edge_list(self.indptr, self.indices)

    # derived graphs -----------------------------------------------------

    def induced(self, keep) -> "Graph":
        """Induced subgraph on a boolean mask or an array of local ids."""
        keep = np.asarray(keep)
        if keep.dtype != np.bool_:
            mask = np.zeros(self.n, dtype=np.bool_)
            mask[keep] = True
            keep = mask
        indptr, indices = K.induced(self.indptr, self.indices, keep)
        return Graph(indptr, indices, self.labels[keep], self.root_n)

    def relabelled(self) -> "Graph":
        """Same structure with identity labels (a fresh root graph)."""
        return Graph(self.indptr, self.indices)

    def to_networkx(self):
        import networkx as nx

        h = nx.Graph()
        h.add_nodes_from(range(self.n))
        h.add_edges_from(map(tuple, self.edges().tolist()))
        return h

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (np.array_equal(self.indptr, other.indptr)
                and np.array_equal(self.indices, other.indices)
                and np.array_equal(self.labels, other.labels))

    __hash__ = None


@dataclass(frozen=True)
class VertexSet:
    """Sorted set of vertex ids of a host graph with ``host_n`` vertices."""

    members: np.ndarray
    host_n: int

    def __post_init__(self):
        a = np.unique(np.asarray(self.members, dtype=np.int64))
        if a.size and (a[0] < 0 or a[-1] >= self.host_n):
            raise ValueError("vertex id outside host graph")
        object.__setattr__(self, "members", _frozen(a))

    @classmethod
    def from_mask(cls, mask) -> "VertexSet":
        mask = np.asarray(mask, dtype=np.bool_)
        return cls(np.flatnonzero(mask), mask.shape[0])

    def mask(self) -> np.ndarray:
        out = np.zeros(self.host_n, dtype=np.bool_)
        out[self.members] = True
        return out

    def __len__(self) -> int:
        return int(self.members.shape[0])

    def __contains__(self, v) -> bool:
        i = np.searchsorted(self.members, v)
        return bool(i < self.members.shape[0] and self.members[i] == v)

    def __iter__(self):
        return iter(self.members.tolist())

    def __eq__(self, other) -> bool:
        if not isinstance(other, VertexSet):
            return NotImplemented
        return self.host_n == other.host_n and np.array_equal(self.members, other.members)

    __hash__ = None


@dataclass(frozen=True)
class Matching:
    """Set of vertex-disjoint pairs, stored as a lexicographically sorted (k, 2) array."""

    pairs: np.ndarray
    host_n: int

    def __post_init__(self):
        p = np.asarray(self.pairs, dtype=np.int64).reshape(-1, 2)
        p = np.sort(p, axis=1)
        if p.shape[0]:
            p = p[np.lexsort((p[:, 1], p[:, 0]))]
            flat = p.ravel()
            if flat.min() < 0 or flat.max() >= self.host_n:
                raise ValueError("vertex id outside host graph")
            if np.unique(flat).shape[0] != flat.shape[0]:
                raise ValueError("vertex appears in two matched pairs")
        object.__setattr__(self, "pairs", _frozen(p))

    @classmethod
    def from_mate(cls, mate) -> "Matching":
        mate = np.asarray(mate, dtype=np.int64)
        u = np.flatnonzero((mate >= 0) & (np.arange(mate.shape[0]) < mate))
        return cls(np.stack([u, mate[u]], axis=1), mate.shape[0])

    def matched_mask(self) -> np.ndarray:
        out = np.zeros(self.host_n, dtype=np.bool_)
        out[self.pairs.ravel()] = True
        return out

    def __len__(self) -> int:
        return int(self.pairs.shape[0])

    def __iter__(self):
        return iter(map(tuple, self.pairs.tolist()))

    def __contains__(self, e) -> bool:
        u, v = sorted(e)
        return any(a == u and b == v for a, b in self)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Matching):
            return NotImplemented
        return self.host_n == other.host_n and np.array_equal(self.pairs, other.pairs)

    __hash__ = None


@dataclass(frozen=True)
class DegreeClassPartition:
    """Vertices grouped by degree class i (2^i <= deg < 2^{i+1}); isolated ones apart."""

    classes: tuple
    zero_class: VertexSet
    host_n: int

    def threshold(self, i: int) -> int:
        return 1 << i

    def class_of(self) -> np.ndarray:
        out = np.full(self.host_n, -1, dtype=np.int64)
        for i, c in enumerate(self.classes):
            out[c.members] = i
        return out


# edge-list files --------------------------------------------------------


def write_edge_list(g: Graph, path) -> None:
    """Write "n m" then one "u v" line per edge (u < v); ``path`` may be a text stream."""
    e = g.edges()
    if hasattr(path, "write"):
        _write_edges(path, g, e)
        return
    with open(path, "w", encoding="ascii") as fh:
        _write_edges(fh, g, e)


def _write_edges(fh, g: Graph, e: np.ndarray) -> None:
    fh.write(f"{g.n} {g.m}\n")
    if e.shape[0]:
        np.savetxt(fh, e, fmt="%d")


def read_edge_list(path) -> Graph:
    text = Path(path).read_text(encoding="ascii")
    lines = text.splitlines()
    if not lines:
        raise ValueError("empty edge-list file")
    head = lines[0].split()
    if len(head) != 2:
        raise ValueError("header must be 'n m'")
    n, m = int(head[0]), int(head[1])
    body = [ln for ln in lines[1:] if ln.strip()]
    if len(body) != m:
        raise ValueError(f"header announces {m} edges, found {len(body)}")
    if m == 0:
        return Graph.empty(n)
    e = np.array([ln.split() for ln in body], dtype=np.int64)
    if e.ndim != 2 or e.shape[1] != 2:
        raise ValueError("each edge line must hold two ids")
    if np.any(e[:, 0] == e[:, 1]):
        raise ValueError("self-loop in edge list")
    if np.any(e[:, 0] > e[:, 1]):
        raise ValueError("edge lines must satisfy u < v")
    return Graph.from_edges(n, e, check_simple=True)

