"""Reference sample-solve-remove frameworks with per-level survival counts.

``reduce_mis_reference`` repeats: admit isolated vertices, sample F with a
probability rule, take the greedy MIS of G[F] in id order, remove everything
it covers.  ``reduce_mm_reference`` repeats: split the unmatched vertices into
ceil(sqrt(d)) random parts, greedy-match inside parts, clean up high-degree
vertices, remove matched vertices.  Both record how many vertices of each
level are still active after every iteration.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .. import _kernels as K
from ..graph import Graph, Matching, VertexSet
from ..rng import (TAG_HARD, as_tm1, stream_key, threshold_inv_sqrt, threshold_prob)
from ..sparsify import ceil_sqrt_ratio, partition_mm_step
from .instances import ClusterGraph, level_counts

PROB_RULES = ("uniform-avg", "uniform-min", "per-vertex-degree")
TRACE_COLUMNS = ("seed", "iteration", "level", "active_count", "p_r")
MAX_ITERATIONS = 10_000


@dataclass
class SurvivalTrace:
    """Active-vertex counts per (iteration, level); iteration 0 is the input."""

    seed: int = 0
    rows: list = field(default_factory=list)

    def record(self, iteration: int, counts, p_r: float = float("nan")):
        for level, c in enumerate(np.asarray(counts).tolist()):
            self.rows.append((self.seed, iteration, level, int(c), float(p_r)))

    def active(self, iteration: int, level: int) -> Optional[int]:
        for _, it, lv, c, _ in self.rows:
            if it == iteration and lv == level:
                return c
        return None

    def levels(self) -> list:
        return sorted({r[2] for r in self.rows})

    def is_monotone(self) -> bool:
        for lv in self.levels():
            counts = [r[3] for r in sorted(self.rows, key=lambda r: r[1]) if r[2] == lv]
            if any(b > a for a, b in zip(counts, counts[1:])):
                return False
        return True

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(TRACE_COLUMNS)
            w.writerows(self.rows)

    @classmethod
    def from_csv(cls, path) -> list:
        """All traces in a CSV, one per seed in order of appearance."""
        out: dict = {}
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                s = int(row["seed"])
                out.setdefault(s, cls(s)).rows.append(
                    (s, int(row["iteration"]), int(row["level"]), int(row["active_count"]),
                     float(row["p_r"])))
        return list(out.values())


@dataclass
class MISReferenceResult:
    solution: VertexSet
    iterations: int
    trace: SurvivalTrace
    coverage_misses: list  # per iteration: clusters hit by F that kept a survivor


def _as_clusters(g: Union[Graph, ClusterGraph]) -> ClusterGraph:
    return g if isinstance(g, ClusterGraph) else ClusterGraph.from_graph(g)


def _sample(rule: str, deg: np.ndarray, live: np.ndarray, key: int) -> tuple[np.ndarray, float]:
    """Sampled mask over all vertices and the probability reported for the step."""
    ids = np.flatnonzero(live).astype(np.int64)
    dl = deg[ids]
    t_min = threshold_inv_sqrt(int(dl.min()))
    if rule == "uniform-avg":
        t = min(threshold_inv_sqrt(int(dl.sum()), ids.shape[0]), t_min)
        tm1 = np.full(ids.shape[0], as_tm1(t), dtype=np.uint64)
        p = threshold_prob(t)
    elif rule == "uniform-min":
        tm1 = np.full(ids.shape[0], as_tm1(t_min), dtype=np.uint64)
        p = threshold_prob(t_min)
    elif rule == "per-vertex-degree":
        ts = [threshold_inv_sqrt(int(x)) for x in dl.tolist()]
        tm1 = np.array([as_tm1(t) for t in ts], dtype=np.uint64)
        p = float(np.mean([threshold_prob(t) for t in ts]))
    else:
        raise ValueError(f"unknown probability rule {rule!r}; expected one of {PROB_RULES}")
    hit = K.sample_per_vertex(np.uint64(key), ids, tm1)
    mask = np.zeros(deg.shape[0], dtype=np.bool_)
    mask[ids[hit]] = True
    return mask, p


def reduce_mis_reference(g: Union[Graph, ClusterGraph], prob_rule: str = "uniform-avg",
                         seed: int = 0, trace: Optional[SurvivalTrace] = None,
                         level_of: Optional[np.ndarray] = None,
                         max_iterations: int = MAX_ITERATIONS) -> MISReferenceResult:
    """Sample, solve greedily on the sample, remove the covered vertices; repeat.

    Vertex probabilities never exceed 1/sqrt(min degree) of the current graph.
    Asserts that a cluster containing an MIS vertex is fully covered.
    """
    if prob_rule not in PROB_RULES:
        raise ValueError(f"unknown probability rule {prob_rule!r}; expected one of {PROB_RULES}")
    cg = _as_clusters(g)
    n = cg.n
    levels = int(level_of.max()) + 1 if level_of is not None and n else 1
    trace = SurvivalTrace(seed) if trace is None else trace
    active = np.ones(n, dtype=np.bool_)
    in_set = np.zeros(n, dtype=np.bool_)
    trace.record(0, level_counts(level_of, active, levels))
    misses = []
    it = 0
    while active.any():
        if it >= max_iterations:
            raise RuntimeError(f"no progress after {max_iterations} iterations")
        it += 1
        c_active = np.bincount(cg.cluster_of[active], minlength=cg.n_clusters).astype(np.int64)
        deg = K.cluster_degrees(cg.cluster_of, c_active, cg.xptr, cg.xidx, active)
        isolated = active & (deg == 0)
        in_set |= isolated
        active &= ~isolated
        p_r = 1.0
        if active.any():
            sampled, p_r = _sample(prob_rule, deg, active, stream_key(seed, TAG_HARD, it))
            order = np.flatnonzero(sampled).astype(np.int64)
            s_new, covered = K.cluster_greedy_mis(cg.cluster_of, cg.n_clusters, cg.xptr,
                                                  cg.xidx, order, active)
            in_set |= s_new
            survivors = active & ~covered
            joined = np.zeros(cg.n_clusters, dtype=np.bool_)
            joined[cg.cluster_of[s_new]] = True
            if (joined[cg.cluster_of] & survivors).any():
                raise AssertionError("a cluster with an MIS vertex kept an active vertex")
            touched = np.zeros(cg.n_clusters, dtype=np.bool_)
            touched[cg.cluster_of[sampled]] = True
            misses.append(int(np.unique(cg.cluster_of[survivors & touched[cg.cluster_of]]).size))
            active = survivors
        else:
            misses.append(0)
        trace.record(it, level_counts(level_of, active, levels), p_r)
    return MISReferenceResult(VertexSet.from_mask(in_set), it, trace, misses)


@dataclass
class MMReferenceResult:
    solution: Matching
    iterations: int
    trace: SurvivalTrace
    unmatched_after: list  # unmatched vertex count after each iteration


def reduce_mm_reference(g: Union[Graph, ClusterGraph], seed: int = 0,
                        trace: Optional[SurvivalTrace] = None,
                        level_of: Optional[np.ndarray] = None,
                        max_iterations: int = MAX_ITERATIONS) -> MMReferenceResult:
    """Random partition into ceil(sqrt(d)) parts, greedy matching per part, clean-up.

    The residual graph is induced on all unmatched vertices (isolated ones
    included), so d counts them; iterations stop once it has no edges.
    """
    host = g.to_graph() if isinstance(g, ClusterGraph) else g
    n = host.n
    levels = int(level_of.max()) + 1 if level_of is not None and n else 1
    trace = SurvivalTrace(seed) if trace is None else trace
    matched = np.zeros(n, dtype=np.bool_)
    trace.record(0, level_counts(level_of, ~matched, levels))
    h = host
    pairs = []
    unmatched = []
    it = 0
    while h.m:
        if it >= max_iterations:
            raise RuntimeError(f"no progress after {max_iterations} iterations")
        it += 1
        parts = ceil_sqrt_ratio(2 * h.m, h.n)
        m, h, _ = partition_mm_step(h, seed, parts=parts, step=it)
        if len(m):
            pairs.append(m.pairs)
            matched[m.pairs.ravel()] = True
        unmatched.append(int(n - matched.sum()))
        trace.record(it, level_counts(level_of, ~matched, levels), 1.0 / parts)
    allp = np.concatenate(pairs) if pairs else np.zeros((0, 2), dtype=np.int64)
    return MMReferenceResult(Matching(allp, n), it, trace, unmatched)


def unmatched_fraction_after(res: MMReferenceResult, iterations: int, n: int) -> float:
    """Fraction of unmatched vertices once ``iterations`` iterations have run."""
    if n == 0:
        return 0.0
    if iterations <= 0 or not res.unmatched_after:
        return 1.0
    idx = min(iterations, len(res.unmatched_after)) - 1
    return res.unmatched_after[idx] / n


def half_levels(levels: int) -> int:
    return math.ceil(levels / 2)
