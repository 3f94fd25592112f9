"""One-shot sampling sparsifiers and iterated degree reduction.

Every sparsifier takes a (possibly induced) graph whose ``labels`` are ids of
the original input, returns its partial solution in those original ids, and the
residual as another induced graph.  Sampling decisions are hashes of
(seed, stream, step, original id) compared against integer thresholds, so a
vertex makes the same decision whatever order the graph is traversed in.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from fractions import Fraction
from math import isqrt
from typing import Optional, Union

import numpy as np

from . import _kernels as K
from .graph import Graph, Matching, VertexSet
from .rng import (TAG_EDGE, TAG_NONUNIFORM, TAG_PART, TAG_VERTEX, as_tm1, stream_key,
                  threshold_inv_sqrt, threshold_prob, threshold_ratio)
from .sim.ledger import RoundLedger

COLLECTOR = 0

Prob = Union[float, Fraction, int]


class DegreeGuardError(ValueError):
    """Maximum degree too large for the non-uniform sampler."""


@dataclass
class SparsifyReport:
    kind: str
    p: float
    input_vertex_count: int
    input_edge_count: int
    input_max_degree: int
    sampled_vertex_count: int = 0
    sampled_edge_count: int = 0
    sampled_edges_in_F: int = 0
    solution_size: int = 0
    residual_vertex_count: int = 0
    residual_edge_count: int = 0
    residual_max_degree: int = 0
    rounds_charged: int = 0
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


# accounting helpers ---------------------------------------------------------


def _to_root(g: Graph, counts: np.ndarray, root_n: int) -> np.ndarray:
    if g.n == root_n and g._labels is None:
        return np.asarray(counts, dtype=np.int64)
    out = np.zeros(root_n, dtype=np.int64)
    out[g.labels] = counts
    return out


class _Charger:
    """Charges rounds for one sparsifier call and counts them."""

    def __init__(self, g: Graph, ledger: Optional[RoundLedger]):
        self.g = g
        self.ledger = ledger
        self.count = 0

    def _root(self, counts):
        return _to_root(self.g, counts, self.ledger.n)

    def stats(self, label="stats"):
        """Degrees to the collector, aggregate back: two rounds."""
        self.count += 2
        if self.ledger is None:
            return
        ones = np.ones(self.g.n, dtype=np.int64)
        sent = self._root(ones)
        sent[COLLECTOR] = 0
        recv = np.zeros(self.ledger.n, dtype=np.int64)
        recv[COLLECTOR] = int(sent.sum())
        self.ledger.charge_round(sent, recv, label + "-up")
        self.ledger.charge_round(recv, sent, label + "-down")

    def notify(self, mask, label):
        """Every flagged vertex sends one message to each neighbour."""
        self.count += 1
        if self.ledger is None:
            return
        g = self.g
        sent = np.where(mask, g.degrees, 0).astype(np.int64)
        recv = K.neighbour_hits(g.indptr, g.indices, np.asarray(mask, dtype=np.bool_))
        self.ledger.charge_round(self._root(sent), self._root(recv), label)

    def gather(self, per_vertex, label="gather"):
        if self.ledger is None:
            self.count += max(1, -(-int(np.sum(per_vertex)) // (64 * max(1, self.g.root_n))))
            return
        before = len(self.ledger)
        self.ledger.gather_to_node(self._root(per_vertex), COLLECTOR, label)
        self.count += len(self.ledger) - before

    def gather_parts(self, per_vertex, part, label="gather-parts"):
        """Vertex v sends ``per_vertex[v]`` messages to the collector of its part."""
        if self.ledger is None:
            self.count += 1
            return
        root_n = self.ledger.n
        targets = np.asarray(part, dtype=np.int64) % root_n
        counts = np.asarray(per_vertex, dtype=np.int64)
        cap = self.ledger.budget
        load = np.bincount(targets, weights=counts, minlength=root_n).astype(np.int64)
        k = max(1, int(-(-load.max() // cap)) if load.size else 1)
        order = np.lexsort((np.arange(counts.shape[0]), targets))
        t_sorted = targets[order]
        c_sorted = counts[order]
        hi = np.cumsum(c_sorted)
        group_start = np.searchsorted(t_sorted, t_sorted, side="left")
        base = np.where(group_start > 0, hi[group_start - 1], 0)
        hi = hi - base
        lo = hi - c_sorted
        for j in range(k):
            a, b = j * cap, (j + 1) * cap
            sent_sorted = np.clip(np.minimum(hi, b) - np.maximum(lo, a), 0, None)
            sent_local = np.zeros(counts.shape[0], dtype=np.int64)
            sent_local[order] = sent_sorted
            # traffic a part collector holds itself is free
            self_mask = self.g.labels == targets
            sent_local[self_mask] = 0
            recv = np.zeros(root_n, dtype=np.int64)
            np.add.at(recv, targets, sent_local)
            self.ledger.charge_round(self._root(sent_local), recv, label)
        self.count += k

    def announce(self, targets_mask, label="announce"):
        """Collector tells each flagged vertex one word."""
        self.count += 1
        if self.ledger is None:
            return
        recv = self._root(np.asarray(targets_mask, dtype=np.int64))
        recv[COLLECTOR] = 0
        sent = np.zeros(self.ledger.n, dtype=np.int64)
        sent[COLLECTOR] = int(recv.sum())
        self.ledger.charge_round(sent, recv, label)


def _threshold(p: Optional[Prob], threshold: Optional[int]) -> int:
    if threshold is not None:
        return int(threshold)
    if p is None:
        raise ValueError("either p or threshold is required")
    fr = Fraction(p)
    if fr <= 0 or fr > 1:
        raise ValueError("p must lie in (0, 1]")
    return threshold_ratio(fr.numerator, fr.denominator)


def avg_degree_threshold(g: Graph) -> int:
    """p = 1/sqrt(d(G)) = sqrt(n / 2m), clamped to 1."""
    if g.m == 0:
        return 1 << 64
    return threshold_inv_sqrt(2 * g.m, g.n)


def max_degree_threshold(g: Graph) -> int:
    """p = 1/sqrt(Delta(G)), clamped to 1."""
    return threshold_inv_sqrt(max(g.max_degree, 1), 1)


def ceil_pow_092(delta: int) -> int:
    """Smallest integer t with t >= delta^0.92, i.e. t^25 >= delta^23."""
    if delta <= 1:
        return delta
    target = delta ** 23
    t = max(1, int(round(delta ** 0.92)))
    while t ** 25 < target:
        t += 1
    while t > 1 and (t - 1) ** 25 >= target:
        t -= 1
    return t


def ceil_sqrt_ratio(num: int, den: int) -> int:
    """ceil(sqrt(num/den)) for positive integers."""
    if num <= 0:
        return 0
    t = isqrt(num // den) if den else 0
    while t * t * den < num:
        t += 1
    while t > 0 and (t - 1) * (t - 1) * den >= num:
        t -= 1
    return t


def _finish_report(rep: SparsifyReport, h: Graph, charger: _Charger) -> SparsifyReport:
    rep.residual_vertex_count = h.n
    rep.residual_edge_count = h.m
    rep.residual_max_degree = h.max_degree
    rep.rounds_charged = charger.count
    return rep


# vertex sampling --------------------------------------------------------------


def _mis_from_sample(g: Graph, sampled: np.ndarray, charger: _Charger, rep: SparsifyReport):
    charger.notify(sampled, "sample-notify")
    per = K.upper_hits(g.indptr, g.indices, sampled, np.zeros(0, dtype=np.bool_))
    rep.sampled_vertex_count = int(sampled.sum())
    rep.sampled_edges_in_F = int(per.sum())
    charger.gather(per, "gather-sample")
    order = np.flatnonzero(sampled).astype(np.int64)
    in_set, covered = K.greedy_mis(g.indptr, g.indices, order)
    charger.announce(in_set, "announce-set")
    charger.notify(in_set, "cover-notify")
    charger.notify(covered, "status-update")
    s = VertexSet(g.labels[in_set], g.root_n)
    h = g.induced(~covered)
    rep.solution_size = len(s)
    return s, h


def one_shot_mis(g: Graph, p: Optional[Prob] = None, seed: int = 0, *,
                 threshold: Optional[int] = None, step: int = 0,
                 ledger: Optional[RoundLedger] = None):
    """Sample vertices w.p. p, solve LFMIS on the sample, drop its closed neighbourhood.

    Returns (S in original ids, residual graph, report).
    """
    t = _threshold(p, threshold)
    charger = _Charger(g, ledger)
    rep = SparsifyReport("mis-uniform", threshold_prob(t), g.n, g.m, g.max_degree)
    key = np.uint64(stream_key(seed, TAG_VERTEX, step))
    sampled = K.sample_uniform(key, g.labels, as_tm1(t))
    s, h = _mis_from_sample(g, sampled, charger, rep)
    return s, h, _finish_report(rep, h, charger)


def nonuniform_thresholds(g: Graph) -> np.ndarray:
    """Per-vertex threshold for p_v = 1/sqrt(deg(v)); degree 0 gives 1."""
    deg = g.degrees.tolist()
    return np.array([as_tm1(threshold_inv_sqrt(d, 1)) for d in deg], dtype=np.uint64)


def nonuniform_guard_ok(g: Graph) -> bool:
    return g.max_degree ** 3 <= g.root_n


def one_shot_mis_nonuniform(g: Graph, seed: int = 0, *, step: int = 0,
                            ledger: Optional[RoundLedger] = None, check_guard: bool = True):
    """Sample v w.p. 1/sqrt(deg(v)); isolated vertices join the set directly."""
    if check_guard and not nonuniform_guard_ok(g):
        raise DegreeGuardError(
            f"max degree {g.max_degree} exceeds the cube-root guard for n={g.root_n}")
    charger = _Charger(g, ledger)
    rep = SparsifyReport("mis-nonuniform", float("nan"), g.n, g.m, g.max_degree)
    key = np.uint64(stream_key(seed, TAG_NONUNIFORM, step))
    sampled = K.sample_per_vertex(key, g.labels, nonuniform_thresholds(g))
    sampled |= g.degrees == 0
    s, h = _mis_from_sample(g, sampled, charger, rep)
    return s, h, _finish_report(rep, h, charger)


# edge sampling / partition matching ------------------------------------------------


def _matching_finish(g: Graph, mate: np.ndarray, charger: _Charger, rep: SparsifyReport):
    matched = mate >= 0
    charger.announce(matched, "announce-matching")
    charger.notify(matched, "status-update")
    local = Matching.from_mate(mate)
    m = Matching(g.labels[local.pairs] if len(local) else np.zeros((0, 2), dtype=np.int64),
                 g.root_n)
    h = g.induced(~matched)
    rep.solution_size = len(m)
    return m, h


def one_shot_mm(g: Graph, p: Optional[Prob] = None, seed: int = 0, *,
                threshold: Optional[int] = None, step: int = 0,
                ledger: Optional[RoundLedger] = None):
    """Sample edges w.p. p, LFMM on them (lexicographic order), drop matched vertices."""
    t = _threshold(p, threshold)
    charger = _Charger(g, ledger)
    rep = SparsifyReport("mm-edge", threshold_prob(t), g.n, g.m, g.max_degree)
    key = np.uint64(stream_key(seed, TAG_EDGE, step))
    flags = K.sample_edges(g.indptr, g.indices, g.labels, key, as_tm1(t))
    per = K.upper_slot_counts(g.indptr, g.indices, flags)
    rep.sampled_edge_count = int(per.sum())
    rep.sampled_edges_in_F = rep.sampled_edge_count
    # the lower endpoint draws the coin and tells the other endpoint
    charger.count += 1
    if ledger is not None:
        recv = np.zeros(g.n, dtype=np.int64)
        e = g.edges()
        if e.shape[0]:
            sel = flags[_upper_slot_positions(g)]
            np.add.at(recv, e[sel, 1], 1)
        ledger.charge_round(_to_root(g, per, ledger.n), _to_root(g, recv, ledger.n),
                            "sample-notify")
    charger.gather(per, "gather-sample")
    mate = K.greedy_mm_filtered(g.indptr, g.indices, flags)
    m, h = _matching_finish(g, mate, charger, rep)
    return m, h, _finish_report(rep, h, charger)


def _upper_slot_positions(g: Graph) -> np.ndarray:
    rows = np.repeat(np.arange(g.n), g.degrees)
    return np.flatnonzero(g.indices > rows)


def partition_mm_step(g: Graph, seed: int = 0, *, parts: Optional[int] = None,
                      cleanup: bool = True, cleanup_delta: Optional[int] = None,
                      step: int = 0, ledger: Optional[RoundLedger] = None):
    """Random vertex partition into ``parts`` groups, LFMM inside each group.

    Default ``parts`` = ceil(sqrt(Delta)).  The clean-up then matches free
    vertices whose residual degree is at least ceil(Delta^0.92) to each other,
    greedily by ascending id.
    """
    charger = _Charger(g, ledger)
    delta = g.max_degree
    if parts is None:
        parts = ceil_sqrt_ratio(delta, 1) if delta > 0 else 1
    parts = max(1, int(parts))
    rep = SparsifyReport("mm-partition", 1.0 / parts, g.n, g.m, delta)
    key = np.uint64(stream_key(seed, TAG_PART, step))
    part = K.assign_parts(key, g.labels, parts)
    charger.notify(np.ones(g.n, dtype=np.bool_), "part-notify")
    flags = K.same_part_slots(g.indptr, g.indices, part)
    per = K.upper_slot_counts(g.indptr, g.indices, flags)
    rep.sampled_edge_count = int(per.sum())
    rep.sampled_edges_in_F = rep.sampled_edge_count
    charger.gather_parts(per, part)
    mate = K.greedy_mm_filtered(g.indptr, g.indices, flags)
    rep.extra["parts"] = parts
    rep.extra["partition_matched"] = int((mate >= 0).sum() // 2)
    if cleanup and g.n:
        base = delta if cleanup_delta is None else cleanup_delta
        thr = ceil_pow_092(base)
        # matched vertices first tell neighbours, so free degrees are known
        charger.notify(mate >= 0, "status-update")
        fdeg = K.free_degrees(g.indptr, g.indices, mate)
        high = (mate < 0) & (fdeg >= max(thr, 1))
        charger.notify(high, "high-notify")
        per_high = K.upper_hits(g.indptr, g.indices, high, np.zeros(0, dtype=np.bool_))
        charger.gather(per_high, "gather-high")
        added = K.cleanup_match(g.indptr, g.indices, mate, high)
        rep.extra["cleanup_threshold"] = thr
        rep.extra["cleanup_high"] = int(high.sum())
        rep.extra["cleanup_matched"] = int(added)
    m, h = _matching_finish(g, mate, charger, rep)
    return m, h, _finish_report(rep, h, charger)


# iterated reduction ---------------------------------------------------------


@dataclass
class ReductionResult:
    solution: Union[VertexSet, Matching]
    residual: Graph
    reports: list
    steps_done: int

    @property
    def iterations(self) -> int:
        return count_iterations(self.reports)


def count_iterations(reports) -> int:
    """Distinct reduction iterations among sampler reports.

    An iteration is one reduction step (which may run several samplers) or one
    stand-alone sampler call; reports of one step share an ``iteration`` tag.
    """
    return len({r.extra.get("iteration", id(r)) for r in reports})


def _merge_sets(parts, root_n: int) -> VertexSet:
    arrs = [s.members for s in parts if len(s)]
    return VertexSet(np.concatenate(arrs) if arrs else np.zeros(0, dtype=np.int64), root_n)


def _merge_matchings(parts, root_n: int) -> Matching:
    arrs = [m.pairs for m in parts if len(m)]
    return Matching(np.concatenate(arrs) if arrs else np.zeros((0, 2), dtype=np.int64), root_n)


def mis_reduction_step(g: Graph, seed: int, step: int, ledger: Optional[RoundLedger]):
    """One average-degree step: optional two max-degree steps, then p = 1/sqrt(d)."""
    sols, reps = [], []
    h = g
    pre = h.max_degree ** 4 > h.root_n
    sub = 0
    if pre:
        for _ in range(2):
            if h.n == 0:
                break
            c = _Charger(h, ledger)
            c.stats("stats-max-degree")
            s, h, rep = one_shot_mis(h, seed=seed, threshold=max_degree_threshold(h),
                                     step=3 * step + sub, ledger=ledger)
            rep.kind = "mis-max-degree"
            rep.rounds_charged += c.count
            sols.append(s)
            reps.append(rep)
            sub += 1
    if h.n:
        c = _Charger(h, ledger)
        c.stats("stats-avg-degree")
        s, h, rep = one_shot_mis(h, seed=seed, threshold=avg_degree_threshold(h),
                                 step=3 * step + 2, ledger=ledger)
        rep.kind = "mis-avg-degree"
        rep.rounds_charged += c.count
        sols.append(s)
        reps.append(rep)
    _tag(reps, step)
    return sols, h, reps


def _tag(reps, step):
    for rep in reps:
        rep.extra["iteration"] = f"s{step}"


def mm_reduction_step(g: Graph, seed: int, step: int, ledger: Optional[RoundLedger]):
    """Edge sampling with p = 1/d, then two partition steps with p = 1/sqrt(Delta)."""
    sols, reps = [], []
    h = g
    if h.m == 0:
        return sols, h, reps
    c = _Charger(h, ledger)
    c.stats("stats-avg-degree")
    thr = threshold_ratio(h.n, 2 * h.m)  # p = 1/d = n / 2m
    m, h, rep = one_shot_mm(h, seed=seed, threshold=thr, step=3 * step, ledger=ledger)
    rep.kind = "mm-avg-degree"
    rep.rounds_charged += c.count
    sols.append(m)
    reps.append(rep)
    for sub in (1, 2):
        if h.m == 0:
            break
        c = _Charger(h, ledger)
        c.stats("stats-max-degree")
        m, h, rep = partition_mm_step(h, seed=seed, step=3 * step + sub, ledger=ledger)
        rep.rounds_charged += c.count
        sols.append(m)
        reps.append(rep)
    _tag(reps, step)
    return sols, h, reps


def reduce_degrees(g: Graph, r: int, mode: str = "MIS", seed: int = 0, *,
                   ledger: Optional[RoundLedger] = None, step_offset: int = 0) -> ReductionResult:
    """Apply the average-degree reduction step ``r`` times (fewer if the graph empties)."""
    if r < 1:
        raise ValueError("r must be at least 1")
    mode = mode.upper()
    if mode not in ("MIS", "MM"):
        raise ValueError("mode must be MIS or MM")
    sols, reps = [], []
    h = g
    done = 0
    for i in range(r):
        if (mode == "MIS" and h.n == 0) or (mode == "MM" and h.m == 0):
            break
        fn = mis_reduction_step if mode == "MIS" else mm_reduction_step
        s, h, rp = fn(h, seed, step_offset + i, ledger)
        sols += s
        reps += rp
        done += 1
    merge = _merge_sets if mode == "MIS" else _merge_matchings
    return ReductionResult(merge(sols, g.root_n), h, reps, done)
