"""End-to-end MIS and maximal matching pipelines with round accounting."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from . import _kernels as K
from .graph import Graph, Matching, VertexSet
from .oracles import degree_classes, verify_maximal_matching, verify_mis
from .sim.ledger import DEFAULT_CL, RoundLedger
from .sim.local import IN_SET, LubyMIS, RandomEdgeMatching, simulate_local, simulate_rounds
from .sim.oproute import route_precondition
from .sparsify import (_Charger, _merge_matchings, _merge_sets, count_iterations,
                       max_degree_threshold, mis_reduction_step, mm_reduction_step,
                       nonuniform_guard_ok, one_shot_mis, one_shot_mis_nonuniform,
                       reduce_degrees)

MAX_EXTRA_STEPS = 64


@dataclass
class PipelineResult:
    solution: Union[VertexSet, Matching]
    ledger: RoundLedger
    iterations: int
    reports: list = field(default_factory=list)
    endgame: list = field(default_factory=list)
    notes: dict = field(default_factory=dict)
    valid: Optional[bool] = None

    @property
    def rounds(self) -> int:
        return len(self.ledger)

    @property
    def violations(self) -> int:
        return self.ledger.violations

    def residual_stats(self) -> list:
        return [{"kind": r.kind, "n": r.residual_vertex_count, "m": r.residual_edge_count,
                 "max_degree": r.residual_max_degree} for r in self.reports]

    def to_dict(self) -> dict:
        return {
            "solution_size": len(self.solution),
            "iterations": self.iterations,
            "rounds": self.rounds,
            "residual_stats": self.residual_stats(),
            "budget_violations": self.violations,
            "endgame": list(self.endgame),
            "valid": self.valid,
        }


def reduction_rounds_for(n: int, d: float) -> int:
    """r = ceil(log2(max(1, log2 d / sqrt(log2 n)))) + 1 on integer parts of the logs.

    With a = floor(log2 d) and b = floor(log2 n), r - 1 is the least j >= 0 with
    4^j * b >= a^2, so r is exact integer arithmetic and does not flicker when
    d(G) sits right at a power of two.
    """
    if d < 2 or n < 2:
        return 1
    a = int(math.floor(d)).bit_length() - 1
    b = int(n).bit_length() - 1
    j = 0
    while (4 ** j) * b < a * a:
        j += 1
    return j + 1


def independence_rounds_for(mu: float) -> int:
    if mu <= 0:
        raise ValueError("mu must be positive")
    return max(1, int(math.ceil(math.log2(2.0 / mu))))


def _new_ledger(g: Graph, ledger: Optional[RoundLedger], c_l: int) -> RoundLedger:
    return ledger if ledger is not None else RoundLedger(max(g.root_n, 1), c_l)


def _local_ids(g: Graph, root_ids: np.ndarray) -> np.ndarray:
    return np.searchsorted(g.labels, root_ids)


# MIS -----------------------------------------------------------------------


def _isolated_first(g: Graph):
    iso = g.degrees == 0
    s = VertexSet(g.labels[iso], g.root_n)
    return s, (g.induced(~iso) if iso.any() else g)


def _central_mis(h: Graph, ledger: RoundLedger) -> VertexSet:
    """Gather the whole residual at the collector and finish by LFMIS."""
    c = _Charger(h, ledger)
    per = K.upper_hits(h.indptr, h.indices, np.ones(h.n, dtype=np.bool_),
                       np.zeros(0, dtype=np.bool_)) + 1
    c.gather(per, "gather-residual")
    in_set, _ = K.greedy_mis(h.indptr, h.indices, np.arange(h.n, dtype=np.int64))
    c.announce(in_set, "announce-set")
    return VertexSet(h.labels[in_set], h.root_n)


def _mis_endgame(h: Graph, seed: int, ledger: RoundLedger, step_base: int,
                 endgame: list, reports: list, mode: str = "auto"):
    # the schedule always ends with a central finish, even on an empty residual:
    # nodes cannot know the residual is empty without that exchange
    sols = []
    extra = 0
    while True:
        budget = ledger.budget
        if mode != "local" and h.m <= budget:
            sols.append(_central_mis(h, ledger))
            endgame.append({"kind": "central", "n": h.n, "m": h.m})
            return sols
        delta = h.max_degree
        rounds = max(1, int(math.ceil(4 * math.log2(max(delta, 2)))))
        routable = route_precondition(delta, h.root_n, rounds)
        if mode == "local" or routable:
            algo = LubyMIS(seed, rounds)
            outs = (simulate_local(h, algo, rounds, seed=seed, ledger=ledger)[0] if routable
                    else simulate_rounds(h, algo, rounds, ledger))
            in_set = np.array([o == IN_SET for o in outs], dtype=np.bool_)
            covered = in_set | (K.neighbour_hits(h.indptr, h.indices, in_set) > 0)
            c = _Charger(h, ledger)
            c.notify(covered, "status-update")
            sols.append(VertexSet(h.labels[in_set], h.root_n))
            endgame.append({"kind": "local", "n": h.n, "m": h.m, "rounds": rounds,
                            "left": int((~covered).sum())})
            h = h.induced(~covered)
            mode = "auto"
            continue
        if extra >= MAX_EXTRA_STEPS:
            raise RuntimeError("residual did not shrink below the gather budget")
        s, h, rp = mis_reduction_step(h, seed, step_base + extra, ledger)
        sols += s
        reports += rp
        endgame.append({"kind": "extra-step", "n": h.n, "m": h.m})
        extra += 1


def _finish_mis(g: Graph, sols: list, ledger: RoundLedger, reports: list, endgame: list,
                notes: dict, verify: bool) -> PipelineResult:
    s = _merge_sets(sols, g.root_n)
    res = PipelineResult(s, ledger, count_iterations(reports), reports, endgame, notes)
    if verify:
        local = VertexSet(_local_ids(g, s.members), g.n) if g._labels is not None else s
        res.valid = verify_mis(g, local)
    return res


def mis_by_avg_degree(g: Graph, seed: int = 0, *, ledger: Optional[RoundLedger] = None,
                      c_l: int = DEFAULT_CL, step_offset: int = 0, endgame_mode: str = "auto",
                      verify: bool = True) -> PipelineResult:
    """MIS via r = ceil(log2(max(1, log2 d / sqrt(log2 n)))) + 1 reduction steps, then a
    central or LOCAL finish."""
    ledger = _new_ledger(g, ledger, c_l)
    reports, endgame = [], []
    s0, h = _isolated_first(g)
    sols = [s0]
    notes = {"isolated": len(s0)}
    if h.n:
        c = _Charger(g, ledger)
        c.stats("stats-input")
        d = g.avg_degree
        if d < 1:
            sols.append(_central_mis(h, ledger))
            endgame.append({"kind": "central-sparse", "n": h.n, "m": h.m})
            return _finish_mis(g, sols, ledger, reports, endgame, notes, verify)
        r = reduction_rounds_for(g.root_n, d)
        notes["r"] = r
        red = reduce_degrees(h, r, "MIS", seed, ledger=ledger, step_offset=step_offset)
        sols.append(red.solution)
        reports += red.reports
        sols += _mis_endgame(red.residual, seed, ledger, step_offset + r, endgame, reports,
                             endgame_mode)
    return _finish_mis(g, sols, ledger, reports, endgame, notes, verify)


def mis_by_independence(g: Graph, mu: float, seed: int = 0, *,
                        ledger: Optional[RoundLedger] = None, c_l: int = DEFAULT_CL,
                        verify: bool = True) -> PipelineResult:
    """MIS for graphs asserted to satisfy alpha(G) <= n / d(G)^mu."""
    ledger = _new_ledger(g, ledger, c_l)
    reports, endgame = [], []
    s0, h = _isolated_first(g)
    sols = [s0]
    r = independence_rounds_for(mu)
    notes = {"isolated": len(s0), "r_independence": r}
    if h.n:
        c = _Charger(g, ledger)
        c.stats("stats-input")
        if g.avg_degree < 1:
            sols.append(_central_mis(h, ledger))
            endgame.append({"kind": "central-sparse", "n": h.n, "m": h.m})
            return _finish_mis(g, sols, ledger, reports, endgame, notes, verify)
        red = reduce_degrees(h, r, "MIS", seed, ledger=ledger, step_offset=0)
        sols.append(red.solution)
        reports += red.reports
        notes["after_reduction"] = {"n": red.residual.n, "m": red.residual.m,
                                    "max_degree": red.residual.max_degree}
        if red.residual.n:
            sub = mis_by_avg_degree(red.residual, seed, ledger=ledger, step_offset=r,
                                    verify=False)
            sols.append(sub.solution)
            reports += sub.reports
            endgame += sub.endgame
            notes["tail"] = sub.notes
    return _finish_mis(g, sols, ledger, reports, endgame, notes, verify)


def mis_by_neighborhood_independence(g: Graph, seed: int = 0, *,
                                     ledger: Optional[RoundLedger] = None,
                                     c_l: int = DEFAULT_CL, verify: bool = True) -> PipelineResult:
    """Max-degree pre-reduction, one non-uniform 1/sqrt(deg) sampling step, then the
    average-degree pipeline on what is left."""
    ledger = _new_ledger(g, ledger, c_l)
    reports, endgame = [], []
    s0, h = _isolated_first(g)
    sols = [s0]
    notes = {"isolated": len(s0)}
    step = 0
    if h.n:
        pre = 2 if h.max_degree ** 4 > h.root_n else 0
        while h.n and (pre > 0 or not nonuniform_guard_ok(h)):
            if step >= MAX_EXTRA_STEPS:
                raise RuntimeError("max-degree reduction did not reach the cube-root guard")
            c = _Charger(h, ledger)
            c.stats("stats-max-degree")
            # separate step namespace from the reduction steps that follow
            s, h, rep = one_shot_mis(h, seed=seed, threshold=max_degree_threshold(h),
                                     step=10_000 + step, ledger=ledger)
            rep.kind = "mis-max-degree"
            rep.rounds_charged += c.count
            rep.extra["iteration"] = f"pre{step}"
            sols.append(s)
            reports.append(rep)
            step += 1
            pre -= 1
        notes["max_degree_steps"] = step
        if h.n:
            s, h, rep = one_shot_mis_nonuniform(h, seed, step=0, ledger=ledger)
            rep.extra["iteration"] = "nonuniform"
            sols.append(s)
            reports.append(rep)
            notes["after_nonuniform"] = {"n": h.n, "m": h.m, "max_degree": h.max_degree}
        if h.n:
            sub = mis_by_avg_degree(h, seed, ledger=ledger, step_offset=0, verify=False)
            sols.append(sub.solution)
            reports += sub.reports
            endgame += sub.endgame
            notes["tail"] = sub.notes
    return _finish_mis(g, sols, ledger, reports, endgame, notes, verify)


# MM ------------------------------------------------------------------------------


def _central_mm(h: Graph, ledger: RoundLedger) -> Matching:
    c = _Charger(h, ledger)
    per = K.upper_hits(h.indptr, h.indices, np.ones(h.n, dtype=np.bool_),
                       np.zeros(0, dtype=np.bool_))
    c.gather(per, "gather-residual")
    mate = K.greedy_mm_filtered(h.indptr, h.indices, np.ones(h.indices.shape[0], dtype=np.bool_))
    c.announce(mate >= 0, "announce-matching")
    local = Matching.from_mate(mate)
    return Matching(h.labels[local.pairs] if len(local) else np.zeros((0, 2), dtype=np.int64),
                    h.root_n)


def _mm_endgame(h: Graph, seed: int, ledger: RoundLedger, step_base: int, endgame: list,
                reports: list, mode: str = "auto"):
    sols = []
    extra = 0
    while True:
        if mode != "local" and h.m <= ledger.budget:
            sols.append(_central_mm(h, ledger))
            endgame.append({"kind": "central", "n": h.n, "m": h.m})
            return sols
        delta = h.max_degree
        rounds = 2 * max(1, int(math.ceil(4 * math.log2(max(delta, 2)))))
        routable = route_precondition(delta, h.root_n, rounds)
        if mode == "local" or routable:
            algo = RandomEdgeMatching(seed, rounds)
            outs = (simulate_local(h, algo, rounds, seed=seed, ledger=ledger)[0] if routable
                    else simulate_rounds(h, algo, rounds, ledger))
            mate = np.array(outs, dtype=np.int64)
            matched = mate >= 0
            _Charger(h, ledger).notify(matched, "status-update")
            local = Matching.from_mate(mate)
            if len(local):
                sols.append(Matching(h.labels[local.pairs], h.root_n))
            endgame.append({"kind": "local", "n": h.n, "m": h.m, "rounds": rounds})
            h = h.induced(~matched)
            mode = "auto"
            continue
        if extra >= MAX_EXTRA_STEPS:
            raise RuntimeError("residual did not shrink below the gather budget")
        s, h, rp = mm_reduction_step(h, seed, step_base + extra, ledger)
        sols += s
        reports += rp
        endgame.append({"kind": "extra-step", "n": h.n, "m": h.m})
        extra += 1


def _finish_mm(g: Graph, sols: list, ledger: RoundLedger, reports: list, endgame: list,
               notes: dict, verify: bool) -> PipelineResult:
    m = _merge_matchings(sols, g.root_n)
    res = PipelineResult(m, ledger, count_iterations(reports), reports,
                         endgame, notes)
    if verify:
        if g._labels is not None:
            pairs = _local_ids(g, m.pairs.ravel()).reshape(-1, 2) if len(m) else m.pairs
            local = Matching(pairs, g.n)
        else:
            local = m
        res.valid = verify_maximal_matching(g, local)
    return res


def _mm_avg(g: Graph, seed: int, ledger: RoundLedger, step_offset: int, endgame_mode: str):
    reports, endgame, sols = [], [], []
    notes = {}
    if g.m:
        _Charger(g, ledger).stats("stats-input")
        d = g.avg_degree
        if d < 1:
            sols.append(_central_mm(g, ledger))
            endgame.append({"kind": "central-sparse", "n": g.n, "m": g.m})
            return sols, reports, endgame, notes
        r = reduction_rounds_for(g.root_n, d)
        notes["r"] = r
        red = reduce_degrees(g, r, "MM", seed, ledger=ledger, step_offset=step_offset)
        sols.append(red.solution)
        reports += red.reports
        sols += _mm_endgame(red.residual, seed, ledger, step_offset + r, endgame, reports,
                            endgame_mode)
    return sols, reports, endgame, notes


def _union_graph(graphs, root_n: int) -> Graph:
    """Graph on the union of vertex labels with the union of edge sets (root ids)."""
    labs = [h.labels for h in graphs if h.n]
    if not labs:
        return Graph(np.zeros(1, dtype=np.int64), np.zeros(0, dtype=np.int32),
                     np.zeros(0, dtype=np.int64), root_n)
    labels = np.unique(np.concatenate(labs))
    edges = [h.labels[h.edges()] for h in graphs if h.m]
    e = np.concatenate(edges) if edges else np.zeros((0, 2), dtype=np.int64)
    local = np.searchsorted(labels, e)
    base = Graph.from_edges(labels.shape[0], local)
    return Graph(base.indptr, base.indices, labels, root_n)


def mm_pipeline(g: Graph, mode: str = "avg-degree", seed: int = 0, *, mu: Optional[float] = None,
                ledger: Optional[RoundLedger] = None, c_l: int = DEFAULT_CL,
                endgame_mode: str = "auto", verify: bool = True) -> PipelineResult:
    """Maximal matching; ``mode`` is avg-degree, independence (needs ``mu``) or
    neighborhood-independence."""
    ledger = _new_ledger(g, ledger, c_l)
    notes: dict = {}
    if mode == "avg-degree":
        sols, reports, endgame, notes = _mm_avg(g, seed, ledger, 0, endgame_mode)
        return _finish_mm(g, sols, ledger, reports, endgame, notes, verify)
    if mode == "independence":
        if mu is None:
            raise ValueError("independence mode needs mu")
        r = independence_rounds_for(mu)
        notes["r_independence"] = r
        sols, reports, endgame = [], [], []
        if g.m:
            _Charger(g, ledger).stats("stats-input")
            red = reduce_degrees(g, r, "MM", seed, ledger=ledger, step_offset=0)
            sols.append(red.solution)
            reports += red.reports
            s2, rp2, eg2, n2 = _mm_avg(red.residual, seed, ledger, r, endgame_mode)
            sols += s2
            reports += rp2
            endgame += eg2
            notes["tail"] = n2
        return _finish_mm(g, sols, ledger, reports, endgame, notes, verify)
    if mode == "neighborhood-independence":
        return _mm_by_classes(g, seed, ledger, endgame_mode, verify)
    raise ValueError(f"unknown matching mode {mode!r}")


def _mm_by_classes(g: Graph, seed: int, ledger: RoundLedger, endgame_mode: str,
                   verify: bool) -> PipelineResult:
    """Reduce inside every degree class in parallel, finish the pooled in-class
    residual, then finish the cross-class residual."""
    part = degree_classes(g)
    sols, reports, endgame = [], [], []
    notes: dict = {"classes": len(part.classes)}
    subs, residuals = [], []
    for i, cls in enumerate(part.classes):
        if len(cls) == 0:
            continue
        mask = np.zeros(g.n, dtype=np.bool_)
        mask[cls.members] = True
        gi = g.induced(mask)
        sub = ledger.fork()
        red = reduce_degrees(gi, 2, "MM", seed, ledger=sub, step_offset=1000 + 8 * i) \
            if gi.m else None
        if red is not None:
            # classes run side by side: their j-th steps form one iteration
            for rep in red.reports:
                j = int(rep.extra["iteration"][1:]) - (1000 + 8 * i)
                rep.extra["iteration"] = f"class-step{j}"
            sols.append(red.solution)
            reports += red.reports
            residuals.append(red.residual)
        subs.append(sub)
    ledger.merge_parallel(subs, "class-parallel")
    pooled = _union_graph(residuals, g.root_n)
    notes["pooled_in_class_edges"] = pooled.m
    s2, rp2, eg2, n2 = _mm_avg(pooled, seed, ledger, 2000, endgame_mode)
    notes["pooled"] = n2
    sols += s2
    reports += rp2
    endgame += eg2
    in_class = _merge_matchings(sols, g.root_n)
    matched = np.zeros(g.root_n, dtype=np.bool_)
    matched[in_class.pairs.ravel()] = True
    free_local = ~matched[g.labels]
    # unmatched vertices of one class must be independent inside that class
    cls_of = part.class_of()
    bad = 0
    for i in range(len(part.classes)):
        fm = free_local & (cls_of == i)
        if fm.any():
            hits = K.neighbour_hits(g.indptr, g.indices, fm)
            bad += int(np.sum(hits[fm] > 0))
    notes["free_not_independent_in_class"] = bad
    cross = g.induced(free_local)
    notes["cross_residual_edges"] = cross.m
    s3, rp3, eg3, n3 = _mm_avg(cross, seed, ledger, 3000, endgame_mode)
    notes["cross"] = n3
    sols += s3
    reports += rp3
    endgame += eg3
    return _finish_mm(g, sols, ledger, reports, endgame, notes, verify)
