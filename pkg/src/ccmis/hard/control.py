"""Uniform random G(n, m) control for the MIS reference framework, exposed lazily.

A control matched to a hard instance can have billions of edges.  Because the
framework only ever looks at G[F], at the edges between the new MIS vertices
and the unsampled rest, and at the residual, a uniform G(n, m) can be revealed
piece by piece: given what has been revealed, the unrevealed edges are a
uniform subset of the unrevealed pairs, so every count is hypergeometric.
Once the residual is small it is materialized and handed to the explicit
reference implementation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import _kernels as K
from ..generators import gen_gnm
from ..rng import TAG_HARD, stream_key, sub_seed, threshold_inv_sqrt, threshold_prob
from .reference import SurvivalTrace, reduce_mis_reference

MATERIALIZE_PAIRS = 50_000_000
HYPERGEOM_LIMIT = 10 ** 9


def hypergeometric(rng: np.random.Generator, good: int, bad: int, draws: int) -> int:
    """Successes in ``draws`` draws without replacement from good + bad items.

    Exact below numpy's 10^9 population limit, otherwise a rounded normal
    approximation with the exact mean and variance, clipped to the support.
    """
    if draws <= 0 or good <= 0:
        return 0
    if bad <= 0:
        return draws
    total = good + bad
    if good < HYPERGEOM_LIMIT and bad < HYPERGEOM_LIMIT:
        return int(rng.hypergeometric(good, bad, draws))
    f = good / total
    var = draws * f * (1.0 - f) * (total - draws) / max(total - 1, 1)
    x = int(round(draws * f + math.sqrt(max(var, 0.0)) * rng.standard_normal()))
    return min(max(x, max(0, draws - bad)), min(draws, good))


def _pairs(x: int) -> int:
    return x * (x - 1) // 2


@dataclass
class ControlResult:
    iterations: int
    solution_size: int
    lazy_iterations: int
    trace: SurvivalTrace


def reduce_mis_control(n: int, m: int, seed: int = 0,
                       trace: SurvivalTrace | None = None,
                       materialize_pairs: int = MATERIALIZE_PAIRS) -> ControlResult:
    """Uniform-average-rule MIS reference run on a lazily revealed G(n, m).

    Vertices are exchangeable, so the lazy phase tracks counts only; the
    returned solution is therefore a size, not a vertex set.
    """
    trace = SurvivalTrace(seed) if trace is None else trace
    rng = np.random.default_rng(sub_seed(seed, TAG_HARD, 0xC0))
    trace.record(0, [n])
    it = 0
    size = 0
    while n and _pairs(n) > materialize_pairs:
        it += 1
        total = _pairs(n)
        t = threshold_inv_sqrt(2 * m, n) if m else 1 << 64
        p = threshold_prob(t)
        f = int(rng.binomial(n, p))
        e_f = hypergeometric(rng, m, total - m, _pairs(f))
        sub = gen_gnm(f, e_f, int(stream_key(seed, TAG_HARD, it) >> 1))
        in_set, _ = K.greedy_mis(sub.indptr, sub.indices, np.arange(f, dtype=np.int64))
        s = int(in_set.sum())
        size += s
        rest = n - f
        left = m - e_f
        pool = total - _pairs(f)
        e_s = hypergeometric(rng, left, pool - left, s * rest)
        covered = 0
        if e_s:
            cells = rng.choice(s * rest, size=e_s, replace=False)
            covered = int(np.unique(cells % rest).shape[0])
        n_next = rest - covered
        left -= e_s
        pool -= s * rest
        m = hypergeometric(rng, left, pool - left, _pairs(n_next))
        n = n_next
        trace.record(it, [n], p)
    tail = gen_gnm(n, m, int(stream_key(seed, TAG_HARD, 1 << 20) >> 1))
    sub_trace = SurvivalTrace(seed)
    res = reduce_mis_reference(tail, "uniform-avg", seed, sub_trace)
    for _, i, lv, c, p in sub_trace.rows:
        if i > 0:
            trace.rows.append((seed, it + i, lv, c, p))
    return ControlResult(it + res.iterations, size + len(res.solution), it, trace)
