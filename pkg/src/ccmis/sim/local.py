"""Synchronous message-passing algorithms and their simulation from routed views.

A LOCAL algorithm is given as three callbacks: ``init(v, degree)`` builds the
round-0 state, ``step(rnd, v, state, nbr_states)`` maps the previous states of
v and its neighbours to v's next state, and ``output(v, state)`` reads the
result.  ``run_synchronous`` executes it directly on a graph;
``simulate_local`` instead lets every vertex replay it on its routed view, and
``simulate_rounds`` spends one clique round per LOCAL round.
"""

from __future__ import annotations

from typing import Any, Optional

import numpy as np

from ..graph import Graph
from ..rng import TAG_LOCAL, draw1, draw2, stream_key
from .ledger import RoundLedger
from .oproute import OpRouteResult, op_route

UNDECIDED, IN_SET, OUT = 0, 1, 2


class LocalAlgorithm:
    rounds: int = 0

    def init(self, v: int, degree: int) -> Any:
        raise NotImplementedError

    def step(self, rnd: int, v: int, state: Any, nbr_states: list) -> Any:
        return state

    def output(self, v: int, state: Any) -> Any:
        return state


class OwnDegree(LocalAlgorithm):
    rounds = 0

    def init(self, v, degree):
        return degree


class MinNeighborId(LocalAlgorithm):
    """One round: smallest neighbour id (-1 when isolated)."""

    rounds = 1

    def init(self, v, degree):
        return -1

    def step(self, rnd, v, state, nbr_states):
        return min((u for u, _ in nbr_states), default=-1)


class LubyMIS(LocalAlgorithm):
    """Random-priority MIS; phase t uses rounds 2t+1 (join) and 2t+2 (retire).

    A vertex joins when its priority beats every undecided neighbour's; the
    priorities are hashes of (seed, phase, vertex) so any vertex can evaluate
    its neighbours' priorities from their ids.
    """

    def __init__(self, seed: int, rounds: int):
        self.seed = seed
        self.rounds = rounds

    def _prio(self, phase: int, v: int):
        return (draw1(stream_key(self.seed, TAG_LOCAL, phase), v), v)

    def init(self, v, degree):
        return UNDECIDED

    def step(self, rnd, v, state, nbr_states):
        if state != UNDECIDED:
            return state
        phase = (rnd - 1) // 2
        if rnd % 2 == 1:
            mine = self._prio(phase, v)
            for u, s in nbr_states:
                if s == UNDECIDED and self._prio(phase, u) < mine:
                    return UNDECIDED
            return IN_SET
        if any(s == IN_SET for _, s in nbr_states):
            return OUT
        return UNDECIDED


class RandomEdgeMatching(LocalAlgorithm):
    """Greedy matching by random edge priorities in two-round phases.

    Round 2t+1: every free vertex proposes to the free neighbour over the
    lightest incident edge.  Round 2t+2: mutual proposals become matched.
    State is (mate, proposal).
    """

    def __init__(self, seed: int, rounds: int):
        self.seed = seed
        self.rounds = rounds

    def init(self, v, degree):
        return (-1, -1)

    def step(self, rnd, v, state, nbr_states):
        mate, _ = state
        if mate >= 0:
            return state
        phase = (rnd - 1) // 2
        if rnd % 2 == 1:
            key = stream_key(self.seed, TAG_LOCAL, 1_000_000 + phase)
            best = None
            for u, (um, _) in nbr_states:
                if um >= 0:
                    continue
                w = (draw2(key, min(u, v), max(u, v)), min(u, v), max(u, v))
                if best is None or w < best[0]:
                    best = (w, u)
            return (-1, -1 if best is None else best[1])
        _, prop = state
        for u, (um, up) in nbr_states:
            if u == prop and up == v and um < 0:
                return (u, -1)
        return (-1, -1)

    def output(self, v, state):
        return state[0]


def run_synchronous(g: Graph, algo: LocalAlgorithm, rounds: Optional[int] = None,
                    degrees=None) -> list:
    """Direct execution: every round all vertices read all neighbours' states."""
    rounds = algo.rounds if rounds is None else rounds
    deg = g.degrees if degrees is None else degrees
    adj = [g.neighbors(v).tolist() for v in range(g.n)]
    state = [algo.init(v, int(deg[v])) for v in range(g.n)]
    for rnd in range(1, rounds + 1):
        state = [algo.step(rnd, v, state[v], [(u, state[u]) for u in adj[v]])
                 for v in range(g.n)]
    return [algo.output(v, state[v]) for v in range(g.n)]


def _local_output(g: Graph, route: OpRouteResult, edges: np.ndarray, v: int,
                  algo: LocalAlgorithm, rounds: int):
    verts = np.unique(np.concatenate([edges[route.view_edge_ids(v)].ravel(), [v]]))
    vlist = verts.tolist()
    adj = {u: [] for u in vlist}
    for a, b in edges[route.view_edge_ids(v)].tolist():
        adj[a].append(b)
        adj[b].append(a)
    for u in vlist:
        adj[u].sort()
    state = {u: algo.init(u, g.degree(u)) for u in vlist}
    for rnd in range(1, rounds + 1):
        state = {u: algo.step(rnd, u, state[u], [(w, state[w]) for w in adj[u]])
                 for u in vlist}
    return algo.output(v, state[v])


def simulate_local(g: Graph, algo: LocalAlgorithm, r: Optional[int] = None,
                   seed: int = 0, ledger: Optional[RoundLedger] = None, c: int = 1):
    """Outputs of an r-round LOCAL algorithm, each computed from a routed view.

    A vertex's r-round output depends only on edges with both endpoints within
    distance r and on the degrees of those vertices; the degree tags ride along
    with the routed edges.  Returns (outputs, route result).
    """
    r = algo.rounds if r is None else r
    route = op_route(g, r, c=c, seed=seed, ledger=ledger)
    edges = g.edges()
    outs = [_local_output(g, route, edges, v, algo, r) for v in range(g.n)]
    return outs, route


def simulate_rounds(g: Graph, algo: LocalAlgorithm, r: Optional[int] = None,
                    ledger: Optional[RoundLedger] = None) -> list:
    """Outputs of an r-round LOCAL algorithm run one clique round per LOCAL round.

    Each round every vertex sends its state to each neighbour, so a node sends
    and receives deg(v) < n messages and the schedule is always admissible.
    """
    r = algo.rounds if r is None else r
    if ledger is not None:
        deg = np.zeros(ledger.n, dtype=np.int64)
        deg[g.labels] = g.degrees
        for _ in range(r):
            ledger.charge_round(deg, deg, "local-round")
    return run_synchronous(g, algo, r)
