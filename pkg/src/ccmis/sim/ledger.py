"""Round and message accounting for the all-to-all model.

Each round records how many O(log n)-bit messages every node sent and
received.  A round is admissible when no node sends or receives more than
``c_l * n`` messages, which is the load an all-to-all router can deliver in a
constant number of rounds.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

DEFAULT_CL = 64


@dataclass
class RoundRecord:
    label: str
    sent: np.ndarray
    received: np.ndarray
    budget: int

    @property
    def total(self) -> int:
        return int(self.sent.sum())

    @property
    def max_sent(self) -> int:
        return int(self.sent.max()) if self.sent.size else 0

    @property
    def max_received(self) -> int:
        return int(self.received.max()) if self.received.size else 0

    @property
    def admissible(self) -> bool:
        return self.max_sent <= self.budget and self.max_received <= self.budget

    def to_dict(self, per_node: bool = False) -> dict:
        d = {
            "label": self.label,
            "total": self.total,
            "max_sent": self.max_sent,
            "max_received": self.max_received,
            "admissible": self.admissible,
        }
        if per_node:
            d["sent"] = self.sent.tolist()
            d["received"] = self.received.tolist()
        return d


class RoundLedger:
    """Sequence of charged rounds for a network of ``n`` nodes."""

    def __init__(self, n: int, c_l: int = DEFAULT_CL):
        if n < 1:
            raise ValueError("ledger needs at least one node")
        if c_l < 1:
            raise ValueError("c_l must be positive")
        self.n = int(n)
        self.c_l = int(c_l)
        self.rounds: list[RoundRecord] = []

    @property
    def budget(self) -> int:
        return self.c_l * self.n

    def __len__(self) -> int:
        return len(self.rounds)

    @property
    def violations(self) -> int:
        return sum(not r.admissible for r in self.rounds)

    def _vec(self, counts) -> np.ndarray:
        if counts is None:
            return np.zeros(self.n, dtype=np.int64)
        a = np.asarray(counts, dtype=np.int64)
        if a.shape != (self.n,):
            raise ValueError(f"expected {self.n} per-node counts, got shape {a.shape}")
        if np.any(a < 0):
            raise ValueError("message counts must be non-negative")
        return a

    def _spread(self, total: int) -> np.ndarray:
        # destination unspecified: messages go to distinct nodes round-robin
        q, r = divmod(int(total), self.n)
        out = np.full(self.n, q, dtype=np.int64)
        out[:r] += 1
        return out

    def charge_round(self, sent=None, received=None, label: str = "") -> RoundRecord:
        """Append one round.  ``received`` defaults to an even spread of the sent total."""
        s = self._vec(sent)
        r = self._spread(int(s.sum())) if received is None else self._vec(received)
        if int(s.sum()) != int(r.sum()):
            raise ValueError("sent and received totals differ")
        rec = RoundRecord(label, s, r, self.budget)
        self.rounds.append(rec)
        return rec

    def charge_rounds(self, k: int, label: str = "") -> None:
        """Charge ``k`` rounds whose traffic is accounted elsewhere (local steps)."""
        for _ in range(k):
            self.charge_round(label=label)

    def charge_broadcast(self, senders, label: str = "") -> RoundRecord:
        """Every flagged node sends one message to every other node."""
        mask = np.zeros(self.n, dtype=np.bool_)
        mask[np.asarray(senders, dtype=np.int64)] = True
        k = int(mask.sum())
        sent = np.where(mask, self.n - 1, 0).astype(np.int64)
        received = np.full(self.n, k, dtype=np.int64) - mask.astype(np.int64)
        return self.charge_round(sent, received, label)

    def gather_to_node(self, per_source, target: int = 0, label: str = "gather",
                       payload=None):
        """Send ``per_source[v]`` messages from every v to ``target``.

        The target accepts at most ``c_l * n`` messages per round, so the gather
        takes max(1, ceil(total / (c_l n))) rounds; senders are drained in id
        order.  Messages a node holds for itself cost nothing.  Returns
        ``payload`` unchanged (the data now held by the target).
        """
        src = self._vec(per_source).copy()
        src[target] = 0
        total = int(src.sum())
        cap = self.budget
        k = max(1, -(-total // cap))
        hi = np.cumsum(src)
        lo = hi - src
        for j in range(k):
            a, b = j * cap, (j + 1) * cap
            sent = np.clip(np.minimum(hi, b) - np.maximum(lo, a), 0, None)
            received = np.zeros(self.n, dtype=np.int64)
            received[target] = int(sent.sum())
            self.charge_round(sent, received, label)
        return payload

    def merge_parallel(self, subs: Iterable["RoundLedger"], label: str = "parallel") -> None:
        """Append sub-ledgers that ran side by side: round j is their sum."""
        subs = list(subs)
        if not subs:
            return
        for s in subs:
            if s.n != self.n:
                raise ValueError("sub-ledger node count differs")
        depth = max(len(s) for s in subs)
        for j in range(depth):
            sent = np.zeros(self.n, dtype=np.int64)
            received = np.zeros(self.n, dtype=np.int64)
            names = set()
            for s in subs:
                if j < len(s):
                    sent += s.rounds[j].sent
                    received += s.rounds[j].received
                    names.add(s.rounds[j].label)
            self.charge_round(sent, received, f"{label}:" + "+".join(sorted(names)))

    def extend(self, other: "RoundLedger") -> None:
        if other.n != self.n:
            raise ValueError("ledger node count differs")
        self.rounds.extend(other.rounds)

    def fork(self) -> "RoundLedger":
        return RoundLedger(self.n, self.c_l)

    def to_dict(self, per_node: bool = False) -> dict:
        return {
            "n": self.n,
            "c_l": self.c_l,
            "rounds": [r.to_dict(per_node) for r in self.rounds],
            "round_count": len(self.rounds),
            "violations": self.violations,
        }

    def to_json(self, per_node: bool = False, path: Optional[str] = None) -> str:
        text = json.dumps(self.to_dict(per_node), indent=1)
        if path is not None:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        return text
