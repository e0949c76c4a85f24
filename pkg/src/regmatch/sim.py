"""Round-synchronous message passing (LOCAL / CONGEST substrate).

A :class:`NodeProgram` is run at every node.  Round 0 is local computation
with an empty inbox; in round ``r >= 1`` each node receives the messages
its neighbors sent in round ``r - 1``.  A node that returns :class:`Done`
in round ``r`` has ``finish_round == r`` and from then on is silent.

Ports are numbered by ascending neighbor id unless explicit port orders
are supplied.  Messages are byte strings; ``b""`` means "no message".
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Protocol, Sequence

import numpy as np

from .errors import UnfinishedTraceError
from .graph import Graph
from .rng import node_seed


@dataclass(frozen=True)
class Done:
    """Wrapper marking a node's final output (which may itself be None)."""

    value: Any = None


class NodeProgram(Protocol):
    def init(self, node_id: int, degree: int, local_seed: int) -> Any: ...

    def on_round(self, state: Any, inbox: list[bytes]) -> tuple[Any, Sequence[bytes] | None, Done | None]: ...


@dataclass(frozen=True)
class Trace:
    rounds_executed: int
    finish_round: np.ndarray
    outputs: list
    max_message_bits: int
    total_messages: int
    budget_exhausted: bool

    @property
    def finished(self) -> np.ndarray:
        return self.finish_round >= 0


def encode_int(x: int) -> bytes:
    """Minimal big-endian encoding of a non-negative int (never empty)."""
    return x.to_bytes(max(1, (x.bit_length() + 7) // 8), "big")


def decode_int(msg: bytes) -> int:
    return int.from_bytes(msg, "big")


def message_bits(msg: bytes) -> int:
    """Payload size of a message: bit length of its integer value, at least 1 if non-empty."""
    if not msg:
        return 0
    return max(1, int.from_bytes(msg, "big").bit_length())


def run_rounds(
    g: Graph,
    program: NodeProgram,
    budget: int,
    seed: int,
    ports: Sequence[Sequence[int]] | None = None,
) -> Trace:
    """Execute ``program`` on every node of ``g`` for rounds ``0..budget``.

    Stops early once every node has finished.  Nodes still running after
    round ``budget`` are reported with ``finish_round == -1`` and the
    trace's ``budget_exhausted`` flag set.
    """
    n = g.node_count
    if ports is None:
        port_nbrs = g.adjacency()
    else:
        port_nbrs = [list(p) for p in ports]
        for u in range(n):
            if sorted(port_nbrs[u]) != g.neighbors(u).tolist():
                raise ValueError(f"port order of node {u} is not a permutation of its neighbors")
    # reverse[u][p] = port index at which neighbor port_nbrs[u][p] sees u
    index_of = [{v: p for p, v in enumerate(nb)} for nb in port_nbrs]
    reverse = [[index_of[v][u] for v in port_nbrs[u]] for u in range(n)]

    states = [program.init(u, len(port_nbrs[u]), node_seed(seed, u)) for u in range(n)]
    inbox = [[b""] * len(port_nbrs[u]) for u in range(n)]
    finish = np.full(n, -1, np.int64)
    outputs: list = [None] * n
    max_bits = 0
    total = 0
    executed = -1
    live = list(range(n))
    for r in range(budget + 1):
        if not live:
            break
        executed = r
        nxt = [[b""] * len(port_nbrs[u]) for u in range(n)]
        still = []
        for u in live:
            state, outbox, done = program.on_round(states[u], inbox[u])
            states[u] = state
            if done is not None:
                finish[u] = r
                outputs[u] = done.value
                continue
            still.append(u)
            if not outbox:
                continue
            for p, msg in enumerate(outbox):
                if msg:
                    v = port_nbrs[u][p]
                    nxt[v][reverse[u][p]] = msg
                    total += 1
                    max_bits = max(max_bits, message_bits(msg))
        live = still
        inbox = nxt
    return Trace(
        rounds_executed=max(executed, 0),
        finish_round=finish,
        outputs=outputs,
        max_message_bits=max_bits,
        total_messages=total,
        budget_exhausted=bool(live),
    )


def node_averaged_time(t: Trace) -> Fraction:
    """Mean finish round over all nodes, as an exact fraction.

    Raises:
        UnfinishedTraceError: if some node never finished.
    """
    fr = t.finish_round
    if np.any(fr < 0):
        raise UnfinishedTraceError(f"{int(np.sum(fr < 0))} node(s) did not finish")
    if len(fr) == 0:
        return Fraction(0)
    return Fraction(int(fr.sum()), len(fr))
