"""Drivers for regular graphs: the O(log 1/eps) matcher and the
node-averaged maximal matching.

Both drivers start with colour coding: every node flips a fair coin and
only bichromatic edges take part in the first Luby phase, which makes the
working graph bipartite even when the input is not.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DomainError, NotRegularError
from .graph import Graph
from .luby import (
    DEFAULT_C_PRIME,
    LubyProcess,
    RoundSnapshot,
    color_code_bipartize,
    communication_finish_rounds,
    luby_round_finish_times,
    multi_round_luby,
    rank_range,
)
from .matching import Matching
from .schedules import alpha_exact, horizon_for, mpf_to_fraction, param_schedules
from .sim import Trace, node_averaged_time

FALLBACK_NOTE = (
    "phase 2 completes the matching by repeating one-round Luby on the residual graph "
    "in place of a nearly-maximal independent set subroutine"
)
EMPIRICAL_NOTE = "run outside the proven parameter regime; results are empirical"


def _require_regular(g: Graph) -> int:
    deg = g.degrees
    if g.node_count == 0:
        return 0
    if deg.min() != deg.max():
        raise NotRegularError(f"degrees range over [{deg.min()}, {deg.max()}]")
    return int(deg[0])


@dataclass
class FastResult:
    matching: Matching
    snapshots: list[RoundSnapshot]
    rounds: int
    unmatched_fraction: float
    approx_ratio_bound: float
    label: str = EMPIRICAL_NOTE

    def as_dict(self) -> dict:
        return {
            "matching_size": self.matching.size,
            "rounds": self.rounds,
            "unmatched_fraction": self.unmatched_fraction,
            "approx_ratio_bound": self.approx_ratio_bound,
            "label": self.label,
        }


def approx_match_fast(
    g: Graph, eps, seed: int = 0, c_prime: int = DEFAULT_C_PRIME, strict: bool = False
) -> FastResult:
    """Colour-code, then run ``ceil(10 log2(1/eps))`` rounds of Luby.

    ``approx_ratio_bound`` is ``(n/2) / |M|``, the ratio against the
    perfect-matching upper bound on OPT (tight for regular bipartite
    inputs).

    Raises:
        NotRegularError: if ``g`` is not regular.
        DomainError: if ``eps`` is outside (0, 1), or ``strict`` is set and
            ``eps`` lies outside the proven regime.
    """
    delta = _require_regular(g)
    rounds = horizon_for(eps)
    label = EMPIRICAL_NOTE
    if strict:
        param_schedules(max(delta, 2), eps, strict=True)
        label = "within the proven parameter regime"
    bip = color_code_bipartize(g, seed)
    m, snaps = multi_round_luby(bip, rounds, seed, c_prime=c_prime, rank_m=g.edge_count)
    n = g.node_count
    unmatched = (n - 2 * m.size) / n if n else 0.0
    ratio = (n / 2) / m.size if m.size else (1.0 if n < 2 or g.edge_count == 0 else math.inf)
    return FastResult(m, snaps, rounds, unmatched, ratio, label)


def phase_one_rounds(delta: int) -> int:
    """``ceil(200 log2 log2 delta)`` (0 for ``delta <= 2``)."""
    if delta <= 2:
        return 0
    return math.ceil(200 * math.log2(math.log2(delta)))


@dataclass
class NodeAvgResult:
    """Outcome of :func:`maximal_match_node_avg`.

    ``trace.finish_round`` counts communication rounds of the two-step
    Luby schedule used by :class:`~regmatch.luby.LubyProgram`;
    ``luby_finish`` counts Luby rounds.  The trace's message statistics
    are the analytic per-message bound (``total_messages`` is ``-1``
    because messages are not materialised here).
    """

    matching: Matching
    trace: Trace
    avg: Fraction
    avg_luby_rounds: Fraction
    luby_finish: np.ndarray = field(repr=False)
    phase1_budget: int = 0
    phase1_rounds: int = 0
    total_rounds: int = 0
    notes: tuple = (FALLBACK_NOTE,)

    def as_dict(self) -> dict:
        return {
            "matching_size": self.matching.size,
            "avg": float(self.avg),
            "avg_luby_rounds": float(self.avg_luby_rounds),
            "phase1_budget": self.phase1_budget,
            "phase1_rounds": self.phase1_rounds,
            "total_rounds": self.total_rounds,
            "maximal": True,
        }


def maximal_match_node_avg(
    g: Graph, seed: int = 0, c_prime: int = DEFAULT_C_PRIME, colors: np.ndarray | None = None
) -> NodeAvgResult:
    """Maximal matching whose per-node finish times are measured.

    Phase 1 runs up to ``ceil(200 log2 log2 Delta)`` Luby rounds on the
    bichromatic subgraph, stopping early once that subgraph has no live
    edge left.  Phase 2 repeats Luby on the residual of ``g`` (monochromatic
    edges included) until the matching is maximal.  Round numbers continue
    across the phases.

    A node finishes when it is matched, or when its last live neighbour is
    matched; see :func:`~regmatch.luby.communication_finish_rounds`.
    """
    n = g.node_count
    delta = _require_regular(g)
    if n and delta < 1:
        raise DomainError("maximal_match_node_avg needs at least one edge per node")
    high = rank_range(g.edge_count, c_prime)
    budget = phase_one_rounds(delta)
    bip = color_code_bipartize(g, seed, colors)
    p1 = LubyProcess(n, bip.edges, seed, high)
    parts = []
    rnds = []
    while p1.alive_edges and p1.t < budget:
        won = p1.step()
        parts.append(won)
        rnds.append(np.full(len(won), p1.t, np.int64))
    phase1 = p1.t
    p2 = LubyProcess(n, g.edges, seed, high, t0=p1.t, matched=p1.matched)
    while p2.alive_edges:
        won = p2.step()
        parts.append(won)
        rnds.append(np.full(len(won), p2.t, np.int64))
    if parts:
        m = Matching.from_edges(n, np.concatenate(parts), rounds=np.concatenate(rnds))
    else:
        m = Matching.empty(n)
    if not m.is_maximal_in(g):
        raise AssertionError("phase 2 ended with a non-maximal matching")
    finish = communication_finish_rounds(g, m)
    luby_finish = luby_round_finish_times(g, m)
    outputs = [None if p < 0 else int(p) for p in m.partner.tolist()]
    bits = max((n - 1).bit_length() if n else 0, min(64, (high - 1).bit_length()))
    trace = Trace(
        rounds_executed=int(finish.max()) if n else 0,
        finish_round=finish,
        outputs=outputs,
        max_message_bits=bits,
        total_messages=-1,
        budget_exhausted=False,
    )
    avg_l = Fraction(int(luby_finish.sum()), n) if n else Fraction(0)
    return NodeAvgResult(
        matching=m,
        trace=trace,
        avg=node_averaged_time(trace),
        avg_luby_rounds=avg_l,
        luby_finish=luby_finish,
        phase1_budget=budget,
        phase1_rounds=phase1,
        total_rounds=p2.t,
    )


class RecursionSchedule:
    """``(alpha_i, D/2^i)`` for any round ``i``, from the closed form of the alpha recursion."""

    def __init__(self, delta: int):
        self.delta = delta

    def entry(self, i: int) -> tuple[Fraction, Fraction]:
        return mpf_to_fraction(alpha_exact(self.delta, i)), Fraction(self.delta, 2**i)


def preservation_run(g: Graph, rounds: int, seed: int = 0, scored: bool = True, c_prime: int = DEFAULT_C_PRIME):
    """Multi-round Luby whose snapshots are scored against the alpha schedule of ``g``'s max degree."""
    schedule = RecursionSchedule(max(g.max_degree, 1)) if scored else None
    return multi_round_luby(g, rounds, seed, schedule=schedule, c_prime=c_prime)
