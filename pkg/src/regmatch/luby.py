"""Luby-style matching: the distributed round, its sequential views, and drivers.

Rank convention.  In Luby round ``t`` the edge ``(u, v)`` with ``u < v``
draws the rank ``bounded(mix(node_seed(seed, u), t, v), R)`` with
``R = 100 * m**(c' + 2)`` and ``m`` the edge count of the input graph.
The lower endpoint can compute it from its own local seed, so the
vectorized code below and the message-passing :class:`LubyProgram`
produce identical matchings for identical seeds.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations
from typing import Sequence

import numpy as np

from .graph import Graph, alpha_regular_mask
from .matching import Matching
from .rng import (
    STREAM_COLOR,
    STREAM_NODE,
    STREAM_SAMPLE,
    STREAM_TRIAL,
    UINT64_MAX,
    bounded,
    generator,
    mix,
    node_seed,
)
from .sim import Done, decode_int, encode_int

DEFAULT_C_PRIME = 2


def rank_range(m: int, c_prime: int = DEFAULT_C_PRIME) -> int:
    """Size of the rank space ``100 * m**(c' + 2)`` (exact Python int)."""
    return 100 * max(m, 1) ** (c_prime + 2)


def congest_bits(m: int, c_prime: int = DEFAULT_C_PRIME) -> int:
    """``ceil(log2(100 m^(c'+2)))``, the per-message budget of the CONGEST check."""
    return math.ceil(math.log2(rank_range(m, c_prime)))


def edge_ranks(node_seeds: np.ndarray, eu: np.ndarray, ev: np.ndarray, t: int, high: int) -> np.ndarray:
    """Ranks of edges ``(eu[i], ev[i])`` (``eu < ev``) in Luby round ``t``."""
    return bounded(mix(node_seeds[eu], t, ev), high)


def strict_min_mask(n: int, eu: np.ndarray, ev: np.ndarray, rank: np.ndarray) -> np.ndarray:
    """Edges whose rank is strictly below the rank of every adjacent edge.

    An edge wins iff it holds the unique minimum at both endpoints; a tie
    for the minimum at a node knocks out every tied edge there.
    """
    if len(eu) == 0:
        return np.zeros(0, bool)
    best = np.full(n, UINT64_MAX, dtype=np.uint64)
    np.minimum.at(best, eu, rank)
    np.minimum.at(best, ev, rank)
    at_u = rank == best[eu]
    at_v = rank == best[ev]
    cnt = np.bincount(eu[at_u], minlength=n) + np.bincount(ev[at_v], minlength=n)
    return at_u & at_v & (cnt[eu] == 1) & (cnt[ev] == 1)


class LubyProcess:
    """Repeated one-round distributed Luby with removal of matched nodes, vectorized.

    Args:
        n: node count.
        edges: ``(m, 2)`` candidate edges with ``u < v``.
        seed: global seed (ranks follow the module-level convention).
        high: rank range ``R``.
        t0: index of the last Luby round already executed; the first
            :meth:`step` runs round ``t0 + 1``.
        matched: optional mask of nodes that are already matched.
    """

    def __init__(self, n: int, edges: np.ndarray, seed: int, high: int, t0: int = 0, matched=None):
        self.n = n
        self.high = high
        self.t = t0
        self.node_seeds = np.asarray(node_seed(seed, np.arange(n, dtype=np.int64)), dtype=np.uint64).reshape(n)
        self.matched = np.zeros(n, bool) if matched is None else np.asarray(matched, bool).copy()
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        keep = ~self.matched[e[:, 0]] & ~self.matched[e[:, 1]] if len(e) else np.zeros(0, bool)
        self.eu = np.ascontiguousarray(e[keep, 0])
        self.ev = np.ascontiguousarray(e[keep, 1])

    @property
    def alive_edges(self) -> int:
        return len(self.eu)

    def step(self) -> np.ndarray:
        """Run one round; return the ``(k, 2)`` array of newly matched edges."""
        self.t += 1
        if not len(self.eu):
            return np.zeros((0, 2), np.int64)
        rank = edge_ranks(self.node_seeds, self.eu, self.ev, self.t, self.high)
        win = strict_min_mask(self.n, self.eu, self.ev, rank)
        won = np.stack([self.eu[win], self.ev[win]], axis=1)
        self.matched[won.ravel()] = True
        keep = ~self.matched[self.eu] & ~self.matched[self.ev]
        self.eu = self.eu[keep]
        self.ev = self.ev[keep]
        return won

    def degrees(self) -> np.ndarray:
        return np.bincount(self.eu, minlength=self.n) + np.bincount(self.ev, minlength=self.n)


# --- one-round distributed Luby ---------------------------------------------


def luby_round_distributed(g: Graph, c_prime: int = DEFAULT_C_PRIME, seed: int = 0) -> Matching:
    """One round of distributed Luby: each edge draws a rank, strict local minima match."""
    proc = LubyProcess(g.node_count, g.edges, seed, rank_range(g.edge_count, c_prime))
    won = proc.step()
    return Matching.from_edges(g.node_count, won, rounds=1)


# --- sequential random-order Luby --------------------------------------------


def _sequential_pass(n: int, edges: np.ndarray, order: Sequence[int]) -> list[int]:
    """Literal SeqLuby over a fixed edge order; returns kept edge indices."""
    touched = np.zeros(n, bool)
    kept = []
    for e in order:
        a, b = edges[e]
        if not touched[a] and not touched[b]:
            kept.append(int(e))
        touched[a] = touched[b] = True
    return kept


def luby_round_sequential(g: Graph, seed: int = 0) -> Matching:
    """SeqLuby: sample edges in uniformly random order without replacement.

    A sampled edge joins the matching iff no adjacent edge was sampled
    before it (even an adjacent edge that was itself rejected blocks it).
    """
    order = generator(seed, STREAM_SAMPLE).permutation(g.edge_count)
    kept = _sequential_pass(g.node_count, g.edges, order)
    return Matching.from_edges(g.node_count, g.edges[kept], rounds=1)


def sequential_distribution(g: Graph, max_edges: int = 9) -> dict[frozenset, Fraction]:
    """Exact output distribution of SeqLuby by enumerating all edge orders."""
    m = g.edge_count
    if m > max_edges:
        raise ValueError(f"{m} edges is too many to enumerate (limit {max_edges})")
    counts: Counter = Counter()
    edges = g.edges.tolist()
    for order in permutations(range(m)):
        kept = _sequential_pass(g.node_count, g.edges, order)
        counts[frozenset(tuple(edges[e]) for e in kept)] += 1
    total = math.factorial(m)
    return {k: Fraction(v, total) for k, v in counts.items()}


# --- local sequential Luby ---------------------------------------------------


@dataclass(frozen=True)
class LocalNeighborhood:
    """Edge sets used by SeqLuby restricted to the neighborhood of ``u``.

    ``eu_edges`` is ``E ∩ ({u}×N ∪ N×N² ∪ N²×N³)`` and ``au_mask`` marks
    the rows of it that lie in ``A_u = N×N²``.
    """

    u: int
    n1: frozenset
    n2: frozenset
    eu_edges: np.ndarray
    au_mask: np.ndarray


def local_neighborhood(g: Graph, u: int) -> LocalNeighborhood:
    layers = g.spheres(u, 3)
    level = np.full(g.node_count, -1, np.int64)
    for d, s in enumerate(layers):
        level[list(s)] = d
    e = g.edges
    lu = level[e[:, 0]]
    lv = level[e[:, 1]]
    lo = np.minimum(lu, lv)
    hi = np.maximum(lu, lv)
    # consecutive layers (0,1), (1,2), (2,3) only; both endpoints must be in the ball
    sel = (lo >= 0) & (hi == lo + 1) & (lo <= 2)
    au = (lo[sel] == 1) & (hi[sel] == 2)
    return LocalNeighborhood(u, frozenset(layers[1]), frozenset(layers[2]), e[sel], au)


def seq_luby_local(g: Graph, u: int, seed: int = 0) -> Matching:
    """SeqLuby run on ``E_u`` only, keeping the matched edges inside ``A_u``.

    Adjacency is taken inside ``E_u``: an edge is blocked only by
    previously sampled edges of ``E_u``, which are the only ones sampled.
    """
    nb = local_neighborhood(g, u)
    order = generator(seed, STREAM_SAMPLE, u).permutation(len(nb.eu_edges))
    kept = _sequential_pass(g.node_count, nb.eu_edges, order)
    kept = [e for e in kept if nb.au_mask[e]]
    return Matching.from_edges(g.node_count, nb.eu_edges[kept], rounds=1)


def local_distribution(g: Graph, u: int, max_edges: int = 9) -> dict[frozenset, Fraction]:
    """Exact distribution of :func:`seq_luby_local` by order enumeration."""
    nb = local_neighborhood(g, u)
    m = len(nb.eu_edges)
    if m > max_edges:
        raise ValueError(f"|E_u| = {m} is too many to enumerate (limit {max_edges})")
    counts: Counter = Counter()
    edges = nb.eu_edges.tolist()
    for order in permutations(range(m)):
        kept = _sequential_pass(g.node_count, nb.eu_edges, order)
        counts[frozenset(tuple(edges[e]) for e in kept if nb.au_mask[e])] += 1
    total = math.factorial(m)
    return {k: Fraction(v, total) for k, v in counts.items()}


@dataclass
class SurvivorTrajectory:
    """Per-iteration measurements of SeqLuby restricted to ``u``'s neighborhood.

    Index ``i - 1`` of each array describes the beginning of iteration
    ``i``: ``surviving[i-1] = |E_i|``, ``q[i-1] = |E_i| / (|E_u| - (i-1))``,
    ``labeled_neighbors[i-1]`` counts nodes of ``N(u)`` with a sampled
    incident edge, and ``matched[i-1]`` is ``|M_u|`` so far.
    """

    u: int
    k: int
    delta: int
    eu_size: int
    au_size: int
    stopping_time: int
    log_base: int
    surviving: np.ndarray
    q: np.ndarray
    labeled_neighbors: np.ndarray
    matched: np.ndarray
    final_matching: Matching = field(repr=False)

    def ratios(self) -> np.ndarray:
        """``|E_i| / |E_{i-1}|`` for ``i >= 2`` (nan where the divisor is 0)."""
        s = self.surviving.astype(float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return s[1:] / s[:-1]


def instrument_survivors(
    g: Graph, u: int, seed: int = 0, max_iterations: int | None = None
) -> SurvivorTrajectory:
    """Run SeqLuby_u and record the surviving-edge trajectory.

    The stopping time is ``t = floor(k * log2(Delta) / 100)`` with
    ``k = |N^2(u)|`` and ``Delta`` the maximum degree of ``g``; the
    trajectory itself covers every iteration (or ``max_iterations``).
    """
    nb = local_neighborhood(g, u)
    edges = nb.eu_edges
    m = len(edges)
    k = len(nb.n2)
    delta = g.max_degree
    t_stop = int(k * math.log2(delta) // 100) if delta >= 1 else 0
    order = generator(seed, STREAM_SAMPLE, u).permutation(m)
    iters = m if max_iterations is None else min(m, max_iterations)

    n = g.node_count
    au_idx = np.flatnonzero(nb.au_mask)
    # A_u edges incident to each node, for the incremental |E_i| update
    inc: dict[int, list[int]] = {}
    for e in au_idx.tolist():
        a, b = edges[e]
        inc.setdefault(int(a), []).append(e)
        inc.setdefault(int(b), []).append(e)
    touched = np.zeros(n, bool)
    alive = len(au_idx)
    n1 = nb.n1
    labeled = 0
    matched_count = 0
    kept = []
    surv = np.zeros(iters, np.int64)
    qs = np.zeros(iters, float)
    lab = np.zeros(iters, np.int64)
    mat = np.zeros(iters, np.int64)
    for i in range(iters):
        surv[i] = alive
        qs[i] = alive / (m - i) if m - i > 0 else 0.0
        lab[i] = labeled
        mat[i] = matched_count
        e = int(order[i])
        a, b = (int(x) for x in edges[e])
        if not touched[a] and not touched[b]:
            if nb.au_mask[e]:
                kept.append(e)
                matched_count += 1
        for x in (a, b):
            if touched[x]:
                continue
            # A_u edges at x whose other endpoint is untouched die now
            for f in inc.get(x, ()):
                c, d = edges[f]
                other = d if c == x else c
                if not touched[other]:
                    alive -= 1
            touched[x] = True
            if x in n1:
                labeled += 1
    # finish the pass so the final matching is the full algorithm's output
    for i in range(iters, m):
        e = int(order[i])
        a, b = edges[e]
        if not touched[a] and not touched[b] and nb.au_mask[e]:
            kept.append(e)
        touched[a] = touched[b] = True
    return SurvivorTrajectory(
        u=u,
        k=k,
        delta=delta,
        eu_size=m,
        au_size=len(au_idx),
        stopping_time=t_stop,
        log_base=2,
        surviving=surv,
        q=qs,
        labeled_neighbors=lab,
        matched=mat,
        final_matching=Matching.from_edges(n, edges[kept], rounds=1),
    )


# --- distributed vs sequential output laws -----------------------------------


def _batch_distributed(g: Graph, seeds: np.ndarray, c_prime: int) -> np.ndarray:
    """Distributed one-round Luby for many seeds at once; returns ``(samples, m)`` win mask."""
    e = g.edges
    m = len(e)
    high = rank_range(m, c_prime)
    ns = mix(seeds[:, None], STREAM_NODE, e[None, :, 0])  # node_seed, broadcast over samples
    rank = bounded(mix(ns, 1, e[None, :, 1]), high)
    adj = (e[:, None, 0] == e[None, :, 0]) | (e[:, None, 0] == e[None, :, 1])
    adj |= (e[:, None, 1] == e[None, :, 0]) | (e[:, None, 1] == e[None, :, 1])
    np.fill_diagonal(adj, False)
    others = np.where(adj[None, :, :], rank[:, None, :], UINT64_MAX)
    nbr_min = others.min(axis=2) if m else np.zeros((len(seeds), 0), np.uint64)
    # an edge with no neighbours always wins
    lonely = ~adj.any(axis=1)
    return (rank < nbr_min) | lonely[None, :]


def _batch_sequential(g: Graph, samples: int, seed: int) -> np.ndarray:
    """Sequential random-order Luby for many independent orders, vectorized across samples."""
    e = g.edges
    m = len(e)
    rng = generator(seed, STREAM_SAMPLE)
    order = rng.permuted(np.tile(np.arange(m), (samples, 1)), axis=1)
    touched = np.zeros((samples, g.node_count), bool)
    win = np.zeros((samples, m), bool)
    rows = np.arange(samples)
    for j in range(m):
        idx = order[:, j]
        a = e[idx, 0]
        b = e[idx, 1]
        ok = ~touched[rows, a] & ~touched[rows, b]
        win[rows, idx] = ok
        touched[rows, a] = True
        touched[rows, b] = True
    return win


def _histogram(win: np.ndarray) -> Counter:
    weights = (1 << np.arange(win.shape[1], dtype=np.uint64)).astype(np.uint64)
    keys = (win.astype(np.uint64) * weights).sum(axis=1) if win.shape[1] else np.zeros(len(win), np.uint64)
    vals, cnts = np.unique(keys, return_counts=True)
    return Counter(dict(zip(vals.tolist(), cnts.tolist())))


def tv_distance_estimate(g: Graph, samples: int, c_prime: int = DEFAULT_C_PRIME, seed: int = 0) -> Fraction:
    """Empirical distance between the distributed and sequential output laws.

    Returns the L1 sum over matchings of the difference of empirical
    frequencies (no factor 1/2), from ``samples`` independent draws of
    each algorithm.  Sample ``i`` of the distributed round uses the trial seed
    ``split_seed(seed, i)``.
    """
    if g.edge_count > 60:
        raise ValueError("tv_distance_estimate encodes matchings as 64-bit masks; use a graph with <= 60 edges")
    seeds = mix(seed, STREAM_TRIAL, np.arange(samples, dtype=np.int64))
    d0 = _histogram(_batch_distributed(g, seeds, c_prime))
    d1 = _histogram(_batch_sequential(g, samples, seed))
    keys = set(d0) | set(d1)
    return Fraction(sum(abs(d0.get(k, 0) - d1.get(k, 0)) for k in keys), samples)


# --- colour coding ---------------------------------------------------------


def node_colors(n: int, seed: int) -> np.ndarray:
    """Independent fair bits per node, as used by the colour-coding trick."""
    return (mix(seed, STREAM_COLOR, np.arange(n, dtype=np.int64)) & np.uint64(1)).astype(np.int8)


def color_code_bipartize(g: Graph, seed: int = 0, colors: np.ndarray | None = None) -> Graph:
    """Keep only bichromatic edges under a random 2-colouring; sides = colours.

    ``colors`` overrides the random colouring (a test hook).
    """
    col = node_colors(g.node_count, seed) if colors is None else np.asarray(colors, dtype=np.int8)
    e = g.edges
    keep = col[e[:, 0]] != col[e[:, 1]] if len(e) else np.zeros(0, bool)
    return Graph(g.node_count, np.ascontiguousarray(e[keep]), col.copy(), g.origin)


# --- multi-round driver ----------------------------------------------------


@dataclass(frozen=True)
class RoundSnapshot:
    round_index: int
    residual_node_count: int
    residual_edge_count: int
    matched_this_round: int
    degree_histogram: dict
    mean_degree: float
    low_edge_fraction: float = 1.0
    alpha_regular_fraction: Fraction | None = None
    alpha: float | None = None
    target_degree: float | None = None

    def as_dict(self) -> dict:
        d = dict(self.__dict__)
        d["degree_histogram"] = {int(k): int(v) for k, v in self.degree_histogram.items()}
        if self.alpha_regular_fraction is not None:
            d["alpha_regular_fraction"] = float(self.alpha_regular_fraction)
        return d


def _schedule_entry(schedule, i: int):
    """(alpha_i, Delta_i) for round ``i`` from a list or a ScheduleTable."""
    if hasattr(schedule, "entry"):
        return schedule.entry(i)
    return schedule[i - 1]


def snapshot(proc: LubyProcess, round_index: int, matched_now: int, schedule=None) -> RoundSnapshot:
    deg = proc.degrees()
    free = ~proc.matched
    res_deg = deg[free]
    vals, cnts = np.unique(res_deg, return_counts=True)
    frac = alpha = target = None
    if schedule is not None:
        alpha, target = _schedule_entry(schedule, round_index)
        mask = alpha_regular_mask(proc.n, proc.eu, proc.ev, deg, alpha, target, nodes=free)
        frac = Fraction(int(mask.sum()), int(free.sum())) if free.any() else Fraction(0)
        alpha, target = float(alpha), float(target)
    n_free = int(free.sum())
    low = 1.0
    if proc.alive_edges:
        d = 2 * proc.alive_edges / n_free
        low = float(np.mean((deg[proc.eu] <= 2 * d) & (deg[proc.ev] <= 2 * d)))
    return RoundSnapshot(
        round_index=round_index,
        residual_node_count=int(free.sum()),
        residual_edge_count=proc.alive_edges,
        matched_this_round=matched_now,
        degree_histogram=dict(zip(vals.tolist(), cnts.tolist())),
        mean_degree=float(res_deg.mean()) if len(res_deg) else 0.0,
        low_edge_fraction=low,
        alpha_regular_fraction=frac,
        alpha=alpha,
        target_degree=target,
    )


def multi_round_luby(
    g: Graph,
    rounds: int,
    seed: int = 0,
    schedule=None,
    c_prime: int = DEFAULT_C_PRIME,
    rank_m: int | None = None,
) -> tuple[Matching, list[RoundSnapshot]]:
    """Run ``rounds`` rounds of distributed Luby, removing matched nodes after each.

    Args:
        schedule: optional per-round ``(alpha_i, Delta_i)`` pairs (list
            indexed from round 1) or a :class:`ScheduleTable`; when given,
            each snapshot reports the fraction of residual nodes that are
            ``(alpha_i, Delta_i)``-regular in the residual graph.
        rank_m: edge count used for the rank range (defaults to ``g``'s);
            drivers that run on a subgraph pass the host graph's count.

    Returns:
        The cumulative matching (``match_round`` set per node) and one
        snapshot per executed round.
    """
    m = g.edge_count if rank_m is None else rank_m
    proc = LubyProcess(g.node_count, g.edges, seed, rank_range(m, c_prime))
    won_all = []
    rounds_of = []
    snaps = []
    for i in range(1, rounds + 1):
        won = proc.step()
        won_all.append(won)
        rounds_of.append(np.full(len(won), i, np.int64))
        snaps.append(snapshot(proc, i, 2 * len(won), schedule))
    if won_all:
        edges = np.concatenate(won_all)
        rr = np.concatenate(rounds_of)
    else:
        edges = np.zeros((0, 2), np.int64)
        rr = np.zeros(0, np.int64)
    return Matching.from_edges(g.node_count, edges, rounds=rr), snaps


def luby_until_maximal(
    g: Graph, seed: int = 0, c_prime: int = DEFAULT_C_PRIME, max_rounds: int = 10_000
) -> Matching:
    """Repeat distributed Luby on the residual graph until the matching is maximal."""
    proc = LubyProcess(g.node_count, g.edges, seed, rank_range(g.edge_count, c_prime))
    won_all = []
    rounds_of = []
    while proc.alive_edges and proc.t < max_rounds:
        won = proc.step()
        won_all.append(won)
        rounds_of.append(np.full(len(won), proc.t, np.int64))
    if won_all:
        return Matching.from_edges(g.node_count, np.concatenate(won_all), rounds=np.concatenate(rounds_of))
    return Matching.empty(g.node_count)


def communication_finish_rounds(g: Graph, m: Matching) -> np.ndarray:
    """Finish rounds of :class:`LubyProgram` implied by a maximal matching.

    A node matched in Luby round ``t`` finishes at round ``2t + 1``; an
    unmatched node learns that its last neighbour was matched (in round
    ``t``) at round ``2t + 2``; an isolated node finishes at round 0.
    """
    n = g.node_count
    mr = m.match_round
    out = np.where(mr >= 0, 2 * mr + 1, 0).astype(np.int64)
    e = g.edges
    last = np.zeros(n, np.int64)
    if len(e):
        np.maximum.at(last, e[:, 0], mr[e[:, 1]])
        np.maximum.at(last, e[:, 1], mr[e[:, 0]])
    free_with_nbrs = (mr < 0) & (g.degrees > 0)
    out[free_with_nbrs] = 2 * last[free_with_nbrs] + 2
    return out


def luby_round_finish_times(g: Graph, m: Matching) -> np.ndarray:
    """Finish time per node counted in Luby rounds instead of messages.

    Matched nodes finish in their matching round, unmatched ones in the
    round their last neighbour got matched, isolated nodes at 0.
    """
    mr = m.match_round
    out = np.maximum(mr, 0).astype(np.int64)
    e = g.edges
    if len(e):
        last = np.zeros(g.node_count, np.int64)
        np.maximum.at(last, e[:, 0], mr[e[:, 1]])
        np.maximum.at(last, e[:, 1], mr[e[:, 0]])
        free = mr < 0
        out[free] = last[free]
    return out


# --- message-passing version -----------------------------------------------


@dataclass
class _LubyState:
    node_id: int
    degree: int
    local_seed: int
    r: int = 0
    t: int = 0
    nbr: list = field(default_factory=list)
    alive: list = field(default_factory=list)
    ranks: list = field(default_factory=list)
    proposed: int = -1


class LubyProgram:
    """Repeated distributed Luby until maximal, as a per-node message program.

    Schedule: round 0 exchanges ids.  Luby round ``t`` uses communication
    rounds ``2t - 1`` (the lower endpoint of each live edge sends the
    rank, the other endpoint an alive marker) and ``2t`` (each node flags
    the port holding its unique minimum rank).  A node is matched in round
    ``2t + 1`` when both endpoints flagged the same edge.  Matched nodes
    output their partner id; unmatched nodes output ``None`` as soon as no
    live neighbour remains.
    """

    def __init__(self, edge_count: int, c_prime: int = DEFAULT_C_PRIME):
        self.high = rank_range(edge_count, c_prime)

    def init(self, node_id: int, degree: int, local_seed: int) -> _LubyState:
        return _LubyState(node_id, degree, local_seed)

    def _rank(self, s: _LubyState, other: int) -> int:
        return int(bounded(mix(s.local_seed, s.t, other), self.high))

    def on_round(self, s: _LubyState, inbox: list[bytes]):
        r = s.r
        s.r += 1
        if r == 0:
            if s.degree == 0:
                return s, None, Done(None)
            return s, [encode_int(s.node_id)] * s.degree, None
        if r % 2 == 1:
            if r == 1:
                s.nbr = [decode_int(msg) for msg in inbox]
                s.alive = [True] * s.degree
            elif s.proposed >= 0 and inbox[s.proposed] == b"\x01":
                return s, None, Done(s.nbr[s.proposed])
            # step A of the next Luby round
            s.t += 1
            s.ranks = [0] * s.degree
            out = [b""] * s.degree
            for p, v in enumerate(s.nbr):
                if not s.alive[p]:
                    continue
                if s.node_id < v:
                    s.ranks[p] = self._rank(s, v)
                    out[p] = encode_int(s.ranks[p])
                else:
                    out[p] = encode_int(0)
            return s, out, None
        # step B: refresh liveness, then flag the unique minimum
        for p in range(s.degree):
            if s.alive[p] and not inbox[p]:
                s.alive[p] = False
            elif s.alive[p] and s.node_id > s.nbr[p]:
                s.ranks[p] = decode_int(inbox[p])
        live = [p for p in range(s.degree) if s.alive[p]]
        if not live:
            return s, None, Done(None)
        best = min(s.ranks[p] for p in live)
        holders = [p for p in live if s.ranks[p] == best]
        s.proposed = holders[0] if len(holders) == 1 else -1
        out = [b""] * s.degree
        for p in live:
            out[p] = b"\x01" if p == s.proposed else b"\x00"
        return s, out, None


def low_degree_edge_fraction(g: Graph) -> float:
    """Fraction of edges whose endpoints both have degree at most twice the mean."""
    if g.edge_count == 0:
        return 1.0
    d = 2 * g.edge_count / g.node_count
    deg = g.degrees
    e = g.edges
    return float(np.mean((deg[e[:, 0]] <= 2 * d) & (deg[e[:, 1]] <= 2 * d)))
