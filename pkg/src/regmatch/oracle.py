"""Exact maximum matchings and reference bounds used to score the algorithms."""

from __future__ import annotations

import sys
from collections import deque
from fractions import Fraction
from itertools import combinations

import numpy as np

from .errors import DomainError, NotBipartiteError, TooLargeError
from .graph import Graph, two_coloring
from .matching import Matching

EXACT_NODE_LIMIT = 64


def _sides(g: Graph) -> np.ndarray:
    if g.side is not None:
        return np.asarray(g.side)
    col = two_coloring(g)
    if col is None:
        raise NotBipartiteError("graph has an odd cycle")
    return col


def max_matching_bipartite(g: Graph) -> Matching:
    """Maximum-cardinality matching of a bipartite graph (Hopcroft-Karp).

    Phases alternate a BFS that layers the graph from all free left nodes
    with DFS passes that augment along vertex-disjoint shortest paths.

    Raises:
        NotBipartiteError: if ``g`` has no side labels and is not 2-colourable.
    """
    side = _sides(g)
    n = g.node_count
    adj = g.adjacency()
    left = [u for u in range(n) if side[u] == 0 and adj[u]]
    mate = [-1] * n
    inf = sys.maxsize

    while True:
        dist = {}
        q = deque()
        for u in left:
            if mate[u] < 0:
                dist[u] = 0
                q.append(u)
        found = inf
        while q:
            u = q.popleft()
            if dist[u] >= found:
                continue
            for v in adj[u]:
                w = mate[v]
                if w < 0:
                    found = min(found, dist[u] + 1)
                elif w not in dist:
                    dist[w] = dist[u] + 1
                    q.append(w)
        if found == inf:
            break
        # iterative DFS along the layering; the right node through which a
        # left node w was entered is always mate[w], which makes the flip easy
        ptr = [0] * n
        for root in left:
            if mate[root] >= 0:
                continue
            stack = [root]
            while stack:
                u = stack[-1]
                if ptr[u] == len(adj[u]):
                    dist[u] = inf
                    stack.pop()
                    continue
                v = adj[u][ptr[u]]
                ptr[u] += 1
                w = mate[v]
                if w < 0:
                    if dist[u] + 1 != found:
                        continue
                    for x in reversed(stack):
                        v, mate[x] = mate[x], v
                        mate[mate[x]] = x
                    break
                if dist.get(w, inf) == dist[u] + 1:
                    stack.append(w)
    partner = np.array(mate, dtype=np.int64)
    return Matching.from_partner(partner)


def vertex_cover(g: Graph, m: Matching) -> np.ndarray:
    """Koenig vertex cover built from a maximum matching; boolean mask.

    Nodes reachable from free left nodes by alternating paths are ``Z``;
    the cover is ``(L - Z) | (R & Z)``.  It has size ``|m|`` exactly when
    ``m`` is maximum.
    """
    side = _sides(g)
    n = g.node_count
    adj = g.adjacency()
    mate = m.partner
    seen = np.zeros(n, bool)
    q = deque(u for u in range(n) if side[u] == 0 and mate[u] < 0)
    for u in q:
        seen[u] = True
    while q:
        u = q.popleft()
        if side[u] == 0:
            for v in adj[u]:
                if not seen[v] and mate[u] != v:
                    seen[v] = True
                    q.append(v)
        else:
            w = mate[u]
            if w >= 0 and not seen[w]:
                seen[w] = True
                q.append(w)
    left = side == 0
    return (left & ~seen) | (~left & seen)


def is_vertex_cover(g: Graph, cover: np.ndarray) -> bool:
    e = g.edges
    return bool(np.all(cover[e[:, 0]] | cover[e[:, 1]])) if len(e) else True


def max_matching_exact_small(g: Graph) -> int:
    """Maximum matching size of any graph with at most 64 nodes.

    Memoized search over bitmasks of still-available nodes, solved one
    connected component at a time.  Within a component the node ``v`` of
    least available degree is always matched: if some maximum matching
    missed ``v``, swapping the edge at one of its neighbours for that
    neighbour's edge to ``v`` keeps the size.  The search stops early
    once a component reaches ``floor(size / 2)``.

    Raises:
        TooLargeError: if ``g`` has more than 64 nodes.
    """
    n = g.node_count
    if n > EXACT_NODE_LIMIT:
        raise TooLargeError(f"{n} nodes exceeds the exact-search limit of {EXACT_NODE_LIMIT}")
    nbr = [0] * n
    for a, b in g.edges.tolist():
        nbr[a] |= 1 << b
        nbr[b] |= 1 << a
    memo: dict[int, int] = {}

    def bits(mask: int):
        while mask:
            low = mask & -mask
            yield low.bit_length() - 1
            mask ^= low

    def component(mask: int, start: int) -> int:
        comp = frontier = 1 << start
        while frontier:
            nxt = 0
            for v in bits(frontier):
                nxt |= nbr[v]
            frontier = nxt & mask & ~comp
            comp |= frontier
        return comp

    def best(mask: int) -> int:
        total = 0
        while mask:
            v = (mask & -mask).bit_length() - 1
            comp = component(mask, v)
            mask &= ~comp
            if comp & (comp - 1):
                total += solve(comp)
        return total

    def solve(comp: int) -> int:
        if comp in memo:
            return memo[comp]
        bound = comp.bit_count() // 2
        v = min(bits(comp), key=lambda x: (nbr[x] & comp).bit_count())
        rest = comp & ~(1 << v)
        out = 0
        for w in bits(nbr[v] & rest):
            out = max(out, 1 + best(rest & ~(1 << w)))
            if out == bound:
                break
        memo[comp] = out
        return out

    return best((1 << n) - 1)


def folklore_bound(n: int, tau_e, tau_v, kappa, D) -> Fraction:
    """``(1 - tau_e - tau_v - 2 kappa - 1/(D+1)) n / 2``, clamped below at 0.

    Raises:
        DomainError: if a slack is outside [0, 1/2) or ``D < 1``.
    """
    te, tv, ka, d = (Fraction(x) for x in (tau_e, tau_v, kappa, D))
    for name, val in (("tau_e", te), ("tau_v", tv), ("kappa", ka)):
        if not 0 <= val < Fraction(1, 2):
            raise DomainError(f"{name} must lie in [0, 1/2), got {val}")
    if d < 1:
        raise DomainError(f"D must be at least 1, got {d}")
    if n < 0:
        raise DomainError(f"n must be non-negative, got {n}")
    val = (1 - te - tv - 2 * ka - 1 / (d + 1)) * Fraction(n, 2)
    return max(val, Fraction(0))


def approx_ratio(m: Matching | int, opt: int) -> Fraction:
    """``opt / |m|``; 1 when both are zero.

    Raises:
        ZeroDivisionError: if ``|m| == 0 < opt``.
    """
    size = m if isinstance(m, int) else m.size
    if size == 0:
        if opt == 0:
            return Fraction(1)
        raise ZeroDivisionError(f"empty matching against optimum {opt}")
    return Fraction(opt, size)


def fractional_point(g: Graph, d_plus: int | None = None) -> Fraction:
    """The uniform edge weight ``1/(D_+ + 1)`` with ``D_+`` the max degree by default."""
    d = g.max_degree if d_plus is None else d_plus
    return Fraction(1, d + 1)


def degree_constraints_hold(g: Graph, x: Fraction) -> bool:
    """Every node's incident weight is at most 1 under uniform weight ``x``."""
    return bool(g.node_count == 0 or x * g.max_degree <= 1)


def odd_set_violations(g: Graph, x: Fraction, max_size: int = 9) -> list[tuple[int, ...]]:
    """Odd node sets ``S`` (``|S| <= max_size``) with ``x |E(S)| > (|S| - 1)/2``."""
    n = g.node_count
    nbr = [0] * n
    for a, b in g.edges.tolist():
        nbr[a] |= 1 << b
    bad = []
    for size in range(3, min(max_size, n) + 1, 2):
        limit = Fraction(size - 1, 2)
        for s in combinations(range(n), size):
            mask = 0
            for v in s:
                mask |= 1 << v
            inside = sum(bin(nbr[v] & mask).count("1") for v in s)
            if x * inside > limit:
                bad.append(s)
    return bad
