"""Graph representation, regular-graph generators and structural checks.

Graphs are immutable, simple and undirected, with dense node ids
``0..n-1``.  Edges are stored canonically (``u < v``, lexicographically
sorted) so that an edge id is simply a row index into ``Graph.edges``.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import TYPE_CHECKING, Iterable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import ConstructionError, DomainError, InvalidMatchingError, NotBipartiteError, ParityError

if TYPE_CHECKING:
    from .matching import Matching

LEFT, RIGHT = 0, 1


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable simple undirected graph.

    Attributes:
        node_count: number of nodes ``n``; ids are ``0..n-1``.
        edges: ``(m, 2)`` int64 array, each row ``(u, v)`` with ``u < v``.
        side: optional per-node bipartition label (``0`` = L, ``1`` = R).
        origin: optional map from this graph's node ids to the ids of the
            graph it was derived from (set by :func:`remove_matched`).
    """

    node_count: int
    edges: np.ndarray
    side: np.ndarray | None = None
    origin: np.ndarray | None = None
    indptr: np.ndarray = field(init=False, repr=False)
    indices: np.ndarray = field(init=False, repr=False)
    incident: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        n = self.node_count
        e = self.edges
        m = len(e)
        heads = np.concatenate([e[:, 0], e[:, 1]]) if m else np.zeros(0, np.int64)
        tails = np.concatenate([e[:, 1], e[:, 0]]) if m else np.zeros(0, np.int64)
        eids = np.concatenate([np.arange(m), np.arange(m)]) if m else np.zeros(0, np.int64)
        order = np.argsort(heads * max(n, 1) + tails)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(heads, minlength=n), out=indptr[1:])
        for name, value in (("indptr", indptr), ("indices", tails[order]), ("incident", eids[order])):
            value.setflags(write=False)
            object.__setattr__(self, name, value)
        e.setflags(write=False)
        if self.side is not None:
            self.side.setflags(write=False)

    @classmethod
    def from_edges(
        cls,
        n: int,
        edges: Iterable[Sequence[int]] | np.ndarray,
        side: Sequence[int] | np.ndarray | None = None,
        origin: np.ndarray | None = None,
    ) -> Graph:
        """Build a graph, canonicalizing and validating the edge list.

        Raises:
            ValueError: on self-loops, parallel edges, out-of-range ids, or
                (when ``side`` is given) an edge inside one side.
        """
        arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
        arr = arr.reshape(-1, 2)
        if len(arr) and (arr.min() < 0 or arr.max() >= n):
            raise ValueError("edge endpoint out of range")
        if np.any(arr[:, 0] == arr[:, 1]):
            raise ValueError("self-loop")
        lo = np.minimum(arr[:, 0], arr[:, 1])
        hi = np.maximum(arr[:, 0], arr[:, 1])
        keys = np.sort(lo * max(n, 1) + hi)
        if len(keys) > 1 and np.any(keys[1:] == keys[:-1]):
            raise ValueError("parallel edge")
        arr = np.stack([keys // max(n, 1), keys % max(n, 1)], axis=1) if len(keys) else arr
        side_arr = None
        if side is not None:
            side_arr = np.asarray(side, dtype=np.int8).copy()
            if side_arr.shape != (n,) or np.any((side_arr != 0) & (side_arr != 1)):
                raise ValueError("side must hold one label in {0, 1} per node")
            if len(arr) and np.any(side_arr[arr[:, 0]] == side_arr[arr[:, 1]]):
                raise ValueError("edge does not cross the bipartition")
        return cls(int(n), np.ascontiguousarray(arr), side_arr, origin)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def max_degree(self) -> int:
        return int(self.degrees.max()) if self.node_count else 0

    def neighbors(self, u: int) -> np.ndarray:
        return self.indices[self.indptr[u] : self.indptr[u + 1]]

    def incident_edges(self, u: int) -> np.ndarray:
        return self.incident[self.indptr[u] : self.indptr[u + 1]]

    def adjacency(self) -> list[list[int]]:
        """Per-node sorted neighbor lists as plain Python lists."""
        return [self.neighbors(u).tolist() for u in range(self.node_count)]

    def edge_keys(self) -> np.ndarray:
        """Sorted ``u * n + v`` keys of all edges; used for membership tests."""
        return self.edges[:, 0] * self.node_count + self.edges[:, 1]

    def edge_ids(self, pairs: np.ndarray) -> np.ndarray:
        """Edge id of each ``(u, v)`` row of ``pairs``, or -1 if absent."""
        pairs = np.sort(np.asarray(pairs, dtype=np.int64).reshape(-1, 2), axis=1)
        keys = self.edge_keys()
        q = pairs[:, 0] * self.node_count + pairs[:, 1]
        if not len(keys):
            return np.full(len(q), -1, np.int64)
        pos = np.minimum(np.searchsorted(keys, q), len(keys) - 1)
        return np.where(keys[pos] == q, pos, -1)

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.edge_ids(np.array([[u, v]]))[0] >= 0)

    def ball(self, u: int, radius: int) -> dict[int, int]:
        """Nodes within ``radius`` hops of ``u`` mapped to their distance."""
        dist = {u: 0}
        frontier = [u]
        for d in range(1, radius + 1):
            nxt = []
            for x in frontier:
                for y in self.neighbors(x).tolist():
                    if y not in dist:
                        dist[y] = d
                        nxt.append(y)
            frontier = nxt
        return dist

    def spheres(self, u: int, radius: int) -> list[set[int]]:
        """``[N^0(u), N^1(u), ..., N^radius(u)]`` (nodes at exact distance)."""
        out: list[set[int]] = [set() for _ in range(radius + 1)]
        for x, d in self.ball(u, radius).items():
            out[d].add(x)
        return out

    def subgraph_edges(self, keep: np.ndarray) -> Graph:
        """Same node set, only the edges selected by boolean mask ``keep``."""
        return Graph(self.node_count, np.ascontiguousarray(self.edges[keep]), self.side, self.origin)


@dataclass(frozen=True)
class DegreeReport:
    node_count: int
    edge_count: int
    min_degree: Fraction
    max_degree: Fraction
    mean_degree: Fraction
    is_regular: bool
    regular_degree: int | None
    is_bipartite: bool
    degree_histogram: dict[int, int]

    def as_dict(self) -> dict:
        return {
            "node_count": self.node_count,
            "edge_count": self.edge_count,
            "min_degree": int(self.min_degree),
            "max_degree": int(self.max_degree),
            "mean_degree": str(self.mean_degree),
            "is_regular": self.is_regular,
            "regular_degree": self.regular_degree,
            "is_bipartite": self.is_bipartite,
            "degree_histogram": {str(k): v for k, v in sorted(self.degree_histogram.items())},
        }


def two_coloring(g: Graph) -> np.ndarray | None:
    """A proper 2-coloring of ``g`` (int8 array), or None if ``g`` has an odd cycle.

    Uses the bipartite double cover: ``g`` is bipartite iff no node shares a
    connected component with its own mirror copy.
    """
    n = g.node_count
    if n == 0:
        return np.zeros(0, np.int8)
    u, v = g.edges[:, 0], g.edges[:, 1]
    rows = np.concatenate([u, v + n, v, u + n])
    cols = np.concatenate([v + n, u, u + n, v])
    cover = coo_matrix((np.ones(len(rows), np.int8), (rows, cols)), shape=(2 * n, 2 * n)).tocsr()
    _, labels = connected_components(cover, directed=False)
    if np.any(labels[:n] == labels[n:]):
        return None
    return (labels[:n] > labels[n:]).astype(np.int8)


def validate(g: Graph) -> DegreeReport:
    deg = g.degrees
    n = g.node_count
    if n:
        lo, hi = int(deg.min()), int(deg.max())
        mean = Fraction(int(deg.sum()), n)
    else:
        lo = hi = 0
        mean = Fraction(0)
    values, counts = np.unique(deg, return_counts=True)
    hist = {int(d): int(c) for d, c in zip(values, counts)}
    regular = lo == hi
    return DegreeReport(
        node_count=n,
        edge_count=g.edge_count,
        min_degree=Fraction(lo),
        max_degree=Fraction(hi),
        mean_degree=mean,
        is_regular=regular,
        regular_degree=lo if regular and n else None,
        is_bipartite=two_coloring(g) is not None,
        degree_histogram=hist,
    )


def with_sides(g: Graph) -> Graph:
    """Return ``g`` carrying side labels, deriving them by 2-coloring if absent."""
    if g.side is not None:
        return g
    colors = two_coloring(g)
    if colors is None:
        raise NotBipartiteError("graph contains an odd cycle")
    return Graph(g.node_count, g.edges, colors, g.origin)


class _PairSet:
    """Set of (left, right) pairs on an ``n x n`` grid; bitset when it fits."""

    def __init__(self, n: int):
        self.n = n
        self.bits = np.zeros((n, (n + 7) // 8), np.uint8) if n <= 1 << 15 else None
        self.keys: set[int] = set()

    def contains(self, left: np.ndarray, right: np.ndarray) -> np.ndarray:
        if self.bits is not None:
            return ((self.bits[left, right >> 3] >> (right & 7).astype(np.uint8)) & 1).astype(bool)
        n = self.n
        return np.fromiter(((int(a) * n + int(b)) in self.keys for a, b in zip(left, right)), bool, len(left))

    def add(self, left: np.ndarray, right: np.ndarray) -> None:
        if self.bits is not None:
            # rows are distinct within one call, so fancy-index |= is safe
            self.bits[left, right >> 3] |= (np.uint8(1) << (right & 7).astype(np.uint8))
        else:
            self.keys.update((left * self.n + right).tolist())


def gen_regular_bipartite(
    n_side: int, delta: int, seed: int, retry_cap: int = 1000, swap_tries: int = 64
) -> Graph:
    """Random ``delta``-regular bipartite graph with ``n_side`` nodes per side.

    The graph is the union of ``delta`` random permutations of ``[n_side]``.
    A permutation that would create a parallel edge is repaired by random
    transpositions; if repair fails, the permutation is redrawn, up to
    ``retry_cap`` times per slot.  When ``delta > n_side / 2`` the graph is
    instead the complement, inside ``K_{n_side,n_side}``, of a random
    ``(n_side - delta)``-regular draw.

    Left nodes are ``0..n_side-1`` (side 0), right nodes ``n_side..2*n_side-1``.

    Raises:
        DomainError: if ``delta > n_side`` or either is negative.
        ConstructionError: if some slot exhausts its retries, which happens
            when ``delta`` is too close to ``n_side``.
    """
    if n_side < 0 or delta < 0 or delta > max(n_side, 0):
        raise DomainError(f"need 0 <= delta <= n_side, got n_side={n_side}, delta={delta}")
    n = n_side
    if 2 * delta > n:
        # dense case: complement of a sparse draw inside K_{n,n}
        sparse = gen_regular_bipartite(n, n - delta, seed, retry_cap, swap_tries)
        full = np.ones((n, n), bool)
        full[sparse.edges[:, 0], sparse.edges[:, 1] - n] = False
        lu, rv = np.nonzero(full)
        side = np.repeat(np.array([LEFT, RIGHT], np.int8), n)
        return Graph.from_edges(2 * n, np.stack([lu, rv + n], axis=1), side)
    rng = np.random.default_rng(int(seed) & ((1 << 64) - 1))
    used = _PairSet(n)
    left = np.arange(n)
    slots = []
    for _ in range(delta):
        for _attempt in range(retry_cap):
            perm = rng.permutation(n)
            if _repair_permutation(perm, used, rng, swap_tries):
                break
        else:
            raise ConstructionError(f"slot retry cap {retry_cap} exhausted (delta={delta} too close to n_side={n})")
        used.add(left, perm)
        slots.append(perm)
    if delta:
        lefts = np.tile(left, delta)
        rights = np.concatenate(slots) + n
        edges = np.stack([lefts, rights], axis=1)
    else:
        edges = np.zeros((0, 2), np.int64)
    side = np.repeat(np.array([LEFT, RIGHT], np.int8), n)
    return Graph.from_edges(2 * n, edges, side)


def _repair_permutation(perm: np.ndarray, used: _PairSet, rng: np.random.Generator, swap_tries: int) -> bool:
    """Remove clashes with ``used`` by random transpositions, in place.

    Each pass proposes one random partner per clashing position and applies
    every proposal that creates no new clash and touches no position used
    by another proposal of the same pass.
    """
    n = len(perm)
    idx = np.arange(n)
    for _ in range(swap_tries):
        bad = np.flatnonzero(used.contains(idx, perm))
        if len(bad) == 0:
            return True
        partners = rng.integers(0, n, size=len(bad))
        ok = partners != bad
        ok &= ~used.contains(bad, perm[partners])
        ok &= ~used.contains(partners, perm[bad])
        i, j = bad[ok], partners[ok]
        hits = np.bincount(np.concatenate([i, j]), minlength=n)
        solo = (hits[i] == 1) & (hits[j] == 1)
        i, j = i[solo], j[solo]
        perm[i], perm[j] = perm[j], perm[i].copy()
    return not used.contains(idx, perm).any()


def gen_regular_general(n: int, delta: int, seed: int, retry_cap: int = 10000, switch_tries: int = 100) -> Graph:
    """Random simple ``delta``-regular graph on ``n`` nodes (configuration model).

    Stubs are paired uniformly; loops and parallel edges are then removed by
    degree-preserving double-edge switches.  If switching gets stuck, the
    whole pairing is redrawn (at most ``retry_cap`` times).

    Raises:
        ParityError: if ``n * delta`` is odd.
        DomainError: if ``delta >= n`` (with ``n > 0``).
        ConstructionError: on retry exhaustion.
    """
    if (n * delta) % 2:
        raise ParityError(f"n * delta must be even, got n={n}, delta={delta}")
    if n < 0 or delta < 0 or (n > 0 and delta >= n):
        raise DomainError(f"need 0 <= delta < n, got n={n}, delta={delta}")
    rng = np.random.default_rng(int(seed) & ((1 << 64) - 1))
    if delta == 0:
        return Graph.from_edges(n, np.zeros((0, 2), np.int64))
    stubs = np.repeat(np.arange(n), delta)
    for _ in range(retry_cap):
        pairs = rng.permutation(stubs).reshape(-1, 2)
        pairs.sort(axis=1)
        if _switch_to_simple(pairs, rng, switch_tries):
            return Graph.from_edges(n, pairs)
    raise ConstructionError(f"retry cap {retry_cap} exhausted for n={n}, delta={delta}")


def _switch_to_simple(pairs: np.ndarray, rng: np.random.Generator, tries: int) -> bool:
    counts: dict[tuple[int, int], int] = {}
    for a, b in pairs.tolist():
        counts[(a, b)] = counts.get((a, b), 0) + 1
    m = len(pairs)

    def is_bad(a: int, b: int) -> bool:
        return a == b or counts[(a, b)] > 1

    bad = [i for i, (a, b) in enumerate(pairs.tolist()) if is_bad(a, b)]
    while bad:
        i = bad.pop()
        a, b = pairs[i]
        a, b = int(a), int(b)
        if not is_bad(a, b):
            continue
        for _ in range(tries):
            j = int(rng.integers(m))
            c, d = int(pairs[j, 0]), int(pairs[j, 1])
            if rng.random() < 0.5:
                c, d = d, c
            e1, e2 = tuple(sorted((a, c))), tuple(sorted((b, d)))
            if j == i or e1[0] == e1[1] or e2[0] == e2[1] or e1 == e2:
                continue
            if counts.get(e1, 0) or counts.get(e2, 0):
                continue
            for old in ((a, b), tuple(sorted((c, d)))):
                counts[old] -= 1
                if not counts[old]:
                    del counts[old]
            counts[e1] = 1
            counts[e2] = 1
            pairs[i] = e1
            pairs[j] = e2
            break
        else:
            return False
    return True


def classify_alpha_regular(g: Graph, alpha, delta: int) -> set[int]:
    """Nodes ``u`` whose closed 2-hop ball has all degrees in ``[delta(1-alpha), delta(1+alpha)]``."""
    mask = alpha_regular_mask(g.node_count, g.edges[:, 0], g.edges[:, 1], g.degrees, alpha, delta)
    return set(np.flatnonzero(mask).tolist())


def degree_window(alpha, delta) -> tuple[int, int]:
    """Integer degree range ``[ceil(delta(1-alpha)), floor(delta(1+alpha))]``, exactly."""
    a = Fraction(alpha)
    d = Fraction(delta)
    return math.ceil(d * (1 - a)), math.floor(d * (1 + a))


def alpha_regular_mask(
    n: int, eu: np.ndarray, ev: np.ndarray, deg: np.ndarray, alpha, delta, nodes: np.ndarray | None = None
) -> np.ndarray:
    """Vectorized (alpha, delta)-regularity test over an edge list.

    ``nodes`` optionally restricts the candidate set (e.g. to unmatched
    nodes); nodes outside it are reported as not regular.
    """
    lo, hi = degree_window(alpha, delta)
    bad = (deg < lo) | (deg > hi)
    for _ in range(2):
        spread = bad.copy()
        spread[eu[bad[ev]]] = True
        spread[ev[bad[eu]]] = True
        bad = spread
    ok = ~bad
    if nodes is not None:
        ok &= nodes
    return ok


def remove_matched(g: Graph, m: "Matching") -> Graph:
    """Induced subgraph on the nodes left unmatched by ``m``.

    Node ids are compacted; ``result.origin[new] == old``.  Use
    :func:`old_to_new` to invert the map.

    Raises:
        InvalidMatchingError: if ``m`` is not a matching in ``g``.
    """
    from .matching import check_matching

    check_matching(g, m.edges)
    keep = np.ones(g.node_count, bool)
    if len(m.edges):
        keep[m.edges.ravel()] = False
    return induced_subgraph(g, keep)


def induced_subgraph(g: Graph, keep: np.ndarray) -> Graph:
    new_id = np.full(g.node_count, -1, np.int64)
    kept = np.flatnonzero(keep)
    new_id[kept] = np.arange(len(kept))
    e = g.edges
    alive = keep[e[:, 0]] & keep[e[:, 1]] if len(e) else np.zeros(0, bool)
    edges = new_id[e[alive]]
    side = g.side[kept] if g.side is not None else None
    origin = g.origin[kept] if g.origin is not None else kept
    return Graph.from_edges(len(kept), edges, side, origin)


def old_to_new(g: Graph, parent_node_count: int) -> np.ndarray:
    """Inverse of ``g.origin``: parent id -> id in ``g`` (-1 if removed)."""
    out = np.full(parent_node_count, -1, np.int64)
    if g.origin is not None:
        out[g.origin] = np.arange(g.node_count)
    return out


# small named families, mostly for tests and demos

def path_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def complete_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def complete_bipartite(a: int, b: int) -> Graph:
    side = [LEFT] * a + [RIGHT] * b
    return Graph.from_edges(a + b, [(i, a + j) for i in range(a) for j in range(b)], side)


def star_graph(leaves: int) -> Graph:
    return complete_bipartite(1, leaves)


def disjoint_edges(k: int) -> Graph:
    return Graph.from_edges(2 * k, [(2 * i, 2 * i + 1) for i in range(k)])


def petersen_graph() -> Graph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return Graph.from_edges(10, outer + spokes + inner)


def read_edge_list(path: str | os.PathLike) -> Graph:
    """Load the text edge-list format: header ``n m [bipartite]``, then ``u v`` lines."""
    with open(path) as fh:
        lines = [ln.split("#", 1)[0].strip() for ln in fh]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise ValueError(f"{path}: empty edge-list file")
    header = lines[0].split()
    if len(header) not in (2, 3) or (len(header) == 3 and header[2] != "bipartite"):
        raise ValueError(f"{path}: bad header {lines[0]!r}")
    n, m = int(header[0]), int(header[1])
    rows = [tuple(int(t) for t in ln.split()) for ln in lines[1:]]
    if len(rows) != m or any(len(r) != 2 for r in rows):
        raise ValueError(f"{path}: expected {m} edge lines of two ids")
    g = Graph.from_edges(n, rows)
    if len(header) == 3:
        g = with_sides(g)
    return g


def write_edge_list(g: Graph, path: str | os.PathLike) -> None:
    header = f"{g.node_count} {g.edge_count}" + (" bipartite" if g.side is not None else "")
    body = "\n".join(f"{u} {v}" for u, v in g.edges.tolist())
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        fh.write(header + "\n" + body + ("\n" if body else ""))
    os.replace(tmp, path)
