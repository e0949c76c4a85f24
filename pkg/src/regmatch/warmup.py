"""The poly(1/eps) matcher: degree sampling, then rounds of short augmenting paths.

Each phase of :func:`constant_match` enumerates all augmenting paths of
at most ``k`` nodes, treats them as hyperedges, computes a fractional
hypergraph matching, and rounds it with one random choice per node into
a set of vertex-disjoint paths that are flipped into the matching.

Randomness of the rounding step is keyed by ``(seed, phase, node)``.
Phases in which the matching does not change leave the hypergraph and
the fractional matching unchanged, so several such phases can be rounded
at once; the result is identical to running them one by one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.sparse as sp

from .errors import DomainError, NotAugmentingError, NotRegularError, ProbabilityOverflowError
from .graph import Graph
from .matching import Matching
from .rng import STREAM_ROUND, STREAM_SAMPLE, mix, unit_uniform

DEFAULT_PATH_CAP = 10**7
EPS_FM = Fraction(1, 2)
LOAD_TOL = 1e-9


@dataclass(frozen=True)
class WarmupParams:
    """Phase parameters derived from ``eps``.

    ``k_exact``, ``T_exact`` and ``tau_exact`` are the real-valued
    formulas; ``k`` is ``k_exact`` rounded up to an odd integer >= 3,
    ``T`` is ``ceil(T_exact)`` and ``tau = 1/(4k^2)`` uses the rounded ``k``.
    """

    eps: Fraction
    k_exact: Fraction
    T_exact: Fraction
    tau_exact: Fraction
    k: int
    T: int
    tau: Fraction

    @classmethod
    def from_eps(cls, eps) -> WarmupParams:
        e = Fraction(eps).limit_denominator(10**12) if isinstance(eps, float) else Fraction(eps)
        if not 0 < e < 1:
            raise DomainError(f"eps must lie in (0, 1), got {eps}")
        k_exact = 4 / e + 1
        T_exact = 10**4 / e**4 + 1
        tau_exact = 1 / (4 * k_exact**2)
        k = max(3, math.ceil(k_exact))
        if k % 2 == 0:
            k += 1
        return cls(e, k_exact, T_exact, tau_exact, k, math.ceil(T_exact), Fraction(1, 4 * k * k))


# --- sampling stage --------------------------------------------------------


def sample_subgraph(g: Graph, p: float, max_degree: float, seed: int) -> Graph:
    """Keep each edge with probability ``p``, then drop nodes of sampled degree > ``max_degree``.

    Node ids are unchanged; dropped nodes simply become isolated.
    """
    e = g.edges
    u = unit_uniform(mix(seed, STREAM_SAMPLE, np.arange(len(e), dtype=np.int64)))
    keep = u < p
    deg = np.bincount(e[keep].ravel(), minlength=g.node_count)
    ok = deg <= max_degree
    keep &= ok[e[:, 0]] & ok[e[:, 1]]
    return g.subgraph_edges(keep)


def sampling_stage(g: Graph, eps, seed: int = 0) -> tuple[Graph, int]:
    """Reduce a regular graph's degree to ``O(1/eps^4)``.

    If ``Delta <= 6000/eps^4`` the graph is returned untouched with
    ``d = Delta``.  Otherwise each edge is kept with probability
    ``p' = 3000/(Delta eps^4)`` and only nodes of sampled degree at most
    ``2 p' Delta`` keep their edges; ``d = floor(2 p' Delta)``.

    Raises:
        NotRegularError: if ``g`` is not regular.
        DomainError: if ``g`` has degree 0 or ``eps`` is outside (0, 1/2].
    """
    deg = g.degrees
    if g.node_count and deg.min() != deg.max():
        raise NotRegularError("sampling_stage needs a regular graph")
    delta = int(deg[0]) if g.node_count else 0
    if delta < 1:
        raise DomainError("sampling_stage needs degree at least 1")
    e = Fraction(eps).limit_denominator(10**12) if isinstance(eps, float) else Fraction(eps)
    if not 0 < e <= Fraction(1, 2):
        raise DomainError(f"eps must lie in (0, 1/2], got {eps}")
    if delta <= 6000 / e**4:
        return g, delta
    p = 3000 / (delta * e**4)
    cap = 2 * p * delta
    return sample_subgraph(g, float(p), float(cap), seed), math.floor(cap)


# --- hypergraph of augmenting paths ----------------------------------------


@dataclass
class Hypergraph:
    """Hyperedges are augmenting paths, stored as node tuples.

    Each path is stored starting from its smaller endpoint.  ``capped`` is
    set when enumeration stopped at the hyperedge cap.
    """

    node_count: int
    hyperedges: list[tuple[int, ...]]
    f_bound: int
    capped: bool = False
    _inc: tuple | None = field(default=None, repr=False)
    _mat: sp.csr_matrix | None = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.hyperedges)

    def incidence(self) -> tuple[np.ndarray, np.ndarray]:
        """``(nodes, owners)``: one row per (node, hyperedge) membership."""
        if self._inc is None:
            sizes = np.fromiter((len(p) for p in self.hyperedges), np.int64, len(self.hyperedges))
            nodes = np.fromiter((v for p in self.hyperedges for v in p), np.int64, int(sizes.sum()))
            owners = np.repeat(np.arange(len(self.hyperedges)), sizes)
            self._inc = (nodes, owners)
        return self._inc

    def matrix(self) -> sp.csr_matrix:
        """Hyperedge-by-node incidence matrix."""
        if self._mat is None:
            nodes, owners = self.incidence()
            data = np.ones(len(nodes))
            self._mat = sp.csr_matrix((data, (owners, nodes)), shape=(len(self.hyperedges), self.node_count))
        return self._mat

    def max_degree(self) -> int:
        nodes, _ = self.incidence()
        return int(np.bincount(nodes, minlength=self.node_count).max()) if len(nodes) else 0


def _paths_from(adj, mate, s: int, k: int, budget: int):
    """Augmenting paths from free root ``s`` ending at a larger free node.

    Returns ``(paths, touched, capped)`` where ``touched`` holds every node
    whose mate was read; the result depends on nothing else.
    """
    paths = []
    touched = {s}
    path = [s]
    on_path = {s}
    # one neighbour iterator per node pair on the path (plus the root)
    stack = [iter(adj[s])]
    while stack:
        nxt = next(stack[-1], None)
        if nxt is None:
            stack.pop()
            if len(path) > 1:
                on_path.discard(path.pop())
                on_path.discard(path.pop())
            continue
        if nxt in on_path:
            continue
        touched.add(nxt)
        w = mate[nxt]
        if w < 0:
            if nxt > s:
                paths.append(tuple(path) + (nxt,))
                if len(paths) >= budget:
                    return paths, touched, True
            continue
        touched.add(w)
        # extending needs room for the pair plus a final free node
        if w in on_path or len(path) + 3 > k:
            continue
        path.append(nxt)
        path.append(w)
        on_path.add(nxt)
        on_path.add(w)
        stack.append(iter(adj[w]))
    return paths, touched, False


class PathEnumerator:
    """Augmenting-path enumeration that reuses per-root results across matchings.

    The DFS from a root depends only on the mates of the nodes it read, so
    after an augmentation only roots that read a flipped node are redone.
    The output equals a fresh :func:`enumerate_augmenting_paths` call.
    """

    def __init__(self, g: Graph, k: int, cap: int = DEFAULT_PATH_CAP):
        self.g = g
        self.adj = g.adjacency()
        self.k = k
        self.cap = cap
        self._cache: dict[int, tuple[list, set]] = {}
        self._readers: dict[int, set[int]] = {}
        self._mate: np.ndarray | None = None

    def _drop(self, s: int) -> None:
        entry = self._cache.pop(s, None)
        if entry is not None:
            for v in entry[1]:
                self._readers[v].discard(s)

    def enumerate(self, m: Matching) -> Hypergraph:
        mate_arr = m.partner
        if self._mate is None:
            stale = set(range(self.g.node_count))
        else:
            changed = np.flatnonzero(mate_arr != self._mate).tolist()
            stale = set(changed)
            for v in changed:
                stale |= self._readers.get(v, set())
        self._mate = mate_arr.copy()
        for s in stale:
            self._drop(s)
        mate = mate_arr.tolist()
        paths: list[tuple[int, ...]] = []
        capped = False
        for s in range(self.g.node_count):
            if mate[s] >= 0 or not self.adj[s]:
                continue
            entry = self._cache.get(s)
            if entry is None:
                found, touched, hit = _paths_from(self.adj, mate, s, self.k, self.cap - len(paths))
                if hit:
                    paths.extend(found)
                    capped = True
                    break
                entry = (found, touched)
                self._cache[s] = entry
                for v in touched:
                    self._readers.setdefault(v, set()).add(s)
            paths.extend(entry[0])
            if len(paths) >= self.cap:
                del paths[self.cap:]
                capped = True
                break
        f = max((len(p) for p in paths), default=2)
        return Hypergraph(self.g.node_count, paths, f, capped)


def enumerate_augmenting_paths(g: Graph, m: Matching, k: int, cap: int = DEFAULT_PATH_CAP) -> Hypergraph:
    """All simple augmenting paths with at most ``k`` nodes, one per reversal pair.

    DFS from every free node in increasing id order.  A path alternates a
    non-matching edge, a matching edge, and so on, and ends at a free node.
    Each path is found from both endpoints; only the copy that starts at
    the smaller endpoint is kept.  ``capped`` is set (and the list cut at
    ``cap``) when there are at least ``cap`` paths.
    """
    return PathEnumerator(g, k, cap).enumerate(m)


# --- fractional hypergraph matching ----------------------------------------


@dataclass
class FractionalMatching:
    weights: np.ndarray

    @property
    def total(self) -> float:
        return float(self.weights.sum())

    def loads(self, h: Hypergraph) -> np.ndarray:
        nodes, owners = h.incidence()
        return np.bincount(nodes, weights=self.weights[owners], minlength=h.node_count)

    def is_valid(self, h: Hypergraph, tol: float = LOAD_TOL) -> bool:
        return bool(np.all(self.weights >= 0) and np.all(self.loads(h) <= 1 + tol))


def fractional_hypergraph_matching(h: Hypergraph, eps_fm=EPS_FM) -> FractionalMatching:
    """Raise-and-freeze fractional matching with total at least ``nu / (f + eps_fm)``.

    Every hyperedge starts at ``1 / maxdeg``.  Live weights are doubled
    (scaled less when doubling would push a node past load 1), and after
    each step every hyperedge touching a node of load at least
    ``f / (f + eps_fm)`` is frozen.  At the end each hyperedge has a
    saturated node, and the saturated nodes number at least ``nu``.
    """
    H = len(h.hyperedges)
    if H == 0:
        return FractionalMatching(np.zeros(0))
    f = h.f_bound
    sat = f / (f + float(eps_fm))
    A = h.matrix()
    At = A.T.tocsr()
    deg = np.asarray(A.sum(axis=0)).ravel()
    w = np.full(H, 1.0 / deg.max())
    live = np.ones(H, bool)
    while live.any():
        load = At @ w
        load_live = At @ np.where(live, w, 0.0)
        room = np.where(load_live > 0, (1.0 - (load - load_live)) / np.where(load_live > 0, load_live, 1.0), np.inf)
        factor = min(2.0, float(room.min()))
        w = np.where(live, w * factor, w)
        load = At @ w
        hot = load >= sat * (1 - 1e-12)
        frozen_now = (A @ hot.astype(float)) > 0
        newly = live & frozen_now
        if not newly.any() and factor <= 1.0:
            # numerically stuck at the cap: freeze what touches the fullest node
            newly = live & ((A @ (load >= load.max() * (1 - 1e-12)).astype(float)) > 0)
        live &= ~newly
    # guard against round-off pushing a load a hair above 1
    load = At @ w
    over = load.max()
    if over > 1:
        w = w / over
    return FractionalMatching(w)


# --- rounding ---------------------------------------------------------------


class _Rounder:
    """Per-node choice of one incident hyperedge with probability ``tau * x``."""

    def __init__(self, h: Hypergraph, x: FractionalMatching, tau):
        nodes, owners = h.incidence()
        order = np.lexsort((owners, nodes))
        self.nodes = nodes[order]
        self.owners = owners[order]
        p = float(tau) * x.weights[self.owners]
        self.involved, start = np.unique(self.nodes, return_index=True)
        seg = np.searchsorted(self.involved, self.nodes)
        cs = np.cumsum(p)
        before = np.concatenate([[0.0], cs])[start][seg]
        local = cs - before
        totals = np.bincount(seg, weights=p, minlength=len(self.involved))
        if len(totals) and totals.max() > 1 + 1e-12:
            raise ProbabilityOverflowError(f"tau * incident weight reaches {totals.max():.6g} > 1")
        self.key = seg + local  # strictly increasing segment by segment
        self.seg = seg
        self.H = len(h.hyperedges)
        self.A = h.matrix()[:, self.involved].tocsr() if self.H else None
        self.At = self.A.T.tocsr() if self.H else None

    def choices(self, seed: int, phases: np.ndarray) -> np.ndarray:
        """``(len(phases), len(involved))`` chosen hyperedge ids, -1 for no choice."""
        P = len(phases)
        V = len(self.involved)
        if V == 0:
            return np.full((P, 0), -1, np.int64)
        u = unit_uniform(mix(seed, STREAM_ROUND, phases[:, None], self.involved[None, :]))
        q = np.arange(V)[None, :] + u
        pos = np.searchsorted(self.key, q.ravel(), side="right").reshape(P, V)
        pos_c = np.minimum(pos, len(self.key) - 1)
        hit = (pos < len(self.key)) & (self.seg[pos_c] == np.arange(V)[None, :])
        return np.where(hit, self.owners[pos_c], -1)

    def kept(self, seed: int, phases: np.ndarray) -> np.ndarray:
        """``(len(phases), H)`` boolean mask of hyperedges kept in each phase."""
        ch = self.choices(seed, phases)
        P = len(phases)
        chosen = np.zeros((P, self.H), bool)
        rows, cols = np.nonzero(ch >= 0)
        chosen[rows, ch[rows, cols]] = True
        if self.H == 0:
            return chosen
        # claims[b, v]: number of distinct chosen hyperedges containing node v
        claims = np.asarray(self.At @ chosen.T.astype(float)).T
        contested = (claims > 1.5).astype(float)
        blocked = np.asarray(self.A @ contested.T).T > 0
        return chosen & ~blocked


def round_fractional(h: Hypergraph, x: FractionalMatching, tau, seed: int = 0, phase: int = 0) -> list[tuple[int, ...]]:
    """Round ``x`` to vertex-disjoint hyperedges.

    Every node ``v`` picks an incident hyperedge ``P`` with probability
    ``tau * x(P)`` (or nothing).  ``P`` is kept iff some node picked it and
    no node picked a different hyperedge that meets ``P``.

    Raises:
        ProbabilityOverflowError: if ``tau`` times some node's incident
            weight exceeds 1.
    """
    r = _Rounder(h, x, tau)
    mask = r.kept(seed, np.array([phase], dtype=np.int64))[0]
    return [h.hyperedges[i] for i in np.flatnonzero(mask)]


# --- augmentation -----------------------------------------------------------


def augment(m: Matching, paths, g: Graph | None = None) -> Matching:
    """Flip vertex-disjoint augmenting paths into ``m``.

    Raises:
        NotAugmentingError: if a path repeats a node, overlaps another
            path, has a matched endpoint, fails to alternate, or (when
            ``g`` is given) uses a non-edge.
    """
    partner = m.partner.copy()
    used: set[int] = set()
    for p in paths:
        p = list(p)
        if len(p) < 2 or len(p) % 2:
            raise NotAugmentingError(f"path {p} has an odd number of nodes")
        if len(set(p)) != len(p) or used.intersection(p):
            raise NotAugmentingError(f"path {p} repeats a node or meets another path")
        used.update(p)
        if m.partner[p[0]] >= 0 or m.partner[p[-1]] >= 0:
            raise NotAugmentingError(f"path {p} has a matched endpoint")
        for i in range(1, len(p) - 1, 2):
            if m.partner[p[i]] != p[i + 1]:
                raise NotAugmentingError(f"path {p} does not alternate at {p[i]}-{p[i + 1]}")
        if g is not None:
            pairs = np.array(list(zip(p[:-1], p[1:])))
            if np.any(g.edge_ids(pairs) < 0):
                raise NotAugmentingError(f"path {p} uses a non-edge")
        for i in range(0, len(p), 2):
            partner[p[i]] = p[i + 1]
            partner[p[i + 1]] = p[i]
    return Matching.from_partner(partner)


# --- ConstantMatch ----------------------------------------------------------


@dataclass
class ConstantMatchReport:
    matching: Matching
    params: WarmupParams
    phases_run: int
    stopped_early: bool
    cap_triggered: bool
    history: list = field(default_factory=list)  # (phase, size) after each change
    hyperedge_counts: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "matching_size": self.matching.size,
            "k": self.params.k,
            "T": self.params.T,
            "tau": str(self.params.tau),
            "phases_run": self.phases_run,
            "stopped_early": self.stopped_early,
            "cap_triggered": self.cap_triggered,
            "max_hyperedges": max(self.hyperedge_counts, default=0),
        }


def constant_match_report(
    g: Graph,
    eps,
    seed: int = 0,
    path_cap: int = DEFAULT_PATH_CAP,
    max_phases: int | None = None,
    lookahead: int = 1024,
    params: WarmupParams | None = None,
) -> ConstantMatchReport:
    """Run ConstantMatch and report per-phase progress.

    The loop stops before ``T`` phases once no augmenting path with at
    most ``k`` nodes remains, since every later phase would be a no-op.
    If enumeration hits ``path_cap`` the phase is aborted, ``cap_triggered``
    is set and the loop ends (the next phase would see the same matching).
    """
    prm = params if params is not None else WarmupParams.from_eps(eps)
    T = prm.T if max_phases is None else min(prm.T, max_phases)
    m = Matching.empty(g.node_count)
    rep = ConstantMatchReport(m, prm, 0, False, False)
    enum = PathEnumerator(g, prm.k, path_cap)
    i = 1
    rounder = None
    while i <= T:
        if rounder is None:
            h = enum.enumerate(m)
            width = 4
            rep.hyperedge_counts.append(len(h))
            if h.capped:
                rep.cap_triggered = True
                rep.phases_run = i
                break
            if len(h) == 0:
                rep.stopped_early = True
                rep.phases_run = i - 1
                break
            x = fractional_hypergraph_matching(h)
            rounder = _Rounder(h, x, prm.tau)
        # look ahead over a window that grows while no phase changes M
        batch = np.arange(i, min(T, i + width - 1) + 1, dtype=np.int64)
        kept = rounder.kept(seed, batch)
        hit = np.flatnonzero(kept.any(axis=1))
        if len(hit) == 0:
            i = int(batch[-1]) + 1
            width = min(2 * width, lookahead)
            continue
        b = int(hit[0])
        paths = [h.hyperedges[j] for j in np.flatnonzero(kept[b])]
        m = augment(m, paths)
        i = int(batch[b])
        rep.history.append((i, m.size))
        rounder = None
        i += 1
    else:
        rep.phases_run = T
    rep.matching = m
    return rep


def constant_match(g: Graph, eps, seed: int = 0, path_cap: int = DEFAULT_PATH_CAP, max_phases: int | None = None) -> Matching:
    """ConstantMatch: ``T`` phases of enumerate, fractional match, round, augment."""
    return constant_match_report(g, eps, seed, path_cap, max_phases).matching


@dataclass
class WarmupReport:
    matching: Matching
    sampled_graph: Graph
    d: int
    inner: ConstantMatchReport


def warmup_full(g: Graph, eps, seed: int = 0, inner_eps=None, path_cap: int = DEFAULT_PATH_CAP,
                max_phases: int | None = None) -> WarmupReport:
    """Sampling stage followed by ConstantMatch, both at accuracy ``eps/8``.

    ``inner_eps`` overrides the accuracy handed to ConstantMatch; path
    enumeration with ``k = 4/(eps/8) + 1`` is infeasible for most ``eps``,
    so experiments typically pass a larger value here.
    """
    e = Fraction(eps).limit_denominator(10**12) if isinstance(eps, float) else Fraction(eps)
    g2, d = sampling_stage(g, e / 8, seed)
    inner = e / 8 if inner_eps is None else inner_eps
    rep = constant_match_report(g2, inner, seed, path_cap, max_phases)
    return WarmupReport(rep.matching, g2, d, rep)
