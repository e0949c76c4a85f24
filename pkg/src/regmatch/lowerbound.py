"""Gadget families for round lower bounds, and an adversary harness.

Three families of bipartite regular graphs are built from gadgets that an
``r``-round algorithm cannot orient from their innermost nodes:

* ``cycle``: ``k`` path gadgets of ``2r+1`` nodes between ``k`` anchors.
* ``even_degree``: the cycle family with every node replaced by a node
  subgadget on ``2 Delta + 1`` nodes.
* ``general_degree``: a layered degree-5 base graph whose edges are
  replaced by layered edge subgadgets of ``Delta rho`` nodes.

Node ids depend only on the gadget labels, while the random insertion
decides how the labelled gadgets are wired in.  An algorithm whose
randomness is keyed by node id therefore faces an independently
re-randomized instance on every trial.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ParityError
from .graph import Graph, validate, with_sides, write_edge_list
from .luby import DEFAULT_C_PRIME, color_code_bipartize, multi_round_luby
from .matching import Matching
from .rng import STREAM_GADGET, STREAM_TRIAL, generator, split_seed

FAMILIES = ("cycle", "even_degree", "general_degree")
ALGORITHMS = ("luby_multi", "fast", "warmup")

# base-graph edge patterns between layer i and layer i+1 (1-based slots)
BLUE_PAIRS = ((1, 1), (2, 1), (2, 2), (3, 3), (4, 3), (4, 4))
RED_PAIRS = ((1, 2), (2, 3), (3, 4), (4, 1))


@dataclass
class LowerBoundInstance:
    """A built gadget graph plus the metadata needed to score trials.

    Attributes:
        graph: the instance, with bipartition labels.
        family: one of :data:`FAMILIES`.
        params: ``delta``, ``r`` or ``rho``, ``k``, ``x``, ``y`` as applicable.
        seed: orientation seed the instance was built with.
        orientations: per gadget, ``"forwards"``/``"backwards"`` for the
            first two families; for ``general_degree`` a dict with the blue
            and red permutations.
        innermost_nodes: per gadget, the node ids of its innermost node
            (a single node, or the whole node subgadget).
        anchor_nodes: per anchor, its node ids.
        groups: per gadget pair (or group), the node ids whose matching
            status decides that pair's failure indicator.
        innermost_links: per gadget, data used for the direction
            (parity) indicator; see :func:`parity_failures`.
    """

    graph: Graph
    family: str
    params: dict
    seed: int
    orientations: list
    innermost_nodes: list
    anchor_nodes: list
    groups: list
    innermost_links: list = field(default_factory=list, repr=False)

    @property
    def expected_node_count(self) -> int:
        return expected_node_count(self.family, self.params)

    def metadata(self) -> dict:
        return {
            "family": self.family,
            "params": self.params,
            "seed": self.seed,
            "node_count": self.graph.node_count,
            "edge_count": self.graph.edge_count,
            "orientations": self.orientations,
            "innermost_nodes": [np.asarray(v).tolist() for v in self.innermost_nodes],
            "anchor_nodes": [np.asarray(v).tolist() for v in self.anchor_nodes],
            "groups": [np.asarray(v).tolist() for v in self.groups],
        }

    def export(self, path: str | os.PathLike) -> tuple[str, str]:
        """Write ``path`` as an edge list and ``path + '.json'`` with gadget metadata."""
        path = os.fspath(path)
        write_edge_list(self.graph, path)
        side = path + ".json"
        tmp = side + ".tmp"
        with open(tmp, "w") as fh:
            json.dump(self.metadata(), fh, indent=1)
        os.replace(tmp, side)
        return path, side


def expected_node_count(family: str, params: dict) -> int:
    """Closed-form node counts of the three families."""
    k = params["k"]
    if family == "cycle":
        return k * (2 * params["r"] + 2)
    if family == "even_degree":
        return k * (2 * params["r"] + 2) * (2 * params["delta"] + 1)
    if family == "general_degree":
        return 4 * k + 10 * k * params["delta"] * params["rho"]
    raise DomainError(f"unknown family {family!r}")


# --- cycle skeleton --------------------------------------------------------


def _cycle_skeleton(r: int, k: int, seed: int):
    """Cycle order of labelled nodes for ``k`` path gadgets.

    Gadget ``i`` (0-based) owns ids ``i(2r+2) + j`` for its path nodes
    ``v_j`` (``j = 0..2r``); the anchor after it has id ``i(2r+2) + 2r+1``.
    Returns the cyclic node order, the orientations and the labels.
    """
    if r < 1:
        raise DomainError(f"r must be at least 1, got {r}")
    if k < 2 or k % 2:
        raise ParityError(f"k must be an even integer >= 2, got {k}")
    block = 2 * r + 2
    flips = generator(seed, STREAM_GADGET).integers(0, 2, size=k)
    order = []
    orient = []
    for i in range(k):
        path = [i * block + j for j in range(2 * r + 1)]
        if flips[i]:
            path.reverse()
        orient.append("backwards" if flips[i] else "forwards")
        order.extend(path)
        order.append(i * block + 2 * r + 1)
    return np.array(order, np.int64), orient, block


def _cycle_groups(order: np.ndarray, r: int, k: int, block: int):
    """Per gadget pair, the cycle positions from one innermost node to the next."""
    pos = np.empty(len(order), np.int64)
    pos[order] = np.arange(len(order))
    groups = []
    for p in range(k // 2):
        a = pos[(2 * p) * block + r]
        b = pos[(2 * p + 1) * block + r]
        groups.append(order[a : b + 1])
    return groups, pos


def build_cycle_instance(r: int, k: int, seed: int = 0) -> LowerBoundInstance:
    """Even cycle on ``k(2r+2)`` nodes made of ``k`` randomly oriented path gadgets.

    Raises:
        ParityError: if ``k`` is odd or below 2.
        DomainError: if ``r < 1``.
    """
    order, orient, block = _cycle_skeleton(r, k, seed)
    n = len(order)
    edges = np.stack([order, np.roll(order, -1)], axis=1)
    g = with_sides(Graph.from_edges(n, edges))
    groups, pos = _cycle_groups(order, r, k, block)
    inner = [np.array([i * block + r]) for i in range(k)]
    anchors = [np.array([i * block + 2 * r + 1]) for i in range(k)]
    links = []
    for i in range(k):
        c = i * block + r
        # (cycle successor, cycle predecessor, label v_{r+1}) of the innermost node
        links.append((int(order[(pos[c] + 1) % n]), int(order[pos[c] - 1]), c + 1))
    return LowerBoundInstance(g, "cycle", {"r": r, "k": k}, seed, orient, inner, anchors, groups, links)


# --- even degree -----------------------------------------------------------


def node_subgadget_edges(delta: int) -> list[tuple[int, int]]:
    """Internal edges of one node subgadget on local ids ``l_1..l_D = 0..D-1``, ``r_1..r_{D+1} = D..2D``.

    ``l_j'`` and ``r_j`` are joined unless ``j' in {2j-1, 2j}``.
    """
    out = []
    for jp in range(1, delta + 1):
        for j in range(1, delta + 2):
            if jp not in (2 * j - 1, 2 * j):
                out.append((jp - 1, delta + j - 1))
    return out


def build_even_degree_instance(delta: int, r: int, k: int, seed: int = 0) -> LowerBoundInstance:
    """The cycle family with every node replaced by a node subgadget.

    Subgadget nodes of cycle node ``a`` are ``a(2D+1) + 0..2D``.  Its ports
    ``r_1..r_{D/2}`` each get one edge to the same port of both cycle
    neighbours.

    Raises:
        ParityError: if ``delta`` or ``k`` is odd.
        DomainError: if ``delta < 2`` or ``r < 1``.
    """
    if delta < 2:
        raise DomainError(f"delta must be at least 2, got {delta}")
    if delta % 2:
        raise ParityError(f"delta must be even, got {delta}")
    order, orient, block = _cycle_skeleton(r, k, seed)
    N = len(order)
    size = 2 * delta + 1
    local = np.array(node_subgadget_edges(delta), np.int64)
    base = np.arange(N, dtype=np.int64)[:, None, None] * size
    internal = (base + local[None]).reshape(-1, 2)
    a = order
    b = np.roll(order, -1)
    ports = delta + np.arange(delta // 2, dtype=np.int64)
    external = np.stack(
        [(a[:, None] * size + ports[None]).ravel(), (b[:, None] * size + ports[None]).ravel()], axis=1
    )
    g = with_sides(Graph.from_edges(N * size, np.concatenate([internal, external])))
    groups_c, pos = _cycle_groups(order, r, k, block)
    offs = np.arange(size)
    groups = [(grp[:, None] * size + offs[None]).ravel() for grp in groups_c]
    inner = [(i * block + r) * size + offs for i in range(k)]
    anchors = [(i * block + 2 * r + 1) * size + offs for i in range(k)]
    links = []
    for i in range(k):
        c = i * block + r
        links.append((int(order[(pos[c] + 1) % N]), int(order[pos[c] - 1]), c + 1))
    params = {"delta": delta, "r": r, "k": k}
    return LowerBoundInstance(g, "even_degree", params, seed, orient, inner, anchors, groups, links)


# --- general degree --------------------------------------------------------


def decompose_degree(delta: int) -> tuple[int, int]:
    """``(x, y)`` with ``3x + 2y = delta``: ``(0, D/2)`` for even, ``(1, (D-3)/2)`` for odd.

    Raises:
        DomainError: if ``delta < 2``.
    """
    if delta < 2:
        raise DomainError(f"delta must be at least 2, got {delta}")
    if delta % 2 == 0:
        return 0, delta // 2
    return 1, (delta - 3) // 2


def edge_subgadget_edges(delta: int, z: int, rho: int) -> tuple[list, list, list]:
    """Edges of one edge subgadget on local ids ``(i-1) D + (j-1)`` for ``w_{i,j}``.

    Returns ``(internal, u_ports, v_ports)``: internal edges, and the local
    ids joined to the ``u`` end (layer 1) and the ``v`` end (layer ``rho``).
    """
    internal = []
    for i in range(1, rho):
        for j in range(1, delta + 1):
            a = (i - 1) * delta + (j - 1)
            if i % 2 == 1:
                for jp in range(1, delta + 1):
                    if not (j == jp and j <= z):
                        internal.append((a, i * delta + (jp - 1)))
            elif j <= z:
                internal.append((a, i * delta + (j - 1)))
    u_ports = list(range(z))
    v_ports = [(rho - 1) * delta + j for j in range(z)]
    return internal, u_ports, v_ports


def base_graph_edges(k: int) -> list[tuple[int, int, str]]:
    """The layered cyclic degree-5 base graph: ``(u, v, colour)`` with ``v^{i,j} = 4(i-1) + (j-1)``."""
    out = []
    for i in range(1, k + 1):
        ip = i % k + 1
        for colour, pairs in (("blue", BLUE_PAIRS), ("red", RED_PAIRS)):
            for j, jp in pairs:
                out.append((4 * (i - 1) + j - 1, 4 * (ip - 1) + jp - 1, colour))
    return out


def build_general_degree_instance(delta: int, rho: int, k: int, seed: int = 0) -> LowerBoundInstance:
    """Degree-5 layered base graph with every edge replaced by an edge subgadget.

    Blue base edges carry ``z = x`` and red ones ``z = y`` with
    ``(x, y) = decompose_degree(delta)``.  Every gadget (an even-layer base
    node with its five incident subgadgets) permutes its three blue and its
    two red subgadgets uniformly and independently.

    Raises:
        ParityError: if ``rho`` is odd or ``k`` is not a multiple of 4.
        DomainError: if ``delta < 2``, ``rho < 2`` or ``k < 4``.
    """
    x, y = decompose_degree(delta)
    if rho < 2:
        raise DomainError(f"rho must be at least 2, got {rho}")
    if rho % 2:
        raise ParityError(f"rho must be even, got {rho}")
    if k < 4 or k % 4:
        raise ParityError(f"k must be a positive multiple of 4, got {k}")
    base = base_graph_edges(k)
    n_base = 4 * k
    size = delta * rho
    layer = lambda v: v // 4 + 1  # noqa: E731
    # orient every base edge as (innermost, anchor): the even-layer endpoint first
    oriented = []
    for u, v, colour in base:
        oriented.append((u, v, colour) if layer(u) % 2 == 0 else (v, u, colour))
    incident: dict[tuple[int, str], list[int]] = {}
    for e, (c, _a, colour) in enumerate(oriented):
        incident.setdefault((c, colour), []).append(e)
    rng = generator(seed, STREAM_GADGET)
    anchor_of = [a for _c, a, _col in oriented]
    orient = []
    innermost = sorted({c for c, _a, _col in oriented})
    for c in innermost:
        rec = {"node": c}
        for colour in ("blue", "red"):
            es = incident[(c, colour)]
            perm = rng.permutation(len(es))
            anchors = [oriented[e][1] for e in es]
            for t, e in enumerate(es):
                anchor_of[e] = anchors[perm[t]]
            rec[colour] = perm.tolist()
        orient.append(rec)
    sub = {z: edge_subgadget_edges(delta, z, rho) for z in {x, y}}
    parts = []
    u_side_of = np.empty(n_base + len(oriented) * size, np.int64)
    u_side_of[:] = -1
    for e, (c, _a, colour) in enumerate(oriented):
        z = x if colour == "blue" else y
        internal, up, vp = sub[z]
        off = n_base + e * size
        if internal:
            parts.append(np.asarray(internal, np.int64) + off)
        if up:
            parts.append(np.stack([np.full(len(up), c), np.asarray(up) + off], axis=1))
            parts.append(np.stack([np.full(len(vp), anchor_of[e]), np.asarray(vp) + off], axis=1))
        u_side_of[off : off + size] = e
    n = n_base + len(oriented) * size
    edges = np.concatenate(parts) if parts else np.zeros((0, 2), np.int64)
    g = with_sides(Graph.from_edges(n, edges))
    groups = []
    links = []
    sub_nodes = lambda e: n_base + e * size + np.arange(size)  # noqa: E731
    by_node = {}
    for e, (c, _a, _col) in enumerate(oriented):
        by_node.setdefault(c, []).append(e)
    for c in innermost:
        # (edge subgadget nodes, anchor id) for each of the five subgadgets
        links.append([(n_base + e * size, n_base + (e + 1) * size, anchor_of[e]) for e in by_node[c]])
    for i in range(1, k // 4 + 1):
        centers = [4 * (4 * i - 2 - 1) + j - 1 for j in (1, 2, 4)] + [4 * (4 * i - 1) + j - 1 for j in (1, 2)]
        anchor = 4 * (4 * i - 1 - 1)
        nodes = [np.array([anchor])]
        for c in centers:
            nodes.append(np.array([c]))
            nodes.extend(sub_nodes(e) for e in by_node[c])
        groups.append(np.unique(np.concatenate(nodes)))
    params = {"delta": delta, "rho": rho, "k": k, "x": x, "y": y}
    inner = [np.array([c]) for c in innermost]
    anchors = [np.array([v]) for v in range(n_base) if layer(v) % 2 == 1]
    inst = LowerBoundInstance(g, "general_degree", params, seed, orient, inner, anchors, groups, links)
    inst.params["group_centers"] = [
        [4 * (4 * i - 2 - 1) + j - 1 for j in (1, 2, 4)] + [4 * (4 * i - 1) + j - 1 for j in (1, 2)]
        for i in range(1, k // 4 + 1)
    ]
    inst.params["group_anchors"] = [4 * (4 * i - 1 - 1) for i in range(1, k // 4 + 1)]
    return inst


def build_instance(family: str, params: dict, seed: int = 0) -> LowerBoundInstance:
    """Dispatch on ``family`` with the parameter names used in :attr:`LowerBoundInstance.params`."""
    if family == "cycle":
        return build_cycle_instance(params["r"], params["k"], seed)
    if family == "even_degree":
        return build_even_degree_instance(params["delta"], params["r"], params["k"], seed)
    if family == "general_degree":
        return build_general_degree_instance(params["delta"], params["rho"], params["k"], seed)
    raise DomainError(f"unknown family {family!r}")


def check_instance(inst: LowerBoundInstance) -> dict:
    """Regularity, bipartiteness and node-count check; returns the findings as a dict."""
    rep = validate(inst.graph)
    degree = {"cycle": 2}.get(inst.family, inst.params.get("delta"))
    return {
        "is_regular": rep.is_regular,
        "degree": rep.regular_degree,
        "expected_degree": degree,
        "is_bipartite": rep.is_bipartite,
        "node_count": inst.graph.node_count,
        "expected_node_count": inst.expected_node_count,
        "ok": bool(
            rep.is_regular
            and rep.is_bipartite
            and rep.regular_degree == degree
            and inst.graph.node_count == inst.expected_node_count
        ),
    }


def flip_gadget(inst: LowerBoundInstance, index: int) -> LowerBoundInstance:
    """Rebuild ``inst`` with gadget ``index`` inserted in the opposite orientation.

    Only for the cycle-based families, where it is a well-defined single flip.
    """
    if inst.family == "general_degree":
        raise DomainError("flip_gadget applies to the cycle-based families")
    r, k = inst.params["r"], inst.params["k"]
    block = 2 * r + 2
    order, _o, _b = _cycle_skeleton(r, k, inst.seed)
    seg = order[index * (block) : index * block + 2 * r + 1]
    order = order.copy()
    order[index * block : index * block + 2 * r + 1] = seg[::-1]
    size = 1 if inst.family == "cycle" else 2 * inst.params["delta"] + 1
    if inst.family == "cycle":
        edges = np.stack([order, np.roll(order, -1)], axis=1)
    else:
        delta = inst.params["delta"]
        local = np.array(node_subgadget_edges(delta), np.int64)
        internal = (np.arange(len(order))[:, None, None] * size + local[None]).reshape(-1, 2)
        ports = delta + np.arange(delta // 2)
        a, b = order, np.roll(order, -1)
        external = np.stack(
            [(a[:, None] * size + ports[None]).ravel(), (b[:, None] * size + ports[None]).ravel()], axis=1
        )
        edges = np.concatenate([internal, external])
    g = with_sides(Graph.from_edges(inst.graph.node_count, edges))
    orient = list(inst.orientations)
    orient[index] = "forwards" if orient[index] == "backwards" else "backwards"
    return LowerBoundInstance(g, inst.family, dict(inst.params), inst.seed, orient, inst.innermost_nodes,
                              inst.anchor_nodes, inst.groups, inst.innermost_links)


# --- scoring ---------------------------------------------------------------


def unmatched_failures(inst: LowerBoundInstance, m: Matching) -> np.ndarray:
    """Per gadget pair or group: 1 if any of its nodes is unmatched."""
    matched = m.matched_mask()
    return np.array([int(not matched[grp].all()) for grp in inst.groups], np.int64)


def _direction(inst: LowerBoundInstance, m: Matching, i: int) -> int:
    """+1 when innermost gadget ``i`` is matched towards its cycle successor, else -1.

    Ties and unmatched innermost nodes resolve towards label ``v_{r+1}``,
    as in the post-processing that the argument applies.
    """
    succ, pred, nxt_label = inst.innermost_links[i]
    p = m.partner
    if inst.family == "cycle":
        c = int(inst.innermost_nodes[i][0])
        towards = p[c]
        if towards < 0:
            towards = nxt_label
        return 1 if towards == succ else -1
    size = 2 * inst.params["delta"] + 1
    nodes = inst.innermost_nodes[i]
    partners = p[nodes]
    partners = partners[partners >= 0]
    blocks = partners // size
    fwd = int(np.sum(blocks == succ))
    bwd = int(np.sum(blocks == pred))
    if fwd == bwd:
        return 1 if nxt_label == succ else -1
    return 1 if fwd > bwd else -1


def parity_failures(inst: LowerBoundInstance, m: Matching) -> np.ndarray:
    """Per gadget pair or group: the parity event that forces an unmatched node.

    For the cycle-based families the pair fails when its two innermost
    nodes point in different directions (one left, one right).  For the
    general family a group fails when an even number of its five centres
    is matched into the subgadget that leads to the group's anchor.
    """
    if inst.family != "general_degree":
        dirs = [_direction(inst, m, i) for i in range(len(inst.innermost_nodes))]
        return np.array([int(dirs[2 * p] != dirs[2 * p + 1]) for p in range(len(dirs) // 2)], np.int64)
    idx = {int(v[0]): t for t, v in enumerate(inst.innermost_nodes)}
    out = []
    for centers, anchor in zip(inst.params["group_centers"], inst.params["group_anchors"]):
        towards = 0
        for c in centers:
            q = m.partner[c]
            for lo, hi, a in inst.innermost_links[idx[c]]:
                if a == anchor and lo <= q < hi:
                    towards += 1
        out.append(int(towards % 2 == 0))
    return np.array(out, np.int64)


# --- adversary harness -----------------------------------------------------


def run_truncated(g: Graph, algo: str, round_budget: int, seed: int, c_prime: int = DEFAULT_C_PRIME,
                  inner_eps: float = 0.3) -> Matching:
    """Run a named algorithm stopped after ``round_budget`` of its own rounds.

    ``luby_multi`` and ``fast`` count Luby rounds (``fast`` first restricts
    to bichromatic edges); ``warmup`` counts ConstantMatch phases.
    """
    if algo == "luby_multi":
        m, _ = multi_round_luby(g, round_budget, seed, c_prime=c_prime)
        return m
    if algo == "fast":
        bip = color_code_bipartize(g, seed)
        m, _ = multi_round_luby(bip, round_budget, seed, c_prime=c_prime, rank_m=g.edge_count)
        return m
    if algo == "warmup":
        from .warmup import constant_match_report

        return constant_match_report(g, inner_eps, seed, max_phases=max(round_budget, 0)).matching
    raise DomainError(f"unknown algorithm {algo!r}; expected one of {ALGORITHMS}")


@dataclass
class AdversaryReport:
    family: str
    params: dict
    algo: str
    round_budget: int
    records: list
    note: str = "one-sided evidence: only this repository's algorithms are tested"

    @property
    def mean_failure(self) -> float:
        return float(np.mean([r["failure_frequency"] for r in self.records])) if self.records else 0.0

    @property
    def mean_parity_failure(self) -> float:
        return float(np.mean([r["parity_frequency"] for r in self.records])) if self.records else 0.0

    @property
    def ratio_above_one(self) -> float:
        return float(np.mean([r["ratio"] > 1 for r in self.records])) if self.records else 0.0

    def aggregates(self) -> dict:
        return {
            "trials": len(self.records),
            "mean_failure_frequency": self.mean_failure,
            "mean_parity_failure_frequency": self.mean_parity_failure,
            "fraction_ratio_above_one": self.ratio_above_one,
            "mean_unmatched": float(np.mean([r["unmatched"] for r in self.records])) if self.records else 0.0,
        }


def _one_trial(args) -> dict:
    family, params, algo, budget, seed, t = args
    inst_seed = split_seed(seed, t, STREAM_GADGET)
    algo_seed = split_seed(seed, t, STREAM_TRIAL)
    inst = build_instance(family, {k: v for k, v in params.items() if not k.startswith("group_")}, inst_seed)
    m = run_truncated(inst.graph, algo, budget, algo_seed)
    n = inst.graph.node_count
    fail = unmatched_failures(inst, m)
    par = parity_failures(inst, m)
    return {
        "trial": t,
        "instance_seed": inst_seed,
        "algo_seed": algo_seed,
        "matching_size": m.size,
        "unmatched": n - 2 * m.size,
        "failure_frequency": float(fail.mean()) if len(fail) else 0.0,
        "parity_frequency": float(par.mean()) if len(par) else 0.0,
        "ratio": (n / 2) / m.size if m.size else float("inf"),
    }


def adversary_trial(inst: LowerBoundInstance, algo: str, round_budget: int, trials: int, seed: int = 0,
                    workers: int = 1) -> AdversaryReport:
    """Score a truncated algorithm on freshly oriented copies of ``inst``'s family.

    Every trial rebuilds the instance with a new orientation seed and runs
    the algorithm with an independent seed.  OPT is ``n/2`` for every
    instance (each is regular bipartite), so ``ratio = (n/2)/|M|``.
    Records are returned in trial order regardless of ``workers``.
    """
    if algo not in ALGORITHMS:
        raise DomainError(f"unknown algorithm {algo!r}; expected one of {ALGORITHMS}")
    params = {k: v for k, v in inst.params.items() if not k.startswith("group_")}
    jobs = [(inst.family, params, algo, round_budget, seed, t) for t in range(trials)]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(workers) as ex:
            records = list(ex.map(_one_trial, jobs))
    else:
        records = [_one_trial(j) for j in jobs]
    return AdversaryReport(inst.family, params, algo, round_budget, records)

