"""The Matching value type and its validity checks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidMatchingError
from .graph import Graph


@dataclass(frozen=True, eq=False)
class Matching:
    """A set of vertex-disjoint edges with per-node lookups.

    Attributes:
        edges: ``(k, 2)`` int64 array of ``(u, v)`` with ``u < v``, sorted.
        partner: per-node partner id, ``-1`` when unmatched.
        match_round: per-node round in which the node was matched, ``-1``
            when unmatched or when the producing algorithm has no rounds.
    """

    edges: np.ndarray
    partner: np.ndarray
    match_round: np.ndarray

    @classmethod
    def from_edges(cls, n: int, edges, rounds=None) -> Matching:
        """Build from an edge list; ``rounds`` is a scalar or per-edge array.

        Raises:
            InvalidMatchingError: if two edges share an endpoint.
        """
        arr = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        arr = np.sort(arr, axis=1)
        arr = arr[np.lexsort((arr[:, 1], arr[:, 0]))] if len(arr) else arr
        partner = np.full(n, -1, np.int64)
        match_round = np.full(n, -1, np.int64)
        if len(arr):
            flat = arr.ravel()
            if len(np.unique(flat)) != len(flat):
                raise InvalidMatchingError("two matching edges share a node")
            partner[arr[:, 0]] = arr[:, 1]
            partner[arr[:, 1]] = arr[:, 0]
            if rounds is not None:
                r = np.broadcast_to(np.asarray(rounds, dtype=np.int64), (len(arr),))
                # rounds were given in the caller's edge order; re-sort alongside
                src = np.sort(np.asarray(edges, dtype=np.int64).reshape(-1, 2), axis=1)
                order = np.lexsort((src[:, 1], src[:, 0]))
                r = r[order]
                match_round[arr[:, 0]] = r
                match_round[arr[:, 1]] = r
        return cls(arr, partner, match_round)

    @classmethod
    def empty(cls, n: int) -> Matching:
        return cls.from_edges(n, np.zeros((0, 2), np.int64))

    @classmethod
    def from_partner(cls, partner: np.ndarray, match_round: np.ndarray | None = None) -> Matching:
        partner = np.asarray(partner, dtype=np.int64)
        idx = np.flatnonzero(partner > np.arange(len(partner)))
        edges = np.stack([idx, partner[idx]], axis=1) if len(idx) else np.zeros((0, 2), np.int64)
        m = cls.from_edges(len(partner), edges)
        if match_round is not None:
            return cls(m.edges, m.partner, np.asarray(match_round, dtype=np.int64).copy())
        return m

    @property
    def size(self) -> int:
        return len(self.edges)

    def __len__(self) -> int:
        return len(self.edges)

    @property
    def node_count(self) -> int:
        return len(self.partner)

    def edge_set(self) -> frozenset[tuple[int, int]]:
        return frozenset(map(tuple, self.edges.tolist()))

    def matched_mask(self) -> np.ndarray:
        return self.partner >= 0

    def is_valid_in(self, g: Graph) -> bool:
        try:
            check_matching(g, self.edges)
        except InvalidMatchingError:
            return False
        return True

    def is_maximal_in(self, g: Graph) -> bool:
        """True iff no edge of ``g`` has both endpoints unmatched."""
        free = self.partner < 0
        e = g.edges
        return not np.any(free[e[:, 0]] & free[e[:, 1]]) if len(e) else True


def check_matching(g: Graph, edges: np.ndarray) -> None:
    """Raise InvalidMatchingError unless ``edges`` is a matching in ``g``."""
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if not len(edges):
        return
    if edges.min() < 0 or edges.max() >= g.node_count:
        raise InvalidMatchingError("matching references a node outside the graph")
    if np.any(g.edge_ids(edges) < 0):
        raise InvalidMatchingError("matching contains a non-edge")
    flat = edges.ravel()
    if len(np.unique(flat)) != len(flat):
        raise InvalidMatchingError("two matching edges share a node")
