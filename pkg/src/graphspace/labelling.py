"""Canonical labelling of the edges of the complete graph on {1, 2, ...}.

Edges {u, v} with u < v are numbered in colexicographic order::

    psi({u, v}) = (v - 1)(v - 2)/2 + u

so {1,2} -> 1, {1,3} -> 2, {2,3} -> 3, {1,4} -> 4, ...
"""
from __future__ import annotations

from dataclasses import dataclass
from math import isqrt

from .errors import InvalidEdge, InvalidIndex


@dataclass(frozen=True, order=True)
class Edge:
    u: int
    v: int

    def __post_init__(self):
        if not (isinstance(self.u, int) and isinstance(self.v, int)):
            raise InvalidEdge(f"vertex labels must be integers, got {self.u!r}, {self.v!r}")
        if self.u < 1 or self.v < 1:
            raise InvalidEdge(f"vertex labels must be >= 1, got ({self.u}, {self.v})")
        if self.u >= self.v:
            raise InvalidEdge(f"edge must satisfy u < v, got ({self.u}, {self.v})")

    @classmethod
    def of(cls, a: int, b: int) -> Edge:
        """Build the normalized edge joining ``a`` and ``b`` in either order."""
        if a == b:
            raise InvalidEdge(f"loops are not edges: ({a}, {b})")
        return cls(min(a, b), max(a, b))

    def to_json(self) -> list[int]:
        return [self.u, self.v]

    @classmethod
    def from_json(cls, data) -> Edge:
        u, v = data
        return cls(int(u), int(v))


def _as_edge(e) -> Edge:
    if isinstance(e, Edge):
        return e
    u, v = e
    return Edge(u, v)


def psi(e: Edge | tuple[int, int]) -> int:
    """Index of edge ``e`` (a positive integer)."""
    e = _as_edge(e)
    return (e.v - 1) * (e.v - 2) // 2 + e.u


def psi_inv(n: int) -> Edge:
    """The edge with index ``n``."""
    if not isinstance(n, int) or n < 1:
        raise InvalidIndex(f"edge index must be an integer >= 1, got {n!r}")
    # smallest t with t(t+1)/2 >= n; then v = t + 1
    t = (isqrt(8 * n + 1) - 1) // 2
    if t * (t + 1) // 2 < n:
        t += 1
    return Edge(n - (t - 1) * t // 2, t + 1)


def prefix_edges(depth: int) -> list[Edge]:
    """Edges with index 1..depth, in index order."""
    if depth < 0:
        raise InvalidIndex(f"depth must be >= 0, got {depth}")
    return [psi_inv(n) for n in range(1, depth + 1)]


def prefix_vertex_count(depth: int) -> int:
    """Number of vertices spanned by the first ``depth`` edges."""
    if depth <= 0:
        return 0
    return psi_inv(depth).v
