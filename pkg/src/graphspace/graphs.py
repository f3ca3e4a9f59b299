"""Exact graph values and cylinder sets.

A graph is identified with its set of edge indices.  Only graphs that are
exactly representable are modelled here: finite graphs, and co-finite graphs
(all edges except finitely many).  Everything else enters through finite
truncations (:class:`TruncatedAtom`).

Graph space is a Z/2Z-algebra: addition is symmetric difference (``^``) and
multiplication is intersection (``&``).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Iterator, Literal

from .dyadic import DyadicValue
from .errors import InvalidIndex, ResourceLimit
from .labelling import Edge, psi

MAX_ATOM_DEPTH = 24


def _indices(items: Iterable[int]) -> frozenset[int]:
    out = frozenset(items)
    for i in out:
        if not isinstance(i, int) or isinstance(i, bool) or i < 1:
            raise InvalidIndex(f"edge indices must be integers >= 1, got {i!r}")
    return out


@dataclass(frozen=True)
class Graph:
    """A finite graph (``support`` = present edges) or a co-finite one
    (``support`` = absent edges)."""

    support: frozenset[int] = field(default_factory=frozenset)
    cofinite: bool = False

    def __post_init__(self):
        object.__setattr__(self, "support", _indices(self.support))

    @classmethod
    def finite(cls, indices: Iterable[int] = ()) -> Graph:
        return cls(frozenset(indices), False)

    @classmethod
    def co_finite(cls, missing: Iterable[int] = ()) -> Graph:
        return cls(frozenset(missing), True)

    @classmethod
    def from_edges(cls, edges: Iterable[Edge | tuple[int, int]]) -> Graph:
        return cls.finite(psi(e) for e in edges)

    @property
    def kind(self) -> Literal["finite", "cofinite"]:
        return "cofinite" if self.cofinite else "finite"

    def __contains__(self, n: int) -> bool:
        return (n in self.support) != self.cofinite

    def __xor__(self, other: Graph) -> Graph:
        return Graph(self.support ^ other.support, self.cofinite != other.cofinite)

    def __and__(self, other: Graph) -> Graph:
        if not self.cofinite and not other.cofinite:
            return Graph(self.support & other.support)
        if self.cofinite and other.cofinite:
            return Graph(self.support | other.support, True)
        fin, co = (self, other) if other.cofinite else (other, self)
        return Graph(fin.support - co.support)

    def __or__(self, other: Graph) -> Graph:
        return ~(~self & ~other)

    def __invert__(self) -> Graph:
        return Graph(self.support, not self.cofinite)

    def __sub__(self, other: Graph) -> Graph:
        return self & ~other

    @property
    def is_zero(self) -> bool:
        return not self.cofinite and not self.support

    @property
    def is_full(self) -> bool:
        return self.cofinite and not self.support

    @property
    def max_support(self) -> int:
        """Largest index recorded in ``support`` (0 if none)."""
        return max(self.support, default=0)

    def present_below(self, depth: int) -> list[int]:
        """Sorted present indices in 1..depth."""
        if self.cofinite:
            return [n for n in range(1, depth + 1) if n not in self.support]
        return sorted(n for n in self.support if n <= depth)

    def mask(self, depth: int) -> int:
        """Bit k-1 set iff index k (<= depth) is present."""
        m = 0
        for n in self.present_below(depth):
            m |= 1 << (n - 1)
        return m

    def truncate(self, depth: int) -> TruncatedAtom:
        return TruncatedAtom(depth, self.mask(depth))

    def to_json(self) -> dict:
        return {"kind": self.kind, "support": sorted(self.support)}

    @classmethod
    def from_json(cls, data: dict) -> Graph:
        kind = data.get("kind", "finite")
        if kind not in ("finite", "cofinite"):
            raise ValueError(f"unknown graph kind {kind!r}")
        return cls(frozenset(int(i) for i in data.get("support", [])), kind == "cofinite")

    def __repr__(self):
        body = ",".join(map(str, sorted(self.support)))
        return f"{'CoFinite' if self.cofinite else 'Finite'}{{{body}}}"


ZERO = Graph.finite()
FULL = Graph.co_finite()


def sym_diff(g: Graph, h: Graph) -> Graph:
    return g ^ h


def intersect(g: Graph, h: Graph) -> Graph:
    return g & h


def contains_edge(g: Graph, n: int) -> bool:
    if n < 1:
        raise InvalidIndex(f"edge index must be >= 1, got {n}")
    return n in g


def dyadic_norm(g: Graph) -> Fraction:
    """Exact value of sum over present indices n of 2^-n."""
    s = sum((Fraction(1, 1 << n) for n in g.support), Fraction(0))
    return 1 - s if g.cofinite else s


@dataclass(frozen=True)
class TruncatedAtom:
    """The first ``depth`` coordinates of a graph; bit k-1 of ``mask`` is index k."""

    depth: int
    mask: int

    def __post_init__(self):
        if self.depth < 0 or not 0 <= self.mask < (1 << self.depth):
            raise ValueError(f"mask {self.mask} does not fit depth {self.depth}")

    @property
    def bits(self) -> tuple[int, ...]:
        return tuple((self.mask >> k) & 1 for k in range(self.depth))

    def __contains__(self, n: int) -> bool:
        return 1 <= n <= self.depth and bool((self.mask >> (n - 1)) & 1)

    def present(self) -> list[int]:
        return [k + 1 for k in range(self.depth) if (self.mask >> k) & 1]

    def to_graph(self) -> Graph:
        return Graph.finite(self.present())

    def to_cylinder(self) -> Cylinder:
        on = set(self.present())
        return Cylinder(frozenset(range(1, self.depth + 1)) - on, frozenset(on))


def atoms_at_depth(depth: int) -> Iterator[TruncatedAtom]:
    """All 2^depth atoms at ``depth``, in mask order."""
    if depth < 1:
        raise ValueError(f"depth must be >= 1, got {depth}")
    if depth > MAX_ATOM_DEPTH:
        raise ResourceLimit(f"depth {depth} exceeds atom enumeration limit {MAX_ATOM_DEPTH}")
    for m in range(1 << depth):
        yield TruncatedAtom(depth, m)


@dataclass(frozen=True)
class Cylinder:
    """E(forbidden, required): graphs containing every required index and no forbidden one."""

    forbidden: frozenset[int] = field(default_factory=frozenset)
    required: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        f, r = _indices(self.forbidden), _indices(self.required)
        if f & r:
            raise ValueError(f"forbidden and required overlap on {sorted(f & r)}")
        object.__setattr__(self, "forbidden", f)
        object.__setattr__(self, "required", r)

    @classmethod
    def of(cls, forbidden: Iterable[int] = (), required: Iterable[int] = ()) -> Cylinder:
        return cls(frozenset(forbidden), frozenset(required))

    @property
    def indices(self) -> frozenset[int]:
        return self.forbidden | self.required

    @property
    def max_index(self) -> int:
        return max(self.indices, default=0)

    def contains(self, g: Graph | TruncatedAtom) -> bool:
        return all(i in g for i in self.required) and not any(i in g for i in self.forbidden)

    __contains__ = contains

    def contains_mask(self, mask: int) -> bool:
        req = sum(1 << (i - 1) for i in self.required)
        forb = sum(1 << (i - 1) for i in self.forbidden)
        return mask & req == req and mask & forb == 0

    def to_json(self) -> dict:
        return {"forbidden": sorted(self.forbidden), "required": sorted(self.required)}

    @classmethod
    def from_json(cls, data: dict) -> Cylinder:
        return cls.of((int(i) for i in data.get("forbidden", [])),
                      (int(i) for i in data.get("required", [])))

    def __repr__(self):
        return f"E({sorted(self.forbidden)}, {sorted(self.required)})"


class _EmptyCylinder:
    """The empty set, returned when cylinder constraints collide."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def contains(self, g) -> bool:
        return False

    __contains__ = contains

    def contains_mask(self, mask: int) -> bool:
        return False

    def __repr__(self):
        return "Empty"


EMPTY = _EmptyCylinder()


def cyl_intersect(a: Cylinder | _EmptyCylinder, b: Cylinder | _EmptyCylinder):
    """E(I0 u J0, I1 u J1) = E(I0, I1) n E(J0, J1), or EMPTY on collision."""
    if a is EMPTY or b is EMPTY:
        return EMPTY
    forb, req = a.forbidden | b.forbidden, a.required | b.required
    if forb & req:
        return EMPTY
    return Cylinder(forb, req)


def cyl_translate(a: Cylinder, g: Graph) -> Cylinder:
    """The translate E(I0, I1) + G."""
    forb = {i for i in a.forbidden if i not in g} | {i for i in a.required if i in g}
    req = {i for i in a.required if i not in g} | {i for i in a.forbidden if i in g}
    return Cylinder(frozenset(forb), frozenset(req))


def cyl_to_graph_form(a: Cylinder) -> tuple[Cylinder, Graph]:
    """Split E(I0, I1) as the ideal E(I0 u I1, {}) translated by the finite graph I1."""
    return Cylinder(a.indices, frozenset()), Graph.finite(a.required)


@dataclass(frozen=True)
class Ball:
    """Open or closed ball for the dyadic metric d(G, H) = sum over G^H of 2^-n."""

    center: Graph
    radius: DyadicValue
    closed: bool = False

    @property
    def kind(self) -> str:
        return "closed" if self.closed else "open"

    def contains(self, g: Graph) -> bool:
        d = dyadic_norm(g ^ self.center)
        r = self.radius.value
        return d <= r if self.closed else d < r

    __contains__ = contains

    def to_json(self) -> dict:
        return {"center": self.center.to_json(), "radius": self.radius.to_json(),
                "kind": self.kind}


def _two_balls(forb: frozenset[int], req: frozenset[int], n: int, closed: bool) -> list[Ball]:
    if closed:
        r = DyadicValue.from_fraction(Fraction(1, 1 << (n + 1)))
    else:
        r = DyadicValue.from_fraction(Fraction(1, 1 << n))
    return [Ball(Graph.finite(req), r, closed), Ball(Graph.co_finite(forb), r, closed)]


def cyl_to_balls(a: Cylinder, closed: bool = False, max_gaps: int = 16) -> list[Ball]:
    """Balls whose union is the cylinder ``a``.

    When the constrained indices are exactly 1..n the cylinder is the union of
    two balls of radius 2^-n (open) or 2^-(n+1) (closed), centred at the
    required edges and at the complement of the forbidden edges.  Otherwise
    the unconstrained gaps below the largest index are filled in every way and
    each completion contributes its two balls.
    """
    n = a.max_index
    if n == 0 and not closed:
        return [Ball(ZERO, DyadicValue.from_fraction(1)),
                Ball(FULL, DyadicValue.from_fraction(0), closed=True)]
    gaps = sorted(set(range(1, n + 1)) - a.indices)
    if len(gaps) > max_gaps:
        raise ResourceLimit(f"{len(gaps)} gaps would need {2 ** len(gaps)} completions")
    balls = []
    for size in range(len(gaps) + 1):
        for j0 in combinations(gaps, size):
            forb = a.forbidden | frozenset(j0)
            req = a.required | (frozenset(gaps) - frozenset(j0))
            balls.extend(_two_balls(forb, req, n, closed))
    return balls
