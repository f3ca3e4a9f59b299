"""Metrics and norms on graph space.

``heart(G, a)`` is the weighted Hamming norm sum over present edges n of a^-n,
and ``dist(G, H, a)`` the induced translation-invariant metric.  Base 2 gets an
exact path through :class:`~graphspace.dyadic.DyadicValue`; base 3 (scaled by
2) embeds graph space onto the Cantor set.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import count
from numbers import Rational
from typing import Iterator, Literal, Union

from .dyadic import DyadicValue
from .errors import InvalidBase, NoPreimage
from .graphs import Graph

Number = Union[int, float, Fraction]


def as_number(x) -> Number:
    """Strings and rationals become exact Fractions; floats stay floats."""
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, (Fraction, int)):
        return Fraction(x)
    if isinstance(x, Rational):
        return Fraction(x.numerator, x.denominator)
    if isinstance(x, str):
        return Fraction(x.strip())
    return float(x)


def number_to_json(x: Number):
    if isinstance(x, Fraction):
        return str(x)
    return x


# -- base-a norms ------------------------------------------------------------

def _check_base(a) -> None:
    if not a > 1:
        raise InvalidBase(f"base must exceed 1, got {a}")


def heart_exact(g: Graph, a: int | Fraction) -> Fraction:
    """Exact norm for rational base a > 1 (co-finite tails in closed form)."""
    a = Fraction(a)
    _check_base(a)
    s = sum((a ** -n for n in g.support), Fraction(0))
    return 1 / (a - 1) - s if g.cofinite else s


def heart(g: Graph, a: Number, precision: int = 53) -> float:
    """Norm sum over present edges n of a^-n.

    Co-finite graphs use the closed-form geometric total, so the result is
    within a^-precision / (a - 1) of the true value for any precision >= 1
    (limited only by floating point rounding).
    """
    if precision < 1:
        raise ValueError(f"precision must be >= 1, got {precision}")
    _check_base(a)
    if isinstance(a, (int, Fraction)):
        return float(heart_exact(g, a))
    a = float(a)
    s = math.fsum(a ** -n for n in g.support)
    return 1.0 / (a - 1.0) - s if g.cofinite else s


def dist(g: Graph, h: Graph, a: Number, precision: int = 53) -> float:
    return heart(g ^ h, a, precision)


def dist_exact(g: Graph, h: Graph, a: int | Fraction = 2) -> Fraction:
    return heart_exact(g ^ h, a)


# -- the dyadic map ------------------------------------------------------------

def heart2_exact(g: Graph) -> DyadicValue:
    """Binary expansion of the base-2 norm: digit k is 1 iff index k is present."""
    top = g.max_support
    bits = tuple(int(k in g) for k in range(1, top + 1))
    return DyadicValue(bits, "ones" if g.cofinite else "zeros")


def heart2_inv(x, branch: Literal["finite", "cofinite"] = "finite") -> Graph:
    """Preimage of a dyadic x in [0, 1] under the base-2 norm.

    Every dyadic rational other than 0 and 1 has two preimages: a finite graph
    (terminating expansion) and a co-finite one (expansion ending in ones).
    """
    if branch not in ("finite", "cofinite"):
        raise ValueError(f"unknown branch {branch!r}")
    if not isinstance(x, DyadicValue):
        x = DyadicValue.from_fraction(x)
    v = x.value
    if branch == "finite":
        if v == 1:
            raise NoPreimage("1 is the norm of the complete graph only")
        return Graph.finite(x.terminating().set_positions)
    if v == 0:
        raise NoPreimage("0 is the norm of the empty graph only")
    e = x.nonterminating()
    return Graph.co_finite(k for k, b in enumerate(e.bits, 1) if not b)


def heart2_inv_truncated(x, nbits: int) -> tuple[Graph, bool]:
    """Finite graph from the first ``nbits`` binary digits of x in [0, 1).

    The flag is True when x has further nonzero digits (the preimage was cut).
    """
    head, residual = DyadicValue.truncate(x, nbits)
    return Graph.finite(head.set_positions), residual


def collision_partner(g: Graph) -> Graph:
    """The other graph with the same base-2 norm as a nonempty finite graph
    (or as a co-finite graph other than the complete graph)."""
    if g.cofinite:
        if g.is_full:
            raise NoPreimage("the complete graph has no finite partner")
        k = g.max_support
        return Graph.finite({j for j in range(1, k) if j in g} | {k})
    if g.is_zero:
        raise NoPreimage("the empty graph has no co-finite partner")
    k = g.max_support
    return Graph.co_finite({j for j in range(1, k) if j not in g.support} | {k})


@dataclass(frozen=True)
class CantorPoint:
    """Image of a graph under G -> 2 * heart(G, 3), a point of the Cantor set."""

    graph: Graph

    @property
    def value(self) -> Fraction:
        return 2 * heart_exact(self.graph, 3)

    def digit(self, k: int) -> int:
        return 2 if k in self.graph else 0

    def digits(self, n: int) -> tuple[int, ...]:
        return tuple(self.digit(k) for k in range(1, n + 1))


def cantor_coord(g: Graph) -> CantorPoint:
    return CantorPoint(g)


# -- weight sequences ------------------------------------------------------------

@dataclass(frozen=True)
class WeightSequence:
    """Positive weights ``table[n-1]`` for n <= len(table), then ``tail_scale * tail_base**-n``.

    With an empty table and unit scale this is the geometric sequence a^-n.
    The same class serves as a summable weight and as a decay sequence: every
    instance is positive, bounded, summable, and accumulates only at 0.
    """

    table: tuple[Number, ...] = ()
    tail_base: Number = 2
    tail_scale: Number = 1

    def __post_init__(self):
        object.__setattr__(self, "table", tuple(as_number(t) for t in self.table))
        object.__setattr__(self, "tail_base", as_number(self.tail_base))
        object.__setattr__(self, "tail_scale", as_number(self.tail_scale))
        _check_base(self.tail_base)
        if not self.tail_scale > 0 or any(not t > 0 for t in self.table):
            raise ValueError("weights must be positive")

    @classmethod
    def geometric(cls, a: Number) -> WeightSequence:
        return cls((), a, 1)

    @property
    def kind(self) -> str:
        return "geometric" if not self.table and self.tail_scale == 1 else "table"

    def weight(self, n: int) -> Number:
        if n < 1:
            raise ValueError(f"index must be >= 1, got {n}")
        if n <= len(self.table):
            return self.table[n - 1]
        return self.tail_scale * self.tail_base ** -n

    __call__ = weight

    def tail_sum(self, after: int) -> Number:
        """Sum of weights with index > ``after`` (after >= len(table))."""
        if after < len(self.table):
            return sum(self.table[after:]) + self.tail_sum(len(self.table))
        a = self.tail_base
        return self.tail_scale * a ** -after / (a - 1)

    def total(self) -> Number:
        return sum(self.table) + self.tail_sum(len(self.table))

    def squared(self) -> WeightSequence:
        return WeightSequence(tuple(t * t for t in self.table), self.tail_base ** 2,
                              self.tail_scale ** 2)

    def iter_sorted(self) -> Iterator[int]:
        """Indices in non-increasing weight order, ties by ascending index."""
        ranked = sorted(range(1, len(self.table) + 1), key=lambda n: (-self.table[n - 1], n))
        tail = count(len(self.table) + 1)
        j = next(tail)
        for i in ranked:
            while self.weight(j) > self.table[i - 1]:
                yield j
                j = next(tail)
            yield i
        yield j
        yield from tail

    def to_json(self) -> dict:
        if self.kind == "geometric":
            return {"kind": "geometric", "base": number_to_json(self.tail_base)}
        return {"kind": "table", "table": [number_to_json(t) for t in self.table],
                "tail_base": number_to_json(self.tail_base),
                "tail_scale": number_to_json(self.tail_scale)}

    @classmethod
    def from_json(cls, data: dict) -> WeightSequence:
        if data["kind"] == "geometric":
            return cls.geometric(as_number(data["base"]))
        return cls(tuple(data.get("table", ())), data.get("tail_base", 2),
                   data.get("tail_scale", 1))

    @classmethod
    def parse(cls, text: str) -> WeightSequence:
        """``geometric:2`` or ``table:0.5,0.9,0.3:2:0.01`` (table:entries:base:scale)."""
        kind, _, rest = text.partition(":")
        if kind == "geometric":
            return cls.geometric(as_number(rest or "2"))
        if kind == "table":
            parts = rest.split(":")
            entries = tuple(as_number(t) for t in parts[0].split(",") if t)
            base = as_number(parts[1]) if len(parts) > 1 else 2
            scale = as_number(parts[2]) if len(parts) > 2 else 1
            return cls(entries, base, scale)
        raise ValueError(f"unknown weight sequence {text!r}")


DecaySequence = WeightSequence


@dataclass(frozen=True)
class MultWeightSequence:
    """Weights 1 + excess(n) > 1 whose infinite product converges."""

    excess: WeightSequence = field(default_factory=lambda: WeightSequence.geometric(2))
    tolerance: float = 1e-18

    def weight(self, n: int) -> float:
        return 1.0 + float(self.excess(n))

    __call__ = weight

    def log_weight(self, n: int) -> float:
        return math.log1p(float(self.excess(n)))

    @cached_property
    def _log_total(self) -> float:
        terms = []
        n = 0
        while n < len(self.excess.table) or float(self.excess.tail_sum(n)) > self.tolerance:
            n += 1
            terms.append(self.log_weight(n))
            if n > 10_000_000:
                raise ValueError("product converges too slowly to evaluate")
        return math.fsum(terms)

    def log_total(self) -> float:
        return self._log_total

    def total_product(self) -> float:
        return math.exp(self._log_total)

    def log_product_over(self, g: Graph) -> float:
        s = math.fsum(self.log_weight(n) for n in g.support)
        return self._log_total - s if g.cofinite else s

    @cached_property
    def exponent(self) -> int:
        """Smallest n >= 1 with 2^n >= 1 + (product over all edges)."""
        target = 1.0 + self.total_product()
        n = max(1, math.ceil(math.log2(target)))
        while n > 1 and 2.0 ** (n - 1) >= target:
            n -= 1
        while 2.0 ** n < target:
            n += 1
        return n

    def to_json(self) -> dict:
        return {"kind": "one_plus", "excess": self.excess.to_json()}

    @classmethod
    def from_json(cls, data: dict) -> MultWeightSequence:
        return cls(WeightSequence.from_json(data["excess"]))


# -- norms ---------------------------------------------------------------------

def norm1(g: Graph, phi: WeightSequence) -> Number:
    s = sum(phi(n) for n in g.support)
    return phi.total() - s if g.cofinite else s


def norminf(g: Graph, zeta: WeightSequence) -> Number:
    """Largest weight over the present edges (0 for the empty graph)."""
    if g.is_zero:
        return 0
    if not g.cofinite:
        return max(zeta(n) for n in g.support)
    for n in zeta.iter_sorted():
        if n not in g.support:
            return zeta(n)
    raise AssertionError("unreachable: co-finite graphs are nonempty")


def normx(g: Graph, phi: MultWeightSequence) -> float:
    """(product of weights over G minus 1) ** (1/n), n fixed by the full product."""
    if g.is_zero:
        return 0.0
    return math.expm1(phi.log_product_over(g)) ** (1.0 / phi.exponent)


def sorted_bijection(zeta: WeightSequence, depth: int) -> list[int]:
    """First ``depth`` edge indices in non-increasing order of ``zeta``."""
    if depth < 1:
        raise ValueError(f"depth must be >= 1, got {depth}")
    it = zeta.iter_sorted()
    return [next(it) for _ in range(depth)]


__all__ = [
    "CantorPoint", "DecaySequence", "MultWeightSequence", "WeightSequence",
    "as_number", "cantor_coord", "collision_partner", "dist", "dist_exact", "heart",
    "heart2_exact", "heart2_inv", "heart2_inv_truncated", "heart_exact", "norm1",
    "norminf", "normx", "sorted_bijection",
]
