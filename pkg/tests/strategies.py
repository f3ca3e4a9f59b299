"""Hypothesis strategies and brute-force oracles shared by the test modules."""
from __future__ import annotations

from fractions import Fraction
from itertools import product

from hypothesis import strategies as st

from graphspace import Cylinder, Graph

index_sets = st.frozensets(st.integers(1, 64), max_size=10)


@st.composite
def graphs(draw, max_index: int = 64, max_size: int = 10):
    support = draw(st.frozensets(st.integers(1, max_index), max_size=max_size))
    if draw(st.booleans()):
        return Graph.co_finite(support)
    return Graph.finite(support)


finite_graphs = st.frozensets(st.integers(1, 64), max_size=10).map(Graph.finite)


@st.composite
def cylinders(draw, max_index: int = 8):
    labels = draw(st.lists(st.sampled_from([None, 0, 1]), min_size=max_index,
                           max_size=max_index))
    forbidden = [k for k, lab in enumerate(labels, 1) if lab == 0]
    required = [k for k, lab in enumerate(labels, 1) if lab == 1]
    return Cylinder.of(forbidden, required)


def dyadic_radius(numerator: int, bits: int) -> Fraction:
    return Fraction(numerator, 1 << bits)


# -- oracles written without the library --------------------------------------

def oracle_atoms(forbidden, required, depth: int) -> set[int]:
    """Depth-d masks (bit k-1 = index k) of atoms inside E(forbidden, required)."""
    out = set()
    for bits in product((0, 1), repeat=depth):
        if all(bits[k - 1] == 0 for k in forbidden) and all(bits[k - 1] == 1 for k in required):
            out.add(sum(b << i for i, b in enumerate(bits)))
    return out


def oracle_member(graph: Graph, n: int) -> bool:
    return (n in graph.support) != graph.cofinite


def oracle_norm(graph: Graph) -> Fraction:
    """Exact sum of 2^-n over present indices, tail in closed form."""
    if not graph.cofinite:
        return sum((Fraction(1, 1 << n) for n in graph.support), Fraction(0))
    return 1 - sum((Fraction(1, 1 << n) for n in graph.support), Fraction(0))


def oracle_atom_weight(mask: int, depth: int, p) -> Fraction:
    w = Fraction(1)
    for k in range(1, depth + 1):
        q = p(k) if callable(p) else p
        w *= q if mask >> (k - 1) & 1 else 1 - q
    return w


def naive_wht(values) -> list[float]:
    """O(4^n) transform: coeffs[S] = 2^-n sum_G f(G) (-1)^popcount(S & G)."""
    n = len(values)
    return [sum(v * (-1) ** bin(s & g).count("1") for g, v in enumerate(values)) / n
            for s in range(n)]
