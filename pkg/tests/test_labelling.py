
import pytest
from hypothesis import given, strategies as st

from graphspace import Edge, prefix_edges, psi, psi_inv
from graphspace.errors import InvalidEdge, InvalidIndex
from graphspace.labelling import prefix_vertex_count


def colex_pairs(limit):
    """Brute-force colex order: sort pairs by (larger, smaller) label."""
    pairs = sorted(((u, v) for v in range(2, 60) for u in range(1, v)), key=lambda e: (e[1], e[0]))
    return pairs[:limit]


@pytest.mark.parametrize("edge,index", [((1, 2), 1), ((2, 3), 3), ((1, 5), 7)])
def test_psi_examples(edge, index):
    assert psi(edge) == index
    assert psi_inv(index) == Edge(*edge)


def test_psi_matches_brute_force_enumeration():
    for n, (u, v) in enumerate(colex_pairs(1000), 1):
        assert psi(Edge(u, v)) == n
        assert psi_inv(n) == Edge(u, v)


@pytest.mark.parametrize("depth,expected", [
    (0, []),
    (3, [(1, 2), (1, 3), (2, 3)]),
    (4, [(1, 2), (1, 3), (2, 3), (1, 4)]),
])
def test_prefix_edges(depth, expected):
    assert prefix_edges(depth) == [Edge(u, v) for u, v in expected]


@pytest.mark.parametrize("bad", [(2, 2), (3, 1), (0, 4), (-1, 2)])
def test_malformed_edge(bad):
    with pytest.raises(InvalidEdge):
        psi(bad)


@pytest.mark.parametrize("n", [0, -3])
def test_psi_inv_rejects_nonpositive(n):
    with pytest.raises(InvalidIndex):
        psi_inv(n)


def test_edge_of_normalizes_and_serializes():
    e = Edge.of(5, 2)
    assert (e.u, e.v) == (2, 5)
    assert Edge.from_json(e.to_json()) == e
    assert e.to_json() == [2, 5]


def test_round_trip_first_million():
    assert all(psi(psi_inv(n)) == n for n in range(1, 1_000_001))


@given(st.integers(2, 2000).flatmap(lambda v: st.tuples(st.integers(1, v - 1), st.just(v))))
def test_round_trip_edges(pair):
    e = Edge(*pair)
    assert psi_inv(psi(e)) == e


@given(st.integers(1, 10**15))
def test_round_trip_large_indices(n):
    assert psi(psi_inv(n)) == n


@given(st.integers(1, 5000))
def test_prefix_vertex_labels(n):
    labels = {x for e in prefix_edges(n) for x in (e.u, e.v)}
    m = max(labels)
    assert labels == set(range(1, m + 1))
    assert m * (m - 1) // 2 >= n > (m - 1) * (m - 2) // 2
    assert prefix_vertex_count(n) == m


def test_psi_is_increasing_in_colex_order():
    pairs = colex_pairs(400)
    idx = [psi(p) for p in pairs]
    assert idx == sorted(idx) and len(set(idx)) == len(idx)
