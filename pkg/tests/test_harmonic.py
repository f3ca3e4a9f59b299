import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from graphspace import ZERO, Graph, heart2_inv
from graphspace.errors import InvalidFunction, ResourceLimit
from graphspace.harmonic import (
    FiniteSupportMeasure, WalshCharacter, WalshSpectrum, bochner_coefficients, bochner_synthesize,
    character_table, convolve, dual_roundtrip, gram_check, gram_matrix, hadamard, inverse_wht,
    rademacher, read_table, walsh_eval, write_table, wht)
from graphspace.metrics import heart2_inv_truncated

from strategies import finite_graphs, graphs, naive_wht

F, C = Graph.finite, Graph.co_finite


@pytest.mark.parametrize("e,g,expected", [
    (F(), C({4}), 1), (F({1}), F({1, 3}), -1), (F({1, 2}), C({1}), -1),
])
def test_walsh_eval_examples(e, g, expected):
    assert walsh_eval(e, g) == expected


def test_characters_need_finite_index():
    with pytest.raises(ValueError):
        WalshCharacter(C())


@given(finite_graphs, graphs(), graphs())
def test_character_law(e, g, h):
    assert walsh_eval(e, g ^ h) == walsh_eval(e, g) * walsh_eval(e, h)


@given(finite_graphs, finite_graphs, graphs())
def test_group_duality(e, f, g):
    assert walsh_eval(e ^ f, g) == walsh_eval(e, g) * walsh_eval(f, g)


# -- transforms --------------------------------------------------------------

def test_wht_of_constant():
    spec = wht(np.ones(8))
    assert spec.coeffs.tolist() == [1, 0, 0, 0, 0, 0, 0, 0]


def test_wht_of_character():
    e = F({1, 2})
    table = [walsh_eval(e, F(n + 1 for n in range(3) if m >> n & 1)) for m in range(8)]
    spec = wht(table)
    assert spec.coefficient(e) == 1
    assert np.count_nonzero(spec.coeffs) == 1


@pytest.mark.parametrize("depth", [1, 3, 6, 8])
def test_wht_matches_naive_transform(depth):
    rng = np.random.default_rng(depth)
    f = rng.normal(size=1 << depth)
    assert np.allclose(wht(f).coeffs, naive_wht(f.tolist()), atol=1e-12, rtol=0)


def test_round_trip_depth_10():
    rng = np.random.default_rng(10)
    f = rng.normal(size=1 << 10)
    assert np.max(np.abs(inverse_wht(wht(f)) - f)) <= 1e-12


@pytest.mark.parametrize("depth", [2, 5, 8])
def test_integer_orthonormality(depth):
    table = character_table(depth)
    assert np.array_equal(hadamard(table.T), (1 << depth) * np.eye(1 << depth, dtype=np.int64))
    # spot check against the definition
    for s in (0, 1, (1 << depth) - 1):
        for g in (0, 3 % (1 << depth)):
            assert table[s, g] == (-1) ** bin(s & g).count("1")


@given(st.integers(1, 10), st.integers(0, 2 ** 32))
def test_parseval(depth, seed):
    f = np.random.default_rng(seed).normal(size=1 << depth)
    spec = wht(f)
    assert abs(spec.energy() - np.sum(f * f) / (1 << depth)) <= 1e-12 * max(1, np.sum(f * f))


@given(st.integers(1, 8), st.integers(0, 2 ** 32))
def test_parseval_exact_rational(depth, seed):
    rng = random.Random(seed)
    f = np.array([Fraction(rng.randint(-9, 9), rng.randint(1, 9)) for _ in range(1 << depth)],
                 dtype=object)
    coeffs = hadamard(f) / (1 << depth)
    assert sum(c * c for c in coeffs) == sum(v * v for v in f) / (1 << depth)


def test_wht_depth_limit():
    with pytest.raises(ResourceLimit):
        hadamard(np.zeros(1 << 25, dtype=np.int8))


def test_wht_rejects_bad_length():
    with pytest.raises(ValueError):
        wht(np.ones(6))


@given(st.integers(1, 6), st.integers(0, 2 ** 32))
def test_convolution_law(depth, seed):
    rng = np.random.default_rng(seed)
    f, g = rng.normal(size=(2, 1 << depth))
    n = 1 << depth
    direct = np.array([sum(f[y] * g[x ^ y] for y in range(n)) / n for x in range(n)])
    assert np.allclose(convolve(f, g), direct, atol=1e-12)
    h = rng.normal(size=n)
    assert np.allclose(convolve(convolve(f, g), h), convolve(f, convolve(g, h)), atol=1e-12)


def test_table_files_round_trip():
    f = np.arange(16, dtype=float) / 7
    data = write_table(f)
    assert data[:8] == (4).to_bytes(8, "little")
    assert np.array_equal(read_table(data), f)
    spec = wht(f)
    assert np.array_equal(WalshSpectrum.from_bytes(spec.to_bytes()).coeffs, spec.coeffs)


# -- duality and Rademacher functions -------------------------------------------

def test_dual_roundtrip_examples():
    assert dual_roundtrip(WalshCharacter(F())) == F()
    assert dual_roundtrip(WalshCharacter(F({1, 3}))) == F({1, 3})
    a, b = WalshCharacter(F({1, 2})), WalshCharacter(F({2, 3}))
    assert dual_roundtrip(lambda g: a(g) * b(g), depth=3) == F({1, 3})


@given(finite_graphs, finite_graphs)
def test_dual_is_group_isomorphism(e, f):
    a, b = WalshCharacter(e), WalshCharacter(f)
    assert dual_roundtrip(lambda g: a(g) * b(g), depth=70) == e ^ f


@given(st.integers(0, 2 ** 32 - 1), st.frozensets(st.integers(1, 32), max_size=6))
def test_walsh_is_rademacher_product(m, e):
    x = Fraction(m, 1 << 32)
    prod = 1
    for k in e:
        prod *= rademacher(k, x)
    if m:
        assert walsh_eval(F(e), heart2_inv(x, "finite")) == prod
    # a non-dyadic point with the same first 32 digits
    y = x + Fraction(1, 3 << 32)
    g, residual = heart2_inv_truncated(y, 32)
    assert residual
    prod_y = 1
    for k in e:
        prod_y *= rademacher(k, y)
    assert walsh_eval(F(e), g) == prod_y == prod


# -- Bochner ------------------------------------------------------------------

def test_bochner_examples():
    f = bochner_synthesize(FiniteSupportMeasure((F(),), (Fraction(1),)))
    assert all(f(g) == 1 for g in (F(), F({3}), C({1})))
    h = F({2, 5})
    f = bochner_synthesize(FiniteSupportMeasure((h,), (Fraction(1),)))
    assert all(f(g) == walsh_eval(h, g) for g in (F({2}), F({2, 5}), C()))
    f = bochner_synthesize(FiniteSupportMeasure((F(), F({1})), (Fraction(1, 2), Fraction(1, 2))))
    assert f(F()) == 1 and f(F({1})) == 0 and f(C({1})) == 1 and f(C()) == 0


def test_measure_validation():
    with pytest.raises(ValueError):
        FiniteSupportMeasure((F(), F()), (Fraction(1, 2), Fraction(1, 2)))
    with pytest.raises(ValueError):
        FiniteSupportMeasure((F(),), (Fraction(1, 2),))
    with pytest.raises(ValueError):
        FiniteSupportMeasure((C(),), (Fraction(1),))
    mu = FiniteSupportMeasure((F({1}), F({2})), (Fraction(1, 3), Fraction(2, 3)))
    assert FiniteSupportMeasure.from_json(mu.to_json()) == mu


@st.composite
def measures(draw):
    support = draw(st.lists(st.frozensets(st.integers(1, 12), max_size=5), min_size=1,
                            max_size=8, unique=True))
    raw = draw(st.lists(st.integers(0, 20), min_size=len(support), max_size=len(support))
               .filter(lambda w: sum(w) > 0))
    total = sum(raw)
    return FiniteSupportMeasure(tuple(F(s) for s in support),
                                tuple(Fraction(w, total) for w in raw))


@given(measures(), st.lists(graphs(max_index=14), min_size=1, max_size=20))
def test_bochner_soundness(mu, pts):
    f = bochner_synthesize(mu)
    assert f(ZERO) == 1
    rep = gram_check(f, pts, 1e-9)
    assert rep.psd
    assert all(abs(f(g)) <= 1 for g in pts)


@given(measures())
def test_bochner_coefficients_recover_measure(mu):
    f = bochner_synthesize(mu)
    spec = bochner_coefficients(f.table(12))
    for h, w in zip(mu.support, mu.weights):
        assert spec.coefficient(h) == pytest.approx(float(w), abs=1e-12)
    assert np.all(spec.coeffs >= -1e-12)


def test_gram_examples():
    ones = gram_check(lambda g: 1, [F(), F({1}), C(), F({2, 3}), C({5})])
    assert ones.psd and abs(ones.min_eigenvalue) < 1e-12
    h = F({1, 4})
    pts = [F({i}) for i in range(1, 8)]
    assert gram_check(WalshCharacter(h), pts).psd

    def spike(g):
        return -1 + 2 * int(g.is_zero)

    two = gram_check(spike, [F(), F({1})])
    assert two.psd and np.array_equal(gram_matrix(spike, [F(), F({1})]), [[1, -1], [-1, 1]])
    three = gram_check(spike, [F(), F({1}), F({2})])
    assert np.array_equal(gram_matrix(spike, [F(), F({1}), F({2})]),
                          [[1, -1, -1], [-1, 1, -1], [-1, -1, 1]])
    # eigenvalues of J-type matrix 2I - J: 2 - 3 = -1 and 2 (twice)
    assert not three.psd and three.min_eigenvalue == pytest.approx(-1.0, abs=1e-12)


def test_gram_rejects_non_finite():
    with pytest.raises(InvalidFunction):
        gram_check(lambda g: float("nan"), [F()])


def test_gram_tolerance_scales_with_size():
    pts = [F({i}) for i in range(1, 121)]
    rep = gram_check(lambda g: 1, pts)
    assert rep.size == 120 and rep.tolerance == pytest.approx(120e-9) and rep.psd
