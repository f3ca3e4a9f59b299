"""Expectations of graph statistics under product measures.

Closed forms for the k-th minimum edge number, the sup/sum/product norms, a
Monte Carlo estimator on sampled truncations, and the transfer of Haar
integrals on graph space to Lebesgue integrals on [0, 1] via the dyadic map.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .dyadic import DyadicValue
from .errors import DivergentExpectation, EstimatorFailure, UndefinedStatistic
from .graphs import Cylinder, Graph, TruncatedAtom
from .measures import CHUNK, HAAR, ProbabilityAssignment, cylinder_measure, sample
from .metrics import (MultWeightSequence, Number, WeightSequence, as_number,
                      heart2_inv_truncated, sorted_bijection)

DEFAULT_DEPTH = 64


class HypothesisUnmet(UserWarning):
    pass


# -- k-th minimum edge number ---------------------------------------------------

def psi_k_of_graph(g: Graph | TruncatedAtom, k: int) -> int:
    """The k-th smallest present edge index."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if isinstance(g, TruncatedAtom):
        present = g.present()
        if len(present) < k:
            raise UndefinedStatistic(f"only {len(present)} edges within depth {g.depth}; "
                                     "truncation too shallow")
        return present[k - 1]
    if not g.cofinite:
        present = sorted(g.support)
        if len(present) < k:
            raise UndefinedStatistic(f"finite graph has {len(present)} < {k} edges")
        return present[k - 1]
    seen = 0
    n = 0
    while seen < k:
        n += 1
        if n not in g.support:
            seen += 1
    return n


def psi_k_expect(k: int, p) -> Number:
    """Mean of the k-th minimum edge number under the constant measure mu_p: k/p."""
    p = as_number(p)
    if not 0 <= p <= 1:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if p == 0:
        raise DivergentExpectation("the empty graph is almost sure when p = 0")
    return k / p


def psi_k_series(k: int, p, terms: int) -> float:
    """Partial sum over n = k..terms of n * C(n-1, k-1) p^k (1-p)^(n-k)."""
    p = float(p)
    q = 1.0 - p
    return math.fsum(n * math.comb(n - 1, k - 1) * p ** k * q ** (n - k)
                     for n in range(k, terms + 1))


def psi_k_series_terms(k: int, p, tol: float = 1e-6, limit: int = 1_000_000) -> int:
    """Smallest N for which the partial sum is within ``tol`` of k/p."""
    target = k / float(p)
    p = float(p)
    q = 1.0 - p
    acc = []
    for n in range(k, limit + 1):
        acc.append(n * math.comb(n - 1, k - 1) * p ** k * q ** (n - k))
        if target - math.fsum(acc) < tol:
            return n
    raise DivergentExpectation(f"series not within {tol} after {limit} terms")


def truncation_failure_probability(k: int, p, depth: int) -> Fraction | float:
    """Probability that a depth-``depth`` truncation has fewer than k edges."""
    p = as_number(p)
    q = 1 - p
    return sum(math.comb(depth, j) * p ** j * q ** (depth - j) for j in range(k))


def _floor_log2(x: Fraction) -> int:
    """floor(log2 x) for rational x > 0."""
    # x lies in (2^(e-1), 2^(e+1)) for this e
    e = x.numerator.bit_length() - x.denominator.bit_length()
    if Fraction(2) ** e > x:
        e -= 1
    elif Fraction(2) ** (e + 1) <= x:
        e += 1
    return e


def f_k_value(x, k: int) -> int:
    """The recursion f_1(x) = -floor(log2 x), f_k(x) = f_1(x - sum_{i<k} 2^-f_i(x)).

    Works on the numeric value, so at dyadic rationals it follows the
    terminating expansion.  At x = 1 the recursion would give 0, which is not
    an edge index, so the domain is (0, 1); use :func:`f_k_dyadic` there.
    """
    x = Fraction(x.value if isinstance(x, DyadicValue) else x)
    if not 0 < x < 1:
        raise UndefinedStatistic(f"f_k needs x in (0, 1), got {x}")
    rest = x
    fs: list[int] = []
    for _ in range(k):
        if rest <= 0:
            raise UndefinedStatistic(f"{x} has fewer than {k} binary ones")
        f = -_floor_log2(rest)
        fs.append(f)
        rest = x - sum(Fraction(1, 1 << fi) for fi in fs)
    return fs[-1]


def f_k_dyadic(x: DyadicValue, k: int) -> int:
    """Position of the k-th binary 1 in the given expansion of x."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not isinstance(x, DyadicValue):
        x = DyadicValue.from_fraction(x)
    ones = x.set_positions
    if len(ones) >= k:
        return ones[k - 1]
    if x.tail == "zeros":
        raise UndefinedStatistic(f"{x} has only {len(ones)} binary ones")
    return len(x.bits) + (k - len(ones))


# -- norm expectations ----------------------------------------------------------

@dataclass(frozen=True)
class SeriesValue:
    value: float
    tail_bound: float


def norminf_expect(zeta: WeightSequence, f: Callable[[float], float], p,
                   terms: int = 64, f_bound: float | None = None) -> SeriesValue:
    """E[f(sup norm)] under mu_p as the series sum_n p (1-p)^(n-1) f(zeta at rank n).

    The tail bound is (1-p)^terms * sup|f|; when ``f_bound`` is omitted the
    supremum is taken over the evaluated terms.
    """
    p = float(p)
    if not 0 < p <= 1:
        raise ValueError(f"p must lie in (0, 1], got {p}")
    ranks = sorted_bijection(zeta, terms)
    vals = [f(float(zeta(n))) for n in ranks]
    s = math.fsum(p * (1 - p) ** (i) * v for i, v in enumerate(vals))
    bound = f_bound if f_bound is not None else max(abs(v) for v in vals)
    return SeriesValue(s, (1 - p) ** terms * bound)


@dataclass(frozen=True)
class Moments:
    mean: Number
    second_moment: Number
    variance: Number


def _as_assignment(p) -> ProbabilityAssignment:
    return p if isinstance(p, ProbabilityAssignment) else ProbabilityAssignment.constant(p)


def norm1_moments(phi: WeightSequence, p) -> Moments:
    """Mean, second moment and variance of the weighted edge count sum_{n in G} phi(n).

    Edges are independent, so mean = sum P(n) phi(n) and variance =
    sum P(n)(1 - P(n)) phi(n)^2; both tails beyond the tables are geometric.
    """
    P = _as_assignment(p)
    m = max(len(P.entries), len(phi.table))
    sq = phi.squared()
    d = P.default
    mean = sum(P(n) * phi(n) for n in range(1, m + 1)) + d * phi.tail_sum(m)
    var = sum(P(n) * (1 - P(n)) * sq(n) for n in range(1, m + 1)) + d * (1 - d) * sq.tail_sum(m)
    return Moments(mean, var + mean * mean, var)


@dataclass(frozen=True)
class ProductNormExpectation:
    value: float
    exponent: int
    definition_exponent: int
    hypothesis_met: bool

    @property
    def readings_differ(self) -> bool:
        return self.exponent != self.definition_exponent


def normx_expect(phi: MultWeightSequence, p, n_exponent: int | None = None,
                 tolerance: float = 1e-18) -> ProductNormExpectation:
    """E[(product norm)^n] = -1 + prod_n (1 - P(n) + P(n) phi(n)).

    ``n`` is the exponent built into the norm.  The hypothesis
    ||K_V||^n <= 2^n - 2 is checked for ``n_exponent`` (default: the norm's
    own exponent, for which it always holds); a failing check warns and is
    flagged on the result.
    """
    P = _as_assignment(p)
    n_def = phi.exponent
    n = n_def if n_exponent is None else n_exponent
    full = phi.total_product() - 1.0
    met = full ** (n / n_def) <= 2.0 ** n - 2.0
    if not met:
        warnings.warn(f"hypothesis ||K_V||^{n} <= 2^{n} - 2 fails", HypothesisUnmet, stacklevel=2)
    logs = []
    k = 0
    excess = phi.excess
    m = max(len(P.entries), len(excess.table))
    while k < m or float(P.default) * float(excess.tail_sum(k)) > tolerance:
        k += 1
        logs.append(math.log1p(float(P(k)) * float(excess(k))))
    return ProductNormExpectation(math.expm1(math.fsum(logs)), n, n_def, met)


# -- Monte Carlo ------------------------------------------------------------------

@dataclass(frozen=True)
class MCEstimate:
    mean: float
    std_error: float
    count: int
    depth: int
    seed: int
    undefined: int = 0

    def agrees(self, target: float, sigmas: float = 4.0) -> bool:
        return abs(self.mean - float(target)) <= sigmas * self.std_error

    def to_json(self) -> dict:
        return {"mean": self.mean, "std_error": self.std_error, "count": self.count,
                "depth": self.depth, "seed": self.seed, "undefined": self.undefined}


class Statistic:
    """A vectorized graph statistic on rows of sampled truncation bits.

    ``evaluate`` returns (values, valid) for a boolean array of shape
    (rows, depth); rows where the statistic is undefined are marked invalid.
    """

    name = "statistic"

    def evaluate(self, bits: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def __repr__(self):
        return f"<{self.name}>"


class Constant(Statistic):
    name = "constant"

    def __init__(self, c: float):
        self.c = float(c)

    def evaluate(self, bits):
        n = bits.shape[0]
        return np.full(n, self.c), np.ones(n, dtype=bool)


class PsiK(Statistic):
    name = "psi_k"

    def __init__(self, k: int):
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        self.k = k

    def evaluate(self, bits):
        cs = np.cumsum(bits, axis=1, dtype=np.int32)
        valid = cs[:, -1] >= self.k
        return (np.argmax(cs >= self.k, axis=1) + 1).astype(float), valid


def _row_sum(bits: np.ndarray, weights: np.ndarray) -> np.ndarray:
    # plain numpy reduction, no BLAS: summation order is fixed
    return np.where(bits, weights, 0.0).sum(axis=1)


class Norm1(Statistic):
    name = "norm1"

    def __init__(self, phi: WeightSequence, power: int = 1):
        self.phi = phi
        self.power = power

    def evaluate(self, bits):
        w = np.array([float(self.phi(n)) for n in range(1, bits.shape[1] + 1)])
        return _row_sum(bits, w) ** self.power, np.ones(bits.shape[0], dtype=bool)


class NormInf(Statistic):
    name = "norminf"

    def __init__(self, zeta: WeightSequence, f: Callable[[np.ndarray], np.ndarray] | None = None):
        self.zeta = zeta
        self.f = f

    def evaluate(self, bits):
        if bits.shape[1] < len(self.zeta.table):
            raise ValueError("truncation depth must cover the weight table")
        w = np.array([float(self.zeta(n)) for n in range(1, bits.shape[1] + 1)])
        vals = np.where(bits, w, 0.0).max(axis=1)
        valid = bits.any(axis=1)
        return (self.f(vals) if self.f else vals), valid


class NormX(Statistic):
    """Product norm; ``power`` equal to the norm's exponent gives prod(phi) - 1 directly."""

    name = "normx"

    def __init__(self, phi: MultWeightSequence, power: float = 1):
        self.phi = phi
        self.power = power

    def evaluate(self, bits):
        logw = np.array([self.phi.log_weight(n) for n in range(1, bits.shape[1] + 1)])
        base = np.expm1(_row_sum(bits, logw))
        n = self.phi.exponent
        vals = base if self.power == n else base ** (self.power / n)
        return vals, np.ones(bits.shape[0], dtype=bool)


def heart2_float(bits: np.ndarray) -> np.ndarray:
    """Base-2 norm of each truncation row, from its first 64 bits, as float64."""
    head = np.zeros((bits.shape[0], 64), dtype=bool)
    d = min(64, bits.shape[1])
    head[:, :d] = bits[:, :d]
    words = np.packbits(head, axis=1, bitorder="big").view(">u8").reshape(-1)
    return np.ldexp(words.astype(np.float64), -64)


class Heart2(Statistic):
    """f applied to the base-2 norm; non-finite values are excluded as null-set hits."""

    name = "heart2"

    def __init__(self, f: Callable[[np.ndarray], np.ndarray] | None = None):
        self.f = f

    def evaluate(self, bits):
        x = heart2_float(bits)
        if self.f is None:
            return x, np.ones(x.shape[0], dtype=bool)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            vals = np.asarray(self.f(x), dtype=float)
        return vals, np.isfinite(vals)


def _mean_and_se(values: np.ndarray) -> tuple[float, float]:
    n = values.shape[0]
    # shift by the first value; exact for constants, and fsum is order independent
    shift = float(values[0])
    dev = values - shift
    mean = shift + math.fsum(dev) / n
    if n < 2:
        return mean, 0.0
    centred = values - mean
    var = math.fsum(centred * centred) / (n - 1)
    return mean, math.sqrt(var / n)


def mc_values(stat: Statistic, p, depth: int, seed: int, count: int,
              threads: int | None = None) -> tuple[np.ndarray, int]:
    """Defined statistic values over a seeded sample, and the number excluded."""
    batch = sample(_as_assignment(p), depth, seed, count, threads)
    vals, oks = [], []
    for s in range(0, count, CHUNK):
        v, ok = stat.evaluate(batch.bits[s:s + CHUNK])
        vals.append(np.asarray(v, dtype=float))
        oks.append(ok)
    v, ok = np.concatenate(vals), np.concatenate(oks)
    return v[ok], int((~ok).sum())


def mc_expect(stat: Statistic, p, depth: int = DEFAULT_DEPTH, seed: int = 0,
              count: int = 200_000, threads: int | None = None) -> MCEstimate:
    values, undefined = mc_values(stat, p, depth, seed, count, threads)
    if values.size == 0:
        raise EstimatorFailure(f"{stat!r} undefined on all {count} samples")
    mean, se = _mean_and_se(values)
    return MCEstimate(mean, se, int(values.size), depth, seed, undefined)


@dataclass(frozen=True)
class VarianceEstimate:
    variance: float
    std_error: float
    count: int

    def agrees(self, target: float, sigmas: float = 4.0) -> bool:
        return abs(self.variance - float(target)) <= sigmas * self.std_error


def mc_variance(stat: Statistic, p, depth: int = DEFAULT_DEPTH, seed: int = 0,
                count: int = 200_000, threads: int | None = None) -> VarianceEstimate:
    """Sample variance with the large-sample standard error sqrt((m4 - s^4) / n)."""
    values, _ = mc_values(stat, p, depth, seed, count, threads)
    n = values.size
    if n < 2:
        raise EstimatorFailure("need at least two defined samples")
    mean, _ = _mean_and_se(values)
    c = values - mean
    c2 = c * c
    var = math.fsum(c2) / (n - 1)
    m4 = math.fsum(c2 * c2) / n
    return VarianceEstimate(var, math.sqrt(max(m4 - var * var, 0.0) / n), n)


# -- transfer to [0, 1] -------------------------------------------------------

@dataclass(frozen=True)
class TransferFunction:
    """A real function on [0, 1] with a vectorized evaluator and a deterministic integral."""

    name: str
    f: Callable[[np.ndarray], np.ndarray]
    integral: Callable[[], float]
    steps: tuple[tuple[Fraction, Fraction, Fraction], ...] | None = None

    def __call__(self, x):
        return self.f(x)


def poly_function(coeffs: Sequence[float], name: str | None = None) -> TransferFunction:
    """sum_i coeffs[i] x^i, integrated by adaptive quadrature."""
    c = np.array([float(a) for a in coeffs])

    def f(x):
        return np.polynomial.polynomial.polyval(x, c)

    def integral():
        return integrate.quad(lambda t: float(f(t)), 0.0, 1.0, epsabs=1e-13, epsrel=1e-13)[0]

    return TransferFunction(name or "poly:" + ":".join(map(str, coeffs)), f, integral)


def indicator_function(a, b) -> TransferFunction:
    """Indicator of [a, b]; exact integral, exact graph path when a, b are dyadic."""
    a, b = Fraction(as_number(a)), Fraction(as_number(b))
    if not 0 <= a <= b <= 1:
        raise ValueError(f"need 0 <= a <= b <= 1, got [{a}, {b}]")
    fa, fb = float(a), float(b)

    def f(x):
        return ((x >= fa) & (x <= fb)).astype(float)

    dyadic = all(v.denominator & (v.denominator - 1) == 0 for v in (a, b))
    return TransferFunction(f"indicator:{a}:{b}", f, lambda: float(b - a),
                            ((a, b, Fraction(1)),) if dyadic else None)


def _neg_floor_log2(x):
    with np.errstate(divide="ignore"):
        return -np.floor(np.log2(x))


def _neg_floor_log2_integral(terms: int = 200) -> float:
    # the function equals m on [2^-m, 2^-(m-1)); the neglected tail is (terms+2) 2^-terms
    return float(sum(Fraction(m, 1 << m) for m in range(1, terms + 1)))


NEG_FLOOR_LOG2 = TransferFunction("neg-floor-log2", _neg_floor_log2, _neg_floor_log2_integral)


def transfer_function(spec: str) -> TransferFunction:
    """Look up a registry function: identity, square, poly:c0:c1:..., indicator:a:b,
    neg-floor-log2."""
    name, _, rest = spec.partition(":")
    if name == "identity":
        return poly_function([0, 1], "identity")
    if name == "square":
        return poly_function([0, 0, 1], "square")
    if name == "poly":
        return poly_function([float(as_number(c)) for c in rest.split(":")])
    if name == "indicator":
        a, _, b = rest.partition(":")
        return indicator_function(a, b)
    if name == "neg-floor-log2":
        return NEG_FLOOR_LOG2
    raise KeyError(f"unknown function {spec!r}")


def dyadic_blocks(a: Fraction, b: Fraction) -> list[tuple[int, int]]:
    """Cover [a, b) by maximal aligned dyadic intervals [m 2^-j, (m+1) 2^-j).

    Returns (j, m) pairs; a and b must be dyadic.
    """
    out = []
    while a < b:
        j = a.denominator.bit_length() - 1 if a else 0
        while Fraction(1, 1 << j) > b - a:
            j += 1
        m = a * (1 << j)
        out.append((j, int(m)))
        a += Fraction(1, 1 << j)
    return out


def block_cylinder(j: int, m: int) -> Cylinder:
    """Graphs whose first j digits spell m: the preimage of [m 2^-j, (m+1) 2^-j)."""
    req = {k for k in range(1, j + 1) if (m >> (j - k)) & 1}
    return Cylinder(frozenset(range(1, j + 1)) - req, frozenset(req))


def exact_step_expectation(steps, p: ProbabilityAssignment = HAAR) -> Number:
    """E[f(heart2)] for a step function with dyadic breakpoints, by cylinder measures.

    ``steps`` lists (a, b, value) triples; endpoints are null sets for
    atomless measures such as Haar.
    """
    total = Fraction(0)
    for a, b, v in steps:
        for j, m in dyadic_blocks(Fraction(a), Fraction(b)):
            total += v * cylinder_measure(block_cylinder(j, m), p)
    return total


@dataclass(frozen=True)
class TransferResult:
    graph_side: MCEstimate
    interval_side: float
    exact_graph_side: Fraction | None = None
    exact_interval_side: Fraction | None = None
    nonfinite_hits: int = 0

    @property
    def difference(self) -> float:
        return abs(self.graph_side.mean - self.interval_side)

    def agrees(self, sigmas: float = 4.0) -> bool:
        return self.graph_side.agrees(self.interval_side, sigmas)


def change_of_variables(f: TransferFunction, depth: int = DEFAULT_DEPTH, seed: int = 0,
                        count: int = 200_000, threads: int | None = None) -> TransferResult:
    """Both sides of E_Haar[f(heart2)] = integral_0^1 f(x) dx.

    The graph side samples Haar-random truncations; the interval side is
    computed deterministically.  Step functions with dyadic breakpoints also
    get the exact cylinder-measure value and the exact interval length sum.
    """
    mc = mc_expect(Heart2(f.f), HAAR, depth, seed, count, threads)
    exact_graph = exact_interval = None
    if f.steps is not None:
        exact_graph = exact_step_expectation(f.steps)
        exact_interval = sum((v * (b - a) for a, b, v in f.steps), Fraction(0))
    return TransferResult(mc, f.integral(), exact_graph, exact_interval, mc.undefined)


def converse_quadrature(g: Callable[[Graph], float], nbits: int) -> float:
    """Midpoint rule for integral_0^1 g(inverse heart2(x)) dx on 2^nbits cells.

    The inverse is taken on the finite branch, which differs from any other
    choice only on a null set.
    """
    vals = []
    for m in range(1 << nbits):
        x = Fraction(2 * m + 1, 1 << (nbits + 1))
        graph, _ = heart2_inv_truncated(x, nbits + 1)
        vals.append(float(g(graph)))
    return math.fsum(vals) / (1 << nbits)


@dataclass
class StatisticSpec:
    """Closed form plus Monte Carlo statistic for a registry entry."""

    statistic: Statistic
    closed_form: Callable[[ProbabilityAssignment], Number]
    params: dict = field(default_factory=dict)


def statistic_from_registry(name: str, **params) -> StatisticSpec:
    """Registry used by the command line: psi_k, norm1, norm1_sq, norminf, normx, heart2."""
    if name == "psi_k":
        k = int(params.get("k", 1))

        def closed(P):
            if not P.is_constant:
                raise ValueError("psi_k closed form needs a constant probability")
            return psi_k_expect(k, P.default)

        return StatisticSpec(PsiK(k), closed, {"k": k})
    if name in ("norm1", "norm1_sq"):
        phi = params.get("phi") or WeightSequence.geometric(2)
        power = 1 if name == "norm1" else 2
        return StatisticSpec(Norm1(phi, power),
                             lambda P: getattr(norm1_moments(phi, P),
                                               "mean" if power == 1 else "second_moment"),
                             {"phi": phi.to_json()})
    if name == "norminf":
        zeta = params.get("zeta") or params.get("phi") or WeightSequence.geometric(2)

        def closed(P):
            if not P.is_constant:
                raise ValueError("norminf closed form needs a constant probability")
            return norminf_expect(zeta, lambda v: v, P.default, 128).value

        return StatisticSpec(NormInf(zeta), closed, {"zeta": zeta.to_json()})
    if name == "normx":
        phi = params.get("mphi") or MultWeightSequence()
        return StatisticSpec(NormX(phi, phi.exponent),
                             lambda P: normx_expect(phi, P).value, {"phi": phi.to_json()})
    if name == "heart2":
        f = params.get("f") or transfer_function("identity")

        def closed(P):
            if P != HAAR:
                raise ValueError("the interval integral applies to the Haar measure only")
            return f.integral()

        return StatisticSpec(Heart2(f.f), closed, {"f": f.name})
    raise KeyError(f"unknown statistic {name!r}")
