"""Walsh characters and Fourier analysis on graph space.

Functions on depth-n truncations are stored as length-2^n tables indexed by
the atom mask (bit k-1 set iff edge k is present).  Spectra use the same
indexing for the character's edge set.  The forward transform carries the
factor 2^-n, so coefficients are inner products against characters under the
Haar probability measure.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidFunction, ResourceLimit
from .graphs import Graph, MAX_ATOM_DEPTH

_DEPTH_HEADER = struct.Struct("<Q")


def walsh_eval(e: Graph, g: Graph) -> int:
    """chi_E(G) = (-1)^|E n G| for a finite edge set E."""
    if e.cofinite:
        raise ValueError("characters are indexed by finite graphs")
    return -1 if sum(1 for n in e.support if n in g) % 2 else 1


@dataclass(frozen=True)
class WalshCharacter:
    edges: Graph

    def __post_init__(self):
        if self.edges.cofinite:
            raise ValueError("characters are indexed by finite graphs")

    def __call__(self, g: Graph) -> int:
        return walsh_eval(self.edges, g)


def dual_roundtrip(chi: Callable[[Graph], int], depth: int | None = None) -> Graph:
    """Recover E from a character by probing single edges: E = {e : chi({e}) = -1}."""
    if depth is None:
        if not isinstance(chi, WalshCharacter):
            raise ValueError("probe depth is required for a general character")
        depth = chi.edges.max_support
    return Graph.finite(n for n in range(1, depth + 1) if chi(Graph.finite([n])) == -1)


def rademacher(k: int, x) -> int:
    """The k-th Rademacher function at x: (-1) to the k-th binary digit of x."""
    x = Fraction(x)
    return -1 if (x.numerator << k) // x.denominator % 2 else 1


# -- transforms --------------------------------------------------------------

def _check_depth(depth: int) -> None:
    if depth > MAX_ATOM_DEPTH:
        raise ResourceLimit(f"depth {depth} exceeds transform limit {MAX_ATOM_DEPTH}")


def _depth_of(n: int) -> int:
    depth = n.bit_length() - 1
    if n != 1 << depth:
        raise ValueError(f"table length {n} is not a power of two")
    return depth


def hadamard(values: np.ndarray) -> np.ndarray:
    """Unnormalized transform along axis 0: out[S] = sum_G (-1)^|S n G| values[G].

    Integer input stays integer, so results are exact.
    """
    a = np.array(values, copy=True)
    n = a.shape[0]
    depth = _depth_of(n)
    _check_depth(depth)
    rest = a.shape[1:]
    for h in range(depth):
        view = a.reshape((n >> (h + 1), 2, 1 << h) + rest)
        x = view[:, 0].copy()
        y = view[:, 1]
        view[:, 0] += y
        view[:, 1] = x - y
    return a


@dataclass
class WalshSpectrum:
    depth: int
    coeffs: np.ndarray

    def coefficient(self, edges: Graph) -> float:
        return float(self.coeffs[edges.mask(self.depth)])

    def energy(self) -> float:
        return math.fsum(self.coeffs * self.coeffs)

    def to_bytes(self) -> bytes:
        return write_table(self.coeffs)

    @classmethod
    def from_bytes(cls, data: bytes) -> WalshSpectrum:
        table = read_table(data)
        return cls(_depth_of(table.size), table)


def wht(f: Sequence[float] | np.ndarray, depth: int | None = None) -> WalshSpectrum:
    """Walsh coefficients 2^-n sum_G f(G) chi_S(G) of a depth-n table."""
    arr = np.asarray(f, dtype=float)
    d = _depth_of(arr.shape[0])
    if depth is not None and depth != d:
        raise ValueError(f"table of length {arr.shape[0]} does not have depth {depth}")
    _check_depth(d)
    return WalshSpectrum(d, hadamard(arr) / float(1 << d))


def inverse_wht(spectrum: WalshSpectrum) -> np.ndarray:
    return hadamard(np.asarray(spectrum.coeffs, dtype=float))


def convolve(f: np.ndarray, g: np.ndarray) -> np.ndarray:
    """(f * g)(x) = 2^-n sum_y f(y) g(x ^ y), computed as a pointwise spectral product."""
    sf, sg = wht(f), wht(g)
    return inverse_wht(WalshSpectrum(sf.depth, sf.coeffs * sg.coeffs))


def character_table(depth: int) -> np.ndarray:
    """Integer matrix chi_S(G) with rows S and columns G."""
    _check_depth(depth)
    idx = np.arange(1 << depth, dtype=np.int64)
    parity = np.zeros((1 << depth, 1 << depth), dtype=np.int64)
    for k in range(depth):
        bit = (idx >> k) & 1
        parity ^= np.outer(bit, bit)
    return 1 - 2 * parity


def write_table(values: np.ndarray) -> bytes:
    arr = np.asarray(values, dtype="<f8")
    return _DEPTH_HEADER.pack(_depth_of(arr.size)) + arr.tobytes()


def read_table(data: bytes) -> np.ndarray:
    (depth,) = _DEPTH_HEADER.unpack_from(data)
    _check_depth(depth)
    arr = np.frombuffer(data, dtype="<f8", offset=_DEPTH_HEADER.size)
    if arr.size != 1 << depth:
        raise ValueError(f"expected {1 << depth} values for depth {depth}, found {arr.size}")
    return arr.astype(float)


# -- positive definite functions -------------------------------------------------

@dataclass(frozen=True)
class FiniteSupportMeasure:
    """A probability measure on finitely many finite graphs."""

    support: tuple[Graph, ...]
    weights: tuple

    def __post_init__(self):
        support = tuple(self.support)
        weights = tuple(self.weights)
        if len(support) != len(weights) or not support:
            raise ValueError("support and weights must be nonempty and of equal length")
        if any(g.cofinite for g in support):
            raise ValueError("the dual group consists of finite graphs")
        if len(set(support)) != len(support):
            raise ValueError("support graphs must be distinct")
        if any(w < 0 for w in weights):
            raise ValueError("weights must be nonnegative")
        total = sum(weights)
        exact = all(isinstance(w, (int, Fraction)) for w in weights)
        if (total != 1) if exact else not math.isclose(total, 1.0, abs_tol=1e-12):
            raise ValueError(f"weights sum to {total}, not 1")
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "weights", weights)

    def to_json(self) -> dict:
        return {"support": [g.to_json() for g in self.support],
                "weights": [str(w) if isinstance(w, Fraction) else w for w in self.weights]}

    @classmethod
    def from_json(cls, data: dict) -> FiniteSupportMeasure:
        weights = tuple(Fraction(w) if isinstance(w, (str, int)) else float(w)
                        for w in data["weights"])
        return cls(tuple(Graph.from_json(g) for g in data["support"]), weights)


@dataclass(frozen=True)
class PositiveDefiniteFunction:
    """f(G) = sum_H mu(H) chi_H(G)."""

    measure: FiniteSupportMeasure

    def __call__(self, g: Graph):
        return sum(w * walsh_eval(h, g) for h, w in zip(self.measure.support, self.measure.weights))

    def table(self, depth: int) -> np.ndarray:
        """Values on the depth-n atoms (support must lie within depth)."""
        spec = np.zeros(1 << depth)
        for h, w in zip(self.measure.support, self.measure.weights):
            if h.max_support > depth:
                raise ValueError(f"support graph {h} exceeds depth {depth}")
            spec[h.mask(depth)] += float(w)
        return hadamard(spec)


def bochner_synthesize(mu: FiniteSupportMeasure) -> PositiveDefiniteFunction:
    return PositiveDefiniteFunction(mu)


def bochner_coefficients(values: np.ndarray) -> WalshSpectrum:
    """Recover the measure from a depth-n table of a positive definite function.

    At finite depth these are the Walsh coefficients; they are all nonnegative
    exactly when the table is positive definite on the depth-n quotient.
    """
    return wht(values)


@dataclass(frozen=True)
class GramReport:
    size: int
    min_eigenvalue: float
    psd: bool
    tolerance: float

    def to_json(self) -> dict:
        return {"size": self.size, "min_eigenvalue": self.min_eigenvalue, "psd": self.psd,
                "tolerance": self.tolerance}


def gram_matrix(f: Callable[[Graph], float], graphs: Sequence[Graph]) -> np.ndarray:
    n = len(graphs)
    m = np.empty((n, n))
    cache: dict[Graph, float] = {}
    for i, gi in enumerate(graphs):
        for j in range(i, n):
            d = gi ^ graphs[j]
            if d not in cache:
                v = float(f(d))
                if not math.isfinite(v):
                    raise InvalidFunction(f"f({d}) = {v} is not finite")
                cache[d] = v
            m[i, j] = m[j, i] = cache[d]
    return m


def gram_check(f: Callable[[Graph], float], graphs: Sequence[Graph],
               tolerance: float = 1e-9) -> GramReport:
    """Is the matrix (f(G_i ^ G_j)) positive semidefinite, up to ``tolerance``?"""
    if not graphs:
        raise ValueError("need at least one graph")
    m = gram_matrix(f, graphs)
    lo = float(np.linalg.eigvalsh(m)[0])
    tol = tolerance
    if len(graphs) > 100:
        tol *= max(1.0, float(np.linalg.norm(m, 2)))
    return GramReport(len(graphs), lo, lo >= -tol, tol)
