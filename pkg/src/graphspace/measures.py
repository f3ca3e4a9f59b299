"""Product measures on graph space.

``mu_P`` makes each edge n present independently with probability ``P(n)``.
The constant case ``P = p`` is the Erdos-Renyi measure and ``p = 1/2`` is the
Haar measure of the group (graph space, symmetric difference).
"""
from __future__ import annotations

import os
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, prod
from typing import Iterable, Iterator

import numpy as np

from .dyadic import DyadicValue
from .errors import ResourceLimit, UnsupportedExactRadius
from .graphs import FULL, Cylinder, Graph, TruncatedAtom, _EmptyCylinder, cyl_translate
from .metrics import Number, as_number, number_to_json

MAX_SAMPLE_CELLS = 1 << 28
CHUNK = 8192
_FRAME_HEADER = struct.Struct("<QQQ")


@dataclass(frozen=True)
class ProbabilityAssignment:
    """Edge probabilities: ``entries[n-1]`` for n <= len(entries), ``default`` after."""

    entries: tuple[Number, ...] = ()
    default: Number = Fraction(1, 2)

    def __post_init__(self):
        entries = tuple(as_number(e) for e in self.entries)
        default = as_number(self.default)
        for p in entries + (default,):
            if not 0 <= p <= 1:
                raise ValueError(f"probability {p} outside [0, 1]")
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "default", default)

    @classmethod
    def constant(cls, p) -> ProbabilityAssignment:
        return cls((), p)

    @property
    def is_constant(self) -> bool:
        return not self.entries

    @property
    def is_rational(self) -> bool:
        return all(isinstance(p, Fraction) for p in self.entries + (self.default,))

    def __call__(self, n: int) -> Number:
        if n < 1:
            raise ValueError(f"edge index must be >= 1, got {n}")
        return self.entries[n - 1] if n <= len(self.entries) else self.default

    def to_json(self) -> dict:
        if self.is_constant:
            return {"kind": "constant", "p": number_to_json(self.default)}
        return {"kind": "table", "entries": [number_to_json(e) for e in self.entries],
                "default": number_to_json(self.default)}

    @classmethod
    def from_json(cls, data: dict) -> ProbabilityAssignment:
        if data["kind"] == "constant":
            return cls.constant(data["p"])
        return cls(tuple(data["entries"]), data.get("default", "1/2"))


HAAR = ProbabilityAssignment.constant(Fraction(1, 2))


def _product(factors: Iterable[Number]) -> Number:
    factors = list(factors)
    if all(isinstance(f, Fraction) for f in factors):
        return prod(factors, start=Fraction(1))
    # exact product of the binary floats, rounded once
    return float(prod((Fraction(f) for f in factors), start=Fraction(1)))


def cylinder_measure(a: Cylinder | _EmptyCylinder, p: ProbabilityAssignment) -> Number:
    """Product of (1 - P) over forbidden indices and P over required ones."""
    if isinstance(a, _EmptyCylinder):
        return Fraction(0) if p.is_rational else 0.0
    return _product([1 - p(i) for i in sorted(a.forbidden)] + [p(i) for i in sorted(a.required)])


def point_mass(g: Graph, p: ProbabilityAssignment) -> Number:
    """Measure of the single point ``g``.

    Zero unless the default probability is 0 or 1, in which case all but
    finitely many factors equal 1 or some factor vanishes.
    """
    zero = Fraction(0) if p.is_rational else 0.0
    d = p.default
    if 0 < d < 1:
        return zero
    # beyond the table every factor is 1 exactly when membership matches d
    if (d == 1) != g.cofinite:
        return zero
    top = max(len(p.entries), g.max_support)
    return _product(p(n) if n in g else 1 - p(n) for n in range(1, top + 1))


@dataclass(frozen=True)
class BallDecomposition:
    """A ball written as disjoint cylinders, minus and plus finitely many points."""

    cylinders: tuple[Cylinder, ...] = ()
    removed: tuple[Graph, ...] = ()
    added: tuple[Graph, ...] = ()

    def contains(self, g: Graph) -> bool:
        if g in self.added:
            return True
        if g in self.removed:
            return False
        return any(c.contains(g) for c in self.cylinders)

    def measure(self, p: ProbabilityAssignment) -> Number:
        total = sum((cylinder_measure(c, p) for c in self.cylinders), Fraction(0))
        total -= sum((point_mass(g, p) for g in self.removed), Fraction(0))
        total += sum((point_mass(g, p) for g in self.added), Fraction(0))
        return total

    def translate(self, g: Graph) -> BallDecomposition:
        return BallDecomposition(tuple(cyl_translate(c, g) for c in self.cylinders),
                                 tuple(h ^ g for h in self.removed),
                                 tuple(h ^ g for h in self.added))


def _as_radius(radius) -> DyadicValue:
    return radius if isinstance(radius, DyadicValue) else DyadicValue.from_fraction(radius)


def ball_decomposition(center: Graph, radius, closed: bool = False) -> BallDecomposition:
    """Decompose a dyadic-metric ball into cylinders plus a finite point set.

    For radius 2^-n1 + ... + 2^-nk (n1 < ... < nk) about the empty graph, the
    graphs of norm below the radius are those whose expansion first drops
    below the radius at some n_j: that is the cylinder fixing indices 1..n_j to
    {n1, ..., n_(j-1)}.  The union of these cylinders also contains the one
    co-finite graph of norm exactly equal to the radius; the closed ball
    additionally contains the finite graph {n1, ..., nk}.  Everything is then
    translated to ``center``.
    """
    r = _as_radius(radius)
    v = r.value
    if v == 1:
        # every graph is within distance 1; only center ^ K_V is at distance exactly 1
        base = BallDecomposition((Cylinder(),), () if closed else (FULL,))
        return base.translate(center)
    if r.tail == "ones":
        raise UnsupportedExactRadius(f"radius {r} has an expansion ending in ones; "
                                     "use ball_measure_bounds")
    if v == 0:
        return BallDecomposition(added=(center,) if closed else ())
    positions = r.set_positions
    cylinders = []
    for j, n in enumerate(positions):
        prefix = frozenset(positions[:j])
        cylinders.append(Cylinder(frozenset(range(1, n + 1)) - prefix, prefix))
    last = positions[-1]
    boundary = Graph.co_finite(set(range(1, last + 1)) - set(positions[:-1]))
    added = (Graph.finite(positions),) if closed else ()
    return BallDecomposition(tuple(cylinders), () if closed else (boundary,),
                             added).translate(center)


def ball_measure_haar(center: Graph, radius, kind: str = "open") -> Fraction:
    """Haar measure of a ball, summed from its cylinder decomposition."""
    if kind not in ("open", "closed"):
        raise ValueError(f"kind must be 'open' or 'closed', got {kind!r}")
    return ball_decomposition(center, radius, kind == "closed").measure(HAAR)


def ball_measure_bounds(center: Graph, radius, nbits: int,
                        kind: str = "open") -> tuple[Fraction, Fraction]:
    """Certified bracket on the Haar measure of a ball of arbitrary radius in [0, 1].

    The radius is squeezed between its ``nbits``-digit binary truncation and
    that truncation plus 2^-nbits; ball measures are monotone in the radius.
    """
    x = Fraction(radius.value if isinstance(radius, DyadicValue) else radius)
    if not 0 <= x <= 1:
        raise ValueError(f"radius {x} outside [0, 1]")
    if x == 1:
        m = ball_measure_haar(center, 1, kind)
        return m, m
    low, residual = DyadicValue.truncate(x, nbits)
    lo = ball_measure_haar(center, low, kind)
    if not residual:
        return lo, lo
    high = min(low.value + Fraction(1, 1 << nbits), Fraction(1))
    return lo, ball_measure_haar(center, high, kind)


@dataclass(frozen=True)
class AtomProfile:
    pi: tuple[Number, ...]
    g_p_prefix: tuple[int, ...]


def atom_mass_profile(p: ProbabilityAssignment, depth: int) -> AtomProfile:
    """Partial products pi_n of max(P, 1 - P) and the heaviest atom's prefix.

    ``pi_n`` bounds the mass of every atom at depth n, hence every point mass;
    the heaviest point is the graph of edges with P >= 1/2.
    """
    if depth < 1:
        raise ValueError(f"depth must be >= 1, got {depth}")
    running: Number = Fraction(1) if p.is_rational else 1.0
    pis = []
    for n in range(1, depth + 1):
        q = p(n)
        running = running * max(q, 1 - q)
        pis.append(running)
    return AtomProfile(tuple(pis), tuple(int(p(n) >= Fraction(1, 2)) for n in range(1, depth + 1)))


# -- sampling --------------------------------------------------------------

def _thresholds(p: ProbabilityAssignment, depth: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-position uint64 cutoffs: bit is set when the random word is below the cutoff."""
    cut = np.zeros(depth, dtype=np.uint64)
    always = np.zeros(depth, dtype=bool)
    for k in range(depth):
        q = Fraction(p(k + 1))
        if q == 1:
            always[k] = True
        else:
            cut[k] = int(q * (1 << 64))
    return cut, always


def _words_per_sample(depth: int) -> int:
    return 4 * ceil(depth / 4)


def _sample_block(seed: int, start: int, stop: int, cut: np.ndarray,
                  always: np.ndarray) -> np.ndarray:
    depth = cut.shape[0]
    w = _words_per_sample(depth)
    # word (i, k) sits at Philox counter block (i*w + k) // 4, so rows do not
    # depend on how the index range is split
    gen = np.random.Philox(key=seed, counter=[start * w // 4, 0, 0, 0])
    words = gen.random_raw((stop - start) * w).reshape(stop - start, w)[:, :depth]
    return (words < cut) | always


def thread_count() -> int:
    env = os.environ.get("GRAPHSPACE_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass
class SampleBatch:
    depth: int
    seed: int
    count: int
    bits: np.ndarray = field(repr=False)

    def atoms(self) -> Iterator[TruncatedAtom]:
        weights = [1 << k for k in range(self.depth)]
        for row in self.bits:
            yield TruncatedAtom(self.depth, sum(w for w, b in zip(weights, row) if b))

    def to_bytes(self) -> bytes:
        packed = np.packbits(self.bits, axis=1, bitorder="little")
        return _FRAME_HEADER.pack(self.depth, self.count, self.seed) + packed.tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> SampleBatch:
        depth, count, seed = _FRAME_HEADER.unpack_from(data)
        row = ceil(depth / 8)
        packed = np.frombuffer(data, dtype=np.uint8, offset=_FRAME_HEADER.size)
        if packed.size != row * count:
            raise ValueError("sample frame length does not match its header")
        bits = np.unpackbits(packed.reshape(count, row), axis=1, count=depth,
                             bitorder="little").astype(bool)
        return cls(depth, seed, count, bits)

    def to_json(self) -> dict:
        return {"depth": self.depth, "seed": self.seed, "count": self.count,
                "rows": ["".join("1" if b else "0" for b in row) for row in self.bits]}

    @classmethod
    def from_json(cls, data: dict) -> SampleBatch:
        bits = np.array([[c == "1" for c in row] for row in data["rows"]], dtype=bool)
        return cls(data["depth"], data["seed"], data["count"],
                   bits.reshape(data["count"], data["depth"]))


def sample(p: ProbabilityAssignment, depth: int, seed: int, count: int,
           threads: int | None = None) -> SampleBatch:
    """Draw ``count`` independent depth-``depth`` truncations from mu_P.

    Bit k of sample i is driven by the Philox word at position (i, k) of the
    stream keyed by ``seed``, so output is identical for any thread count.
    """
    if depth < 1 or count < 1:
        raise ValueError("depth and count must be positive")
    if depth * count > MAX_SAMPLE_CELLS:
        raise ResourceLimit(f"{depth} x {count} bits exceeds the {MAX_SAMPLE_CELLS} cell budget")
    if not 0 <= seed < 1 << 64:
        raise ValueError(f"seed must fit in an unsigned 64-bit integer, got {seed}")
    cut, always = _thresholds(p, depth)
    blocks = [(s, min(s + CHUNK, count)) for s in range(0, count, CHUNK)]
    workers = min(threads or thread_count(), len(blocks))
    if workers <= 1:
        parts = [_sample_block(seed, s, e, cut, always) for s, e in blocks]
    else:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda b: _sample_block(seed, b[0], b[1], cut, always), blocks))
    return SampleBatch(depth, seed, count, np.concatenate(parts, axis=0))
