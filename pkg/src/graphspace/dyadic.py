"""Exact binary expansions of numbers in [0, 1].

A :class:`DyadicValue` is a finite bit prefix followed by an infinite tail of
all zeros or all ones.  Equality and hashing are by numeric value, so the two
expansions 0.1000... and 0.0111... of 1/2 compare equal; use
:meth:`DyadicValue.same_expansion` to distinguish them.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Literal

from .errors import NonDyadic

Tail = Literal["zeros", "ones"]


@dataclass(frozen=True, eq=False)
class DyadicValue:
    bits: tuple[int, ...] = ()
    tail: Tail = "zeros"

    def __post_init__(self):
        if self.tail not in ("zeros", "ones"):
            raise ValueError(f"tail must be 'zeros' or 'ones', got {self.tail!r}")
        bits = tuple(int(b) for b in self.bits)
        if any(b not in (0, 1) for b in bits):
            raise ValueError("bits must be 0 or 1")
        # canonical: no trailing digits equal to the tail digit
        t = 1 if self.tail == "ones" else 0
        end = len(bits)
        while end and bits[end - 1] == t:
            end -= 1
        object.__setattr__(self, "bits", bits[:end])

    @property
    def value(self) -> Fraction:
        n = len(self.bits)
        num = int("".join(map(str, self.bits)), 2) if n else 0
        if self.tail == "ones":
            num += 1
        return Fraction(num, 1 << n)

    def __eq__(self, other):
        if isinstance(other, DyadicValue):
            return self.value == other.value
        if isinstance(other, (int, Fraction)):
            return self.value == other
        return NotImplemented

    def __hash__(self):
        return hash(self.value)

    def __float__(self):
        return float(self.value)

    def __lt__(self, other):
        return self.value < _value_of(other)

    def __le__(self, other):
        return self.value <= _value_of(other)

    def same_expansion(self, other: DyadicValue) -> bool:
        return self.bits == other.bits and self.tail == other.tail

    def digit(self, k: int) -> int:
        """Coefficient of 2^-k in this expansion (k >= 1)."""
        if k < 1:
            raise ValueError("digit positions start at 1")
        if k <= len(self.bits):
            return self.bits[k - 1]
        return 1 if self.tail == "ones" else 0

    def digits(self, n: int) -> tuple[int, ...]:
        return tuple(self.digit(k) for k in range(1, n + 1))

    @property
    def set_positions(self) -> tuple[int, ...]:
        """Positions of the 1 digits within the explicit prefix."""
        return tuple(k for k, b in enumerate(self.bits, 1) if b)

    def terminating(self) -> DyadicValue:
        """The zeros-tail expansion of the same value (not defined for 1)."""
        if self.tail == "zeros":
            return self
        if not self.bits:
            raise NonDyadic("1 has no terminating expansion inside [0, 1)")
        return DyadicValue.from_fraction(self.value)

    def nonterminating(self) -> DyadicValue:
        """The ones-tail expansion of the same value (not defined for 0)."""
        if self.tail == "ones":
            return self
        if not self.bits:
            raise NonDyadic("0 has no expansion ending in ones")
        last = len(self.bits)
        return DyadicValue(self.bits[: last - 1] + (0,), "ones")

    @classmethod
    def from_fraction(cls, x) -> DyadicValue:
        """Exact expansion of a dyadic rational x in [0, 1].

        The terminating form is returned, except for 1 which only has the
        all-ones expansion.
        """
        x = Fraction(x)
        if not 0 <= x <= 1:
            raise ValueError(f"value {x} outside [0, 1]")
        if x == 1:
            return cls((), "ones")
        den = x.denominator
        if den & (den - 1):
            raise NonDyadic(f"{x} is not a dyadic rational")
        n = den.bit_length() - 1
        return cls(tuple(int(c) for c in format(x.numerator, f"0{n}b")) if n else ())

    @classmethod
    def truncate(cls, x, nbits: int) -> tuple[DyadicValue, bool]:
        """First ``nbits`` binary digits of x in [0, 1) and whether anything was dropped."""
        x = Fraction(x)
        if not 0 <= x < 1:
            raise ValueError(f"value {x} outside [0, 1)")
        scaled = x * (1 << nbits)
        head = scaled.numerator // scaled.denominator
        bits = tuple(int(c) for c in format(head, f"0{nbits}b")) if nbits else ()
        return cls(bits), scaled != head

    @classmethod
    def parse(cls, text: str) -> DyadicValue:
        """Parse a binary string such as ``0.011`` or ``0.0(1)`` (ones tail)."""
        s = text.strip()
        tail: Tail = "zeros"
        if s.endswith("(1)"):
            tail, s = "ones", s[:-3]
        elif s.endswith("(0)"):
            s = s[:-3]
        if s in ("1", "1.0", "1.") and tail == "zeros":
            return cls((), "ones")
        if s.startswith("0."):
            s = s[2:]
        elif s.startswith("."):
            s = s[1:]
        elif s == "0":
            s = ""
        else:
            raise ValueError(f"cannot parse binary fraction {text!r}")
        if any(c not in "01" for c in s):
            raise ValueError(f"cannot parse binary fraction {text!r}")
        return cls(tuple(int(c) for c in s), tail)

    def to_json(self) -> dict:
        return {"bits": "".join(map(str, self.bits)), "tail": self.tail}

    @classmethod
    def from_json(cls, data: dict) -> DyadicValue:
        return cls(tuple(int(c) for c in data.get("bits", "")), data.get("tail", "zeros"))

    def __str__(self):
        body = "".join(map(str, self.bits))
        return f"0.{body}" + ("(1)" if self.tail == "ones" else "")


def _value_of(x) -> Fraction:
    return x.value if isinstance(x, DyadicValue) else Fraction(x)
