"""Exact dyadic arithmetic on finitely representable reals.

A value is stored as ``sign * mant / 2**depth`` with ``mant`` a non-negative
python int, so carry-free addition is one XOR on aligned mantissas.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Integral, Real


@dataclass(frozen=True)
class DyadicNumber:
    """sign * mant * 2**-depth, with depth the fractional bit budget."""

    sign: int
    mant: int
    depth: int

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if self.mant < 0 or self.depth < 0:
            raise ValueError("mantissa and depth must be non-negative")

    @property
    def frac_depth(self) -> int:
        return self.depth

    @property
    def bits(self) -> dict:
        """Map exponent -> 1 for every set bit of |x|."""
        out = {}
        m, e = self.mant, -self.depth
        while m:
            if m & 1:
                out[e] = 1
            m >>= 1
            e += 1
        return out

    def bit(self, i: int) -> int:
        """Digit x_i of |x| in ``|x| = sum x_i 2**i``."""
        k = i + self.depth
        if k < 0:
            return 0
        return (self.mant >> k) & 1

    def value(self) -> Fraction:
        return self.sign * Fraction(self.mant, 1 << self.depth)

    def __float__(self):
        return float(self.value())

    def __neg__(self):
        if self.mant == 0:
            return self
        return DyadicNumber(-self.sign, self.mant, self.depth)

    def __abs__(self):
        return DyadicNumber(1, self.mant, self.depth)

    def __eq__(self, other):
        if isinstance(other, DyadicNumber):
            return self.value() == other.value()
        if isinstance(other, (Real, Fraction)):
            return self.value() == Fraction(other)
        return NotImplemented

    def __hash__(self):
        return hash(self.value())

    def __xor__(self, other):
        return dyadic_add(self, other)

    def is_negative(self) -> bool:
        return self.sign < 0 and self.mant != 0

    def integer_part(self) -> int:
        """[|x|], the integer part of the magnitude."""
        return self.mant >> self.depth

    def fractional_part(self) -> "DyadicNumber":
        return DyadicNumber(1, self.mant & ((1 << self.depth) - 1), self.depth)

    def rescale(self, depth: int) -> int:
        """Magnitude as an integer mantissa at a deeper (or equal) depth."""
        if depth < self.depth:
            raise ValueError("cannot rescale to a shallower depth")
        return self.mant << (depth - self.depth)

    def __repr__(self):
        s = "-" if self.is_negative() else ""
        return f"DyadicNumber({s}{self.mant}/2^{self.depth})"


def to_dyadic(x, frac_depth: int) -> DyadicNumber:
    """Exact binary expansion of a non-negative dyadic rational.

    ``x * 2**frac_depth`` must be an integer.
    """
    if frac_depth < 0:
        raise ValueError("frac_depth must be non-negative")
    fx = Fraction(x)
    if fx < 0:
        raise ValueError(f"negative input {x!r}: to_dyadic takes x >= 0")
    scaled = fx * (1 << frac_depth)
    if scaled.denominator != 1:
        raise ValueError(
            f"{x!r} is not representable with {frac_depth} fractional bits"
        )
    return DyadicNumber(1, int(scaled), frac_depth)


def as_dyadic(x) -> DyadicNumber:
    """Coerce ints, floats, Fractions (signed) to the shallowest exact form."""
    if isinstance(x, DyadicNumber):
        return x
    if isinstance(x, Integral):
        x = int(x)
        return DyadicNumber(-1 if x < 0 else 1, abs(x), 0)
    fx = Fraction(x)
    den = fx.denominator
    if den & (den - 1):
        raise ValueError(f"{x!r} is not a dyadic rational")
    depth = den.bit_length() - 1
    num = fx.numerator
    return DyadicNumber(-1 if num < 0 else 1, abs(num), depth)


def dyadic_add(x, y) -> DyadicNumber:
    """Carry-free sum x (+) y; signs combine as -x (+) y = -(x (+) y)."""
    x, y = as_dyadic(x), as_dyadic(y)
    d = max(x.depth, y.depth)
    mant = x.rescale(d) ^ y.rescale(d)
    sign = x.sign * y.sign
    if mant == 0:
        sign = 1
    return DyadicNumber(sign, mant, d)
