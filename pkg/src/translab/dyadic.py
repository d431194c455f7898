"""Exact dyadic rationals ``num / 2**exp``."""

from __future__ import annotations

import sys
from fractions import Fraction
from numbers import Rational

_P = sys.hash_info.modulus


class DyadicRational:
    """A number ``num / 2**exp`` kept in canonical form (``exp == 0`` or ``num`` odd).

    Compares and hashes consistently with :class:`fractions.Fraction` and ``int``.
    """

    __slots__ = ("num", "exp")

    def __init__(self, num: int, exp: int = 0):
        if exp < 0:
            num <<= -exp
            exp = 0
        if num == 0:
            exp = 0
        elif exp:
            tz = (num & -num).bit_length() - 1
            if tz:
                s = tz if tz < exp else exp
                num >>= s
                exp -= s
        self.num = num
        self.exp = exp

    @classmethod
    def coerce(cls, x) -> "DyadicRational":
        if isinstance(x, DyadicRational):
            return x
        if isinstance(x, int):
            return cls(x, 0)
        if isinstance(x, float):
            x = Fraction(x)
        if isinstance(x, str):
            x = Fraction(x)
        if isinstance(x, Rational):
            den = x.denominator
            if den & (den - 1):
                raise ValueError(f"{x} is not a dyadic rational")
            return cls(x.numerator, den.bit_length() - 1)
        raise TypeError(f"cannot convert {type(x).__name__} to DyadicRational")

    @staticmethod
    def is_dyadic(x) -> bool:
        try:
            DyadicRational.coerce(x)
        except (ValueError, TypeError):
            return False
        return True

    def to_fraction(self) -> Fraction:
        return Fraction(self.num, 1 << self.exp)

    def __float__(self) -> float:
        return self.num / (1 << self.exp) if self.exp < 1000 else float(self.to_fraction())

    def __repr__(self):
        return f"DyadicRational({self.num}, {self.exp})"

    def __str__(self):
        return str(self.num) if self.exp == 0 else f"{self.num}/2^{self.exp}"

    def _pair(self, other):
        if isinstance(other, DyadicRational):
            return other
        if isinstance(other, int):
            return DyadicRational(other, 0)
        return None

    def __add__(self, other):
        o = self._pair(other)
        if o is None:
            if isinstance(other, (Fraction, float)):
                return self.to_fraction() + other
            return NotImplemented
        if self.exp >= o.exp:
            return DyadicRational(self.num + (o.num << (self.exp - o.exp)), self.exp)
        return DyadicRational((self.num << (o.exp - self.exp)) + o.num, o.exp)

    __radd__ = __add__

    def __neg__(self):
        return DyadicRational(-self.num, self.exp)

    def __sub__(self, other):
        o = self._pair(other)
        if o is None:
            if isinstance(other, (Fraction, float)):
                return self.to_fraction() - other
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._pair(other)
        if o is None:
            if isinstance(other, (Fraction, float)):
                return self.to_fraction() * other
            return NotImplemented
        return DyadicRational(self.num * o.num, self.exp + o.exp)

    __rmul__ = __mul__

    def __abs__(self):
        return DyadicRational(abs(self.num), self.exp)

    def _cmp(self, other) -> int | None:
        o = self._pair(other)
        if o is not None:
            e = max(self.exp, o.exp)
            a = self.num << (e - self.exp)
            b = o.num << (e - o.exp)
            return (a > b) - (a < b)
        if isinstance(other, (Fraction, float)):
            a = self.to_fraction()
            return (a > other) - (a < other)
        return None

    def __eq__(self, other):
        if isinstance(other, DyadicRational):
            return self.num == other.num and self.exp == other.exp
        c = self._cmp(other)
        return NotImplemented if c is None else c == 0

    def __lt__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c < 0

    def __le__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c <= 0

    def __gt__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c > 0

    def __ge__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c >= 0

    def __hash__(self):
        if self.exp == 0:
            return hash(self.num)
        h = abs(self.num) % _P * pow(2, -self.exp, _P) % _P
        if self.num < 0:
            h = -h
        return -2 if h == -1 else h

    def __reduce__(self):
        return (DyadicRational, (self.num, self.exp))

    def scaled_int(self, exp: int) -> int:
        """Integer ``self * 2**exp``; requires ``exp >= self.exp``."""
        return self.num << (exp - self.exp)
