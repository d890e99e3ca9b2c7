"""Double-double numbers for the Python-level parts of the extended-precision pipeline.

Only what the forward map and the solvers need: the four operations, square
root, comparisons and conversion.  Values are unevaluated sums ``hi + lo`` with
``|lo| <= ulp(hi) / 2``.
"""

from __future__ import annotations

import math
from fractions import Fraction

_SPLIT = 134217729.0  # 2**27 + 1


def _two_sum(a: float, b: float) -> tuple[float, float]:
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _quick_two_sum(a: float, b: float) -> tuple[float, float]:
    s = a + b
    return s, b - (s - a)


def _split(a: float) -> tuple[float, float]:
    t = _SPLIT * a
    hi = t - (t - a)
    return hi, a - hi


def _two_prod(a: float, b: float) -> tuple[float, float]:
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


class DD:
    __slots__ = ("hi", "lo")

    def __init__(self, hi: float = 0.0, lo: float = 0.0):
        self.hi, self.lo = _quick_two_sum(float(hi), float(lo))

    @classmethod
    def of(cls, x) -> "DD":
        if isinstance(x, DD):
            return x
        if isinstance(x, (Fraction, str)):
            q = Fraction(x)
            hi = float(q)
            return cls(hi, float(q - Fraction(hi)))
        return cls(float(x), 0.0)

    # arithmetic ------------------------------------------------------------
    def __add__(self, other):
        o = DD.of(other)
        s, e = _two_sum(self.hi, o.hi)
        t, f = _two_sum(self.lo, o.lo)
        e += t
        s, e = _quick_two_sum(s, e)
        e += f
        return DD(*_quick_two_sum(s, e))

    __radd__ = __add__

    def __neg__(self):
        return DD(-self.hi, -self.lo)

    def __sub__(self, other):
        return self + (-DD.of(other))

    def __rsub__(self, other):
        return DD.of(other) - self

    def __mul__(self, other):
        o = DD.of(other)
        p, e = _two_prod(self.hi, o.hi)
        e += self.hi * o.lo + self.lo * o.hi
        return DD(*_quick_two_sum(p, e))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = DD.of(other)
        q1 = self.hi / o.hi
        r = self - o * q1
        q2 = r.hi / o.hi
        r = r - o * q2
        q3 = r.hi / o.hi
        return DD(*_quick_two_sum(q1, q2)) + q3

    def __rtruediv__(self, other):
        return DD.of(other) / self

    def sqrt(self) -> "DD":
        if self.hi <= 0.0:
            if self.hi < 0.0:
                raise ValueError("square root of a negative number")
            return DD(0.0)
        s = math.sqrt(self.hi)
        r = self - DD(*_two_prod(s, s))
        return DD(*_quick_two_sum(s, r.hi / (2.0 * s)))

    def __abs__(self):
        return -self if self.hi < 0 or (self.hi == 0 and self.lo < 0) else self

    # comparisons and conversion --------------------------------------------
    def _key(self):
        return (self.hi, self.lo)

    def __eq__(self, other):
        o = DD.of(other)
        return self.hi == o.hi and self.lo == o.lo

    def __lt__(self, other):
        return self._key() < DD.of(other)._key()

    def __le__(self, other):
        return self._key() <= DD.of(other)._key()

    def __gt__(self, other):
        return self._key() > DD.of(other)._key()

    def __ge__(self, other):
        return self._key() >= DD.of(other)._key()

    def __hash__(self):
        return hash(self._key())

    def __float__(self):
        return self.hi + self.lo

    def __bool__(self):
        return self.hi != 0.0

    def to_fraction(self) -> Fraction:
        return Fraction(self.hi) + Fraction(self.lo)

    def __repr__(self):
        return f"DD({self.hi!r}, {self.lo!r})"

    def __format__(self, spec):
        return format(float(self), spec)


def sqrt(x):
    return x.sqrt() if isinstance(x, DD) else math.sqrt(x)


def split(x) -> tuple[float, float]:
    if isinstance(x, DD):
        return x.hi, x.lo
    return float(x), 0.0
