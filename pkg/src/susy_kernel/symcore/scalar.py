"""Exact Gaussian rationals, the coefficient field of every symbolic object."""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational

__all__ = ["Scalar", "as_scalar", "ZERO", "ONE", "I"]


class Scalar:
    """An element re + im*i of Q(i), immutable and hashable."""

    __slots__ = ("re", "im", "_hash")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)
        self._hash = None

    @classmethod
    def parse(cls, text: str) -> "Scalar":
        """Decimal or fraction literal, optionally suffixed with ``i``."""
        text = text.strip()
        if text.endswith("i"):
            body = text[:-1] or "1"
            return cls(0, Fraction(body))
        return cls(Fraction(text))

    # arithmetic -------------------------------------------------------
    def __add__(self, other):
        other = as_scalar(other)
        return Scalar(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = as_scalar(other)
        return Scalar(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return as_scalar(other) - self

    def __mul__(self, other):
        other = as_scalar(other)
        a, b, c, d = self.re, self.im, other.re, other.im
        if not b and not d:
            return Scalar(a * c)
        return Scalar(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def inverse(self) -> "Scalar":
        n = self.re * self.re + self.im * self.im
        if not n:
            raise ZeroDivisionError("Scalar division by zero")
        return Scalar(self.re / n, -self.im / n)

    def __truediv__(self, other):
        return self * as_scalar(other).inverse()

    def __rtruediv__(self, other):
        return as_scalar(other) * self.inverse()

    def __neg__(self):
        return Scalar(-self.re, -self.im)

    def __pow__(self, k: int):
        if not isinstance(k, int):
            raise TypeError("Scalar powers must be integers")
        if k < 0:
            return self.inverse() ** (-k)
        result, base = ONE, self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def conjugate(self) -> "Scalar":
        return Scalar(self.re, -self.im)

    def norm(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    # predicates -------------------------------------------------------
    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def is_real(self) -> bool:
        return not self.im

    def is_one(self) -> bool:
        return self.re == 1 and not self.im

    def __eq__(self, other):
        if isinstance(other, Scalar):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Fraction)):
            return not self.im and self.re == other
        if isinstance(other, complex):
            return complex(self) == other
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.re, self.im)) if self.im else hash(self.re)
        return self._hash

    @property
    def key(self):
        return (self.re, self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __float__(self):
        if self.im:
            raise TypeError("non-real Scalar has no float value")
        return float(self.re)

    # square roots -----------------------------------------------------
    def sqrt_exact(self) -> "Scalar | None":
        """Principal square root when it lies in Q(i), else None.

        Principal means positive real part, or non-negative imaginary part
        when the real part vanishes.
        """
        if not self:
            return ZERO
        a, b = self.re, self.im
        modulus = _rational_sqrt(a * a + b * b)
        if modulus is None:
            return None
        x = _rational_sqrt((a + modulus) / 2)
        y = _rational_sqrt((modulus - a) / 2)
        if x is None or y is None:
            return None
        if b < 0:
            y = -y
        root = Scalar(x, y)
        if root.re < 0 or (root.re == 0 and root.im < 0):
            root = -root
        return root

    # printing ---------------------------------------------------------
    def __repr__(self):
        return f"Scalar({self})"

    def __str__(self):
        re, im = self.re, self.im
        if not im:
            return _frac_str(re)
        imag = "i" if im == 1 else "-i" if im == -1 else f"{_frac_str(im)}*i"
        if not re:
            return imag
        sign = "-" if im < 0 else "+"
        mag = abs(im)
        imag = "i" if mag == 1 else f"{_frac_str(mag)}*i"
        return f"({_frac_str(re)} {sign} {imag})"

    def needs_parens(self) -> bool:
        """True when the printed form is a sum or a fraction."""
        return bool(self.re and self.im) or self.re.denominator != 1 or (
            not self.re and self.im.denominator != 1
        )


def _frac_str(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _rational_sqrt(q: Fraction) -> Fraction | None:
    if q < 0:
        return None
    p, r = q.numerator, q.denominator
    sp, sr = math.isqrt(p), math.isqrt(r)
    if sp * sp == p and sr * sr == r:
        return Fraction(sp, sr)
    return None


def as_scalar(value) -> Scalar:
    if isinstance(value, Scalar):
        return value
    if isinstance(value, (int, Rational)):
        return Scalar(value)
    if isinstance(value, float):
        return Scalar(Fraction(value))
    if isinstance(value, complex):
        return Scalar(Fraction(value.real), Fraction(value.imag))
    if isinstance(value, str):
        return Scalar.parse(value)
    raise TypeError(f"cannot interpret {value!r} as a Gaussian rational")


ZERO = Scalar(0)
ONE = Scalar(1)
I = Scalar(0, 1)
