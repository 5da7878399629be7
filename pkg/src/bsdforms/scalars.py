"""Coefficient field: exact Gaussian rationals or binary64 complex numbers.

A `Scalar` carries a backend tag.  Exact scalars hold two reduced
`fractions.Fraction` parts; float scalars hold two Python floats.  Mixing the
two backends in one operation raises `BackendMismatch`; use `to_float` to lift
explicitly.
"""
from __future__ import annotations

import cmath
import math
import re
from fractions import Fraction
from numbers import Rational

from .errors import BackendMismatch, DivisionByZero, NotPositiveReal, NotRepresentable

EXACT = "exact"
FLOAT = "float"

#: absolute zero-test tolerance for the float backend (overridable from the CLI)
DEFAULT_TOL = 1e-9


class Scalar:
    __slots__ = ("re", "im", "exact")

    def __init__(self, re=0, im=0, exact=True):
        if exact:
            if isinstance(re, float) or isinstance(im, float):
                raise TypeError("exact scalars need rational parts")
            self.re = Fraction(re)
            self.im = Fraction(im)
        else:
            self.re = float(re)
            self.im = float(im)
        self.exact = exact

    # construction -------------------------------------------------------
    @classmethod
    def _raw(cls, re, im, exact):
        s = object.__new__(cls)
        s.re = re
        s.im = im
        s.exact = exact
        return s

    @classmethod
    def of(cls, value, exact=True):
        """Coerce ints, Fractions, complex numbers or Scalars."""
        if isinstance(value, Scalar):
            return value
        if isinstance(value, complex):
            if exact:
                raise TypeError("complex literal given to exact backend")
            return cls._raw(value.real, value.imag, False)
        if isinstance(value, float):
            if exact:
                raise TypeError("float given to exact backend")
            return cls._raw(value, 0.0, False)
        if exact:
            return cls._raw(Fraction(value), Fraction(0), True)
        return cls._raw(float(value), 0.0, False)

    @property
    def backend(self):
        return EXACT if self.exact else FLOAT

    def _coerce(self, other):
        if isinstance(other, Scalar):
            if other.exact != self.exact:
                raise BackendMismatch(f"{self.backend} vs {other.backend}")
            return other
        if isinstance(other, (int, Rational)) and not isinstance(other, bool):
            return Scalar.of(other, self.exact)
        if isinstance(other, (float, complex)):
            if self.exact:
                raise BackendMismatch("float operand with exact scalar")
            return Scalar.of(complex(other), False)
        raise TypeError(f"cannot combine Scalar with {type(other).__name__}")

    # arithmetic ---------------------------------------------------------
    def __add__(self, other):
        o = self._coerce(other)
        return Scalar._raw(self.re + o.re, self.im + o.im, self.exact)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return Scalar._raw(self.re - o.re, self.im - o.im, self.exact)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        a, b, c, d = self.re, self.im, o.re, o.im
        return Scalar._raw(a * c - b * d, a * d + b * c, self.exact)

    __rmul__ = __mul__

    def __neg__(self):
        return Scalar._raw(-self.re, -self.im, self.exact)

    def inv(self):
        n = self.re * self.re + self.im * self.im
        if n == 0:
            raise DivisionByZero("inverse of zero scalar")
        return Scalar._raw(self.re / n, -self.im / n, self.exact)

    def __truediv__(self, other):
        return self * self._coerce(other).inv()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inv()

    def __pow__(self, k):
        if not isinstance(k, int):
            raise TypeError("integer powers only")
        if k < 0:
            return self.inv() ** (-k)
        out = Scalar.of(1, self.exact)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def conj(self):
        return Scalar._raw(self.re, -self.im, self.exact)

    def abs2(self):
        """|x|^2 as a real scalar of the same backend."""
        return Scalar._raw(self.re * self.re + self.im * self.im, self.im * 0, self.exact)

    # predicates ---------------------------------------------------------
    def is_zero(self, tol=DEFAULT_TOL):
        if self.exact:
            return self.re == 0 and self.im == 0
        return abs(complex(self.re, self.im)) <= tol

    def is_real(self, tol=DEFAULT_TOL):
        return self.im == 0 if self.exact else abs(self.im) <= tol

    def __eq__(self, other):
        try:
            o = self._coerce(other)
        except (TypeError, BackendMismatch):
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return not (self.re == 0 and self.im == 0)

    # conversions --------------------------------------------------------
    def to_float(self):
        if not self.exact:
            return self
        return Scalar._raw(float(self.re), float(self.im), False)

    def to_complex(self):
        return complex(float(self.re), float(self.im))

    def __complex__(self):
        return self.to_complex()

    def __repr__(self):
        return f"Scalar({format_scalar(self)})"

    def __str__(self):
        return format_scalar(self)


def zero(exact=True):
    return Scalar.of(0, exact)


def one(exact=True):
    return Scalar.of(1, exact)


I = Scalar._raw(Fraction(0), Fraction(1), True)
I_FLOAT = Scalar._raw(0.0, 1.0, False)


def imag_unit(exact=True):
    return I if exact else I_FLOAT


# operation-table entry point ------------------------------------------------
def arith(op, a, b=None):
    """Dispatch ``add``/``mul``/``neg``/``inv`` (plus ``sub``/``div``)."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    if op == "neg":
        return -a
    if op == "inv":
        return a.inv()
    raise ValueError(f"unknown operation {op!r}")


def conj(a):
    return a.conj()


def _exact_rational_sqrt(x: Fraction):
    n, d = x.numerator, x.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def sqrt_pos_real(a, tol=DEFAULT_TOL):
    """Square root of a positive real scalar.

    On the exact backend only perfect squares of rationals succeed; anything
    else raises `NotRepresentable` so the caller can switch to floats.
    """
    if not a.is_real(tol) or a.re <= 0:
        raise NotPositiveReal(f"{a} is not a positive real")
    if a.exact:
        r = _exact_rational_sqrt(a.re)
        if r is None:
            raise NotRepresentable(f"sqrt({a.re}) is irrational")
        return Scalar._raw(r, Fraction(0), True)
    return Scalar._raw(math.sqrt(a.re), 0.0, False)


#: largest integer searched for a two-square decomposition
TWO_SQUARE_LIMIT = 10 ** 10


def _two_squares(m):
    """(x, y) with x^2 + y^2 = m, or None (bounded search)."""
    r = math.isqrt(m)
    if r * r == m:
        return r, 0
    if m % 4 == 3 or m > TWO_SQUARE_LIMIT:
        return None
    for x in range(r, -1, -1):
        y2 = m - x * x
        y = math.isqrt(y2)
        if y * y == y2:
            return x, y
        if 2 * x * x < m:
            break
    return None


def gaussian_root(a, tol=DEFAULT_TOL):
    """Scalar c with |c|^2 = a for a positive real a.

    Exact when a is a norm from Q(i) (a sum of two rational squares found by
    bounded search), e.g. 2176/2025 -> (40+24i)/45; otherwise
    `NotRepresentable`.  Float input returns the real root.
    """
    if not a.is_real(tol) or a.re <= 0:
        raise NotPositiveReal(f"{a} is not a positive real")
    if not a.exact:
        return sqrt_pos_real(a, tol)
    n, d = a.re.numerator, a.re.denominator
    xy = _two_squares(n * d)
    if xy is None:
        raise NotRepresentable(f"{a.re} is not a sum of two rational squares")
    x, y = xy
    return Scalar._raw(Fraction(x, d), Fraction(y, d), True)


def sqrt_complex(a):
    """Principal square root (float backend only)."""
    if a.exact:
        raise NotRepresentable("complex square root on exact backend")
    z = cmath.sqrt(a.to_complex())
    return Scalar._raw(z.real, z.imag, False)


# text form ----------------------------------------------------------------
def _fmt_frac(x: Fraction):
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def format_scalar(a):
    """Canonical text: ``a/b+c/di`` (exact) or ``x+yi`` with repr floats."""
    if a.exact:
        re_s = _fmt_frac(a.re)
        im = a.im
        sign = "-" if im < 0 else "+"
        return f"{re_s}{sign}{_fmt_frac(abs(im))}i"
    sign = "-" if (a.im < 0 or (a.im == 0 and math.copysign(1, a.im) < 0)) else "+"
    return f"{a.re!r}{sign}{abs(a.im)!r}i"


_EXACT_RE = re.compile(r"^\s*([+-]?\d+(?:/\d+)?)\s*([+-])\s*(\d+(?:/\d+)?)i\s*$")
_NUM = r"(?:\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|inf|nan)"
_FLOAT_RE = re.compile(rf"^\s*([+-]?{_NUM})\s*([+-])\s*({_NUM})i\s*$")


def parse_scalar(text, exact=None):
    """Inverse of `format_scalar`.  Backend is inferred unless forced."""
    m = _EXACT_RE.match(text)
    if m and exact is not False:
        re_p = Fraction(m.group(1))
        im_p = Fraction(m.group(3))
        if m.group(2) == "-":
            im_p = -im_p
        return Scalar._raw(re_p, im_p, True)
    m = _FLOAT_RE.match(text)
    if m and exact is not True:
        im_p = float(m.group(3))
        if m.group(2) == "-":
            im_p = -im_p
        return Scalar._raw(float(m.group(1)), im_p, False)
    raise ValueError(f"not a scalar literal: {text!r}")
