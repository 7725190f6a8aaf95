"""Exact arithmetic in a real number field Q[ρ].

An element is a rational polynomial in ρ of degree below the degree of the
minimal polynomial.  Products are reduced modulo the minimal polynomial,
inverses come from the extended Euclidean algorithm, and signs are decided
by interval evaluation on a shrinking isolating interval of ρ.  Because the
minimal polynomial is irreducible, a nonzero representative never vanishes
at ρ, so sign determination always terminates.
"""
from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Sequence

from . import poly as P


class NumberField:
    def __init__(self, minpoly: Sequence[int], interval: tuple, name: str = "rho"):
        mp = [int(c) for c in minpoly]
        if len(mp) < 2:
            raise ValueError("minimal polynomial must have positive degree")
        if mp[-1] < 0:
            mp = [-c for c in mp]
        self.minpoly = tuple(mp)
        self.modulus = P.monic(P.poly(mp))
        self.degree = len(mp) - 1
        self.name = name
        lo, hi = Fraction(interval[0]), Fraction(interval[1])
        self._sturm = P.sturm_sequence(self.modulus)
        if P.count_roots(self._sturm, lo, hi) != 1:
            raise ValueError("interval does not isolate exactly one real root")
        if P.evaluate(self.modulus, hi) == 0:
            lo = hi
        self._lo, self._hi = lo, hi
        self.isolating_interval = (lo, hi)

    @property
    def interval(self) -> tuple[Fraction, Fraction]:
        return self._lo, self._hi

    def refine(self, width: Fraction) -> tuple[Fraction, Fraction]:
        if self._hi - self._lo > width:
            self._lo, self._hi = P.refine_root(self.modulus, self._lo, self._hi, width)
        return self._lo, self._hi

    def element(self, coeffs: Sequence) -> "Algebraic":
        c = P.mod(P.poly(coeffs), self.modulus)
        return Algebraic(self, c)

    def __call__(self, x) -> "Algebraic":
        if isinstance(x, Algebraic):
            if not self.same_as(x.field):
                raise ValueError("element belongs to a different field")
            return x
        return Algebraic(self, P.poly([x]))

    @property
    def gen(self) -> "Algebraic":
        return self.element([0, 1])

    def zero(self) -> "Algebraic":
        return Algebraic(self, ())

    def one(self) -> "Algebraic":
        return Algebraic(self, (Fraction(1),))

    def same_as(self, other: "NumberField") -> bool:
        if self is other:
            return True
        if self.minpoly != other.minpoly:
            return False
        lo, hi = max(self._lo, other._lo), min(self._hi, other._hi)
        if lo > hi:
            return False
        if lo == hi:
            return P.evaluate(self.modulus, lo) == 0
        return P.count_roots(self._sturm, lo, hi) == 1

    def __eq__(self, other) -> bool:
        return isinstance(other, NumberField) and self.same_as(other)

    def __hash__(self) -> int:
        return hash(self.minpoly)

    def __repr__(self) -> str:
        return f"NumberField({P.format_poly(self.minpoly)}, {float(self.gen):.12g})"


class Algebraic:
    """An element of a :class:`NumberField`."""

    __slots__ = ("field", "c")

    def __init__(self, field: NumberField, coeffs: tuple):
        self.field = field
        self.c = coeffs

    def _lift(self, other):
        if isinstance(other, Algebraic):
            if other.field is not self.field and not self.field.same_as(other.field):
                raise ValueError("mixing elements of different number fields")
            return other.c
        if isinstance(other, Rational):
            return P.poly([other])
        return None

    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return Algebraic(self.field, P.add(self.c, o))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return Algebraic(self.field, P.sub(self.c, o))

    def __rsub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return Algebraic(self.field, P.sub(o, self.c))

    def __neg__(self):
        return Algebraic(self.field, P.scale(self.c, -1))

    def __mul__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return Algebraic(self.field, P.mod(P.mul(self.c, o), self.field.modulus))

    __rmul__ = __mul__

    def inverse(self) -> "Algebraic":
        if not self.c:
            raise ZeroDivisionError("inverse of zero")
        g, s, _ = P.ext_gcd(self.c, self.field.modulus)
        if g != (Fraction(1),):
            raise ArithmeticError("minimal polynomial is not irreducible")
        return Algebraic(self.field, P.mod(s, self.field.modulus))

    def __truediv__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self * Algebraic(self.field, o).inverse()

    def __rtruediv__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return Algebraic(self.field, o) * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = self.field.one()
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self.c == o

    def __hash__(self):
        if len(self.c) <= 1:
            return hash(self.c[0] if self.c else 0)
        return hash((self.field.minpoly, self.c))

    def sign(self) -> int:
        if not self.c:
            return 0
        if len(self.c) == 1:
            return P.sign(self.c[0])
        f = self.field
        lo, hi = f.interval
        while True:
            a, b = P.interval_evaluate(self.c, lo, hi)
            if a > 0:
                return 1
            if b < 0:
                return -1
            lo, hi = f.refine((hi - lo) / 4)

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __le__(self, other):
        return (self - other).sign() <= 0

    def __gt__(self, other):
        return (self - other).sign() > 0

    def __ge__(self, other):
        return (self - other).sign() >= 0

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __bool__(self):
        return bool(self.c)

    def is_rational(self) -> bool:
        return len(self.c) <= 1

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError("element is irrational")
        return self.c[0] if self.c else Fraction(0)

    def __float__(self) -> float:
        if len(self.c) <= 1:
            return float(self.c[0]) if self.c else 0.0
        f = self.field
        lo, hi = f.interval
        scale = max(Fraction(1), abs(hi))
        lo, hi = f.refine(scale / 2**80)
        return float(P.evaluate(self.c, (lo + hi) / 2))

    def coefficients(self) -> tuple[Fraction, ...]:
        out = list(self.c) + [Fraction(0)] * (self.field.degree - len(self.c))
        return tuple(out)

    def __repr__(self) -> str:
        return f"Algebraic({P.format_poly(self.c, self.field.name)} ~ {float(self):.12g})"

    __str__ = __repr__


def to_json(x):
    """Exact rationals as ``"p/q"`` strings, field elements as dicts."""
    if isinstance(x, Algebraic):
        if x.is_rational():
            return to_json(x.to_fraction())
        lo, hi = x.field.isolating_interval
        return {
            "minpoly": list(x.field.minpoly),
            "rep": [to_json(c) for c in x.coefficients()],
            "interval": [to_json(lo), to_json(hi)],
            "approx": float(x),
        }
    f = Fraction(x)
    return f"{f.numerator}/{f.denominator}"


def from_json(obj, field: NumberField | None = None):
    if isinstance(obj, str):
        return Fraction(obj)
    if field is None:
        field = NumberField(obj["minpoly"], tuple(Fraction(v) for v in obj["interval"]))
    return field.element([Fraction(c) for c in obj["rep"]])
