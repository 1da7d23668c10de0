"""Exact scalars and affine forms.

Every number that reaches a certificate is a :class:`gmpy2.mpq`.  Level values
may additionally be ``INF`` (``math.inf``), which compares above every
rational.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Mapping

from gmpy2 import mpq, mpz

Rational = type(mpq())
INF = math.inf


class DecimalParseError(ValueError):
    def __init__(self, text: str, position: int):
        self.text = text
        self.position = position
        super().__init__(f"malformed decimal {text!r} at position {position}")


def rational_from_decimal(text: str) -> Rational:
    """Parse a decimal literal such as ``"-1.07950"`` exactly."""
    s = text.strip()
    start = 1 if s[:1] in ("+", "-") else 0
    seen_digit = seen_dot = False
    for pos in range(start, len(s)):
        ch = s[pos]
        if ch in "0123456789":
            seen_digit = True
        elif ch == "." and not seen_dot:
            seen_dot = True
        else:
            raise DecimalParseError(s, pos)
    if not seen_digit:
        raise DecimalParseError(s, len(s))
    sign = -1 if s.startswith("-") else 1
    whole, _, frac = s[start:].partition(".")
    return mpq(sign * int((whole or "0") + frac), 10 ** len(frac))


def to_rational(value) -> Rational:
    """Coerce ints, decimal strings, fractions and mpq to an exact rational.

    Binary floats are rejected: they would smuggle rounding into a proof.
    """
    if isinstance(value, Rational):
        return value
    if isinstance(value, (int, type(mpz()))):
        return mpq(value)
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    if isinstance(value, str):
        if "/" in value:
            num, den = value.split("/")
            return mpq(int(num), int(den))
        return rational_from_decimal(value)
    raise TypeError(f"cannot convert {type(value).__name__} to an exact rational")


def format_fraction(q: Rational) -> str:
    q = mpq(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def format_decimal(q: Rational, places: int, rounding: str = "up") -> str:
    """Render ``q`` with ``places`` digits after the point.

    ``rounding`` is ``"up"`` (toward +inf), ``"down"`` (toward -inf) or
    ``"nearest"`` (half away from zero).  Upper bounds are printed ``"up"``.
    """
    scale = 10 ** places
    scaled = mpq(q) * scale
    if rounding == "up":
        n = -((-scaled.numerator) // scaled.denominator)
    elif rounding == "down":
        n = scaled.numerator // scaled.denominator
    elif rounding == "nearest":
        n = int(abs(scaled) + mpq(1, 2))
        n = n if scaled >= 0 else -n
    else:
        raise ValueError(f"unknown rounding mode {rounding!r}")
    n = int(n)
    sign = "-" if n < 0 else ""
    whole, frac = divmod(abs(n), scale)
    if places == 0:
        return f"{sign}{whole}"
    return f"{sign}{whole}.{frac:0{places}d}"


def to_float(q) -> float:
    return float(q) if q not in (INF, -INF) else q


class AffineForm:
    """``constant + sum_j coefficients[j] * w_j`` with exact coefficients.

    Variables are identified by integer index (the cutoff index ``j``).
    Zero coefficients are never stored, so equality is structural.
    """

    __slots__ = ("constant", "coefficients", "_hash")

    def __init__(self, constant=0, coefficients: Mapping[int, object] | None = None):
        self.constant = to_rational(constant)
        coeffs = {}
        if coefficients:
            for j, a in coefficients.items():
                a = to_rational(a)
                if a:
                    coeffs[int(j)] = a
        self.coefficients = dict(sorted(coeffs.items()))
        self._hash = None

    @classmethod
    def variable(cls, j: int, scale=1) -> "AffineForm":
        return cls(0, {j: scale})

    @classmethod
    def const(cls, value) -> "AffineForm":
        return cls(value)

    @property
    def variables(self) -> tuple[int, ...]:
        return tuple(self.coefficients)

    def is_constant(self) -> bool:
        return not self.coefficients

    def coefficient(self, j: int) -> Rational:
        return self.coefficients.get(j, mpq(0))

    def __add__(self, other):
        if not isinstance(other, AffineForm):
            other = AffineForm(other)
        coeffs = dict(self.coefficients)
        for j, a in other.coefficients.items():
            coeffs[j] = coeffs.get(j, 0) + a
        return AffineForm(self.constant + other.constant, coeffs)

    __radd__ = __add__

    def __neg__(self):
        return AffineForm(-self.constant, {j: -a for j, a in self.coefficients.items()})

    def __sub__(self, other):
        if not isinstance(other, AffineForm):
            other = AffineForm(other)
        return self + (-other)

    def __rsub__(self, other):
        return AffineForm(other) - self

    def __mul__(self, scalar):
        s = to_rational(scalar)
        return AffineForm(self.constant * s, {j: a * s for j, a in self.coefficients.items()})

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, AffineForm):
            return NotImplemented
        return self.constant == other.constant and self.coefficients == other.coefficients

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.constant, tuple(self.coefficients.items())))
        return self._hash

    def evaluate(self, point: Mapping[int, object]) -> Rational:
        total = self.constant
        for j, a in self.coefficients.items():
            if j not in point:
                raise KeyError(f"no value assigned to variable w{j}")
            total += a * to_rational(point[j])
        return total

    def dense(self, n: int) -> list:
        """Coefficients of ``w_1..w_n`` as a list (constant excluded)."""
        return [self.coefficients.get(j, mpq(0)) for j in range(1, n + 1)]

    def __repr__(self):
        parts = [format_fraction(self.constant)] if self.constant or not self.coefficients else []
        for j, a in self.coefficients.items():
            parts.append(f"{format_fraction(a)}*w{j}")
        return "AffineForm(" + " + ".join(parts) + ")"

    def to_text(self) -> str:
        """Line format used in certificate files: ``const w1:coef w2:coef ...``."""
        items = [format_fraction(self.constant)]
        items += [f"w{j}:{format_fraction(a)}" for j, a in self.coefficients.items()]
        return " ".join(items)

    @classmethod
    def from_text(cls, text: str) -> "AffineForm":
        tokens = text.split()
        coeffs = {}
        for tok in tokens[1:]:
            name, _, val = tok.partition(":")
            coeffs[int(name[1:])] = to_rational(val)
        return cls(to_rational(tokens[0]), coeffs)


def affine_eval(form: AffineForm, point: Mapping[int, object]) -> Rational:
    return form.evaluate(point)


def affine_sum(forms: Iterable[AffineForm]) -> AffineForm:
    total = AffineForm()
    for f in forms:
        total = total + f
    return total
