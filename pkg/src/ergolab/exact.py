"""Exact scalars: rationals and quadratic irrationals ``p + q*sqrt(d)``.

Rotation angles are carried in this form so that ``n * alpha mod 1`` and
integer relations can be computed without floating-point drift.

Text grammar (whitespace ignored)::

    scalar    := rational | quadratic
    rational  := INT [ "/" INT ]
    quadratic := "(" linear ")" [ "/" INT ] | linear
    linear    := [sign] term { sign term }
    term      := INT | [ INT "*" ] "sqrt(" INT ")"

Examples: ``"1/2"``, ``"(1+1*sqrt(5))/2"``, ``"sqrt(2)-1"``. Dividing an
irrational needs the parenthesised form, so ``"3*sqrt(8)/4"`` is rejected.
"""
from __future__ import annotations

import math
import re
from fractions import Fraction
from functools import total_ordering
from typing import Union

Number = Union[int, Fraction, "ExactScalar"]

# working precision (bits) for float / double-double conversion
_PREC = 200


def _squarefree_split(n: int) -> tuple[int, int]:
    """Return (s, f) with n = s*s*f and f square-free."""
    if n <= 0:
        raise ValueError(f"radicand must be positive, got {n}")
    s, f = 1, 1
    rest = n
    p = 2
    while p * p <= rest:
        e = 0
        while rest % p == 0:
            rest //= p
            e += 1
        s *= p ** (e // 2)
        if e % 2:
            f *= p
        p += 1 if p == 2 else 2
    return s, f * rest


@total_ordering
class ExactScalar:
    """An element ``rat + irr * sqrt(radicand)`` of a real quadratic field.

    A value with ``irr == 0`` is rational and always stored with
    ``radicand == 1``, so a rational never equals an irrational.
    """

    __slots__ = ("rat", "irr", "radicand")

    def __init__(self, rat: Fraction | int = 0, irr: Fraction | int = 0, radicand: int = 1):
        rat = Fraction(rat)
        irr = Fraction(irr)
        if irr != 0:
            s, f = _squarefree_split(int(radicand))
            if f == 1:
                rat, irr = rat + irr * s, Fraction(0)
            else:
                irr *= s
                radicand = f
        if irr == 0:
            radicand = 1
        object.__setattr__(self, "rat", rat)
        object.__setattr__(self, "irr", irr)
        object.__setattr__(self, "radicand", int(radicand))

    def __setattr__(self, name, value):
        raise AttributeError("ExactScalar is immutable")

    # -- constructors -------------------------------------------------------
    @classmethod
    def rational(cls, p: int, q: int = 1) -> ExactScalar:
        if q <= 0:
            raise ValueError("denominator must be positive")
        return cls(Fraction(p, q))

    @classmethod
    def quadratic(cls, a: int, b: int, d: int, c: int = 1) -> ExactScalar:
        """(a + b*sqrt(d)) / c"""
        if c == 0:
            raise ValueError("denominator must be nonzero")
        return cls(Fraction(a, c), Fraction(b, c), d)

    @classmethod
    def coerce(cls, value: Number | str) -> ExactScalar:
        if isinstance(value, ExactScalar):
            return value
        if isinstance(value, str):
            return parse_scalar(value)
        if isinstance(value, bool):
            raise TypeError("bool is not an exact scalar")
        if isinstance(value, (int, Fraction)):
            return cls(value)
        raise TypeError(f"cannot make an exact scalar from {type(value).__name__}; "
                        "floats are not exact, pass a string such as '1/3'")

    # -- predicates ---------------------------------------------------------
    @property
    def is_rational(self) -> bool:
        return self.irr == 0

    def _integer_form(self) -> tuple[int, int, int, int]:
        """(A, B, d, D) with value = (A + B*sqrt(d)) / D and D > 0."""
        den = self.rat.denominator * self.irr.denominator // math.gcd(
            self.rat.denominator, self.irr.denominator)
        return (self.rat.numerator * (den // self.rat.denominator),
                self.irr.numerator * (den // self.irr.denominator),
                self.radicand, den)

    def sign(self) -> int:
        a, b, d, _ = self._integer_form()
        if b == 0:
            return (a > 0) - (a < 0)
        if a >= 0 and b >= 0:
            return 1
        if a <= 0 and b <= 0:
            return -1
        # opposite signs: compare a^2 with b^2 d
        if a > 0:
            return 1 if a * a > b * b * d else -1
        return 1 if b * b * d > a * a else -1

    # -- arithmetic ---------------------------------------------------------
    def _field(self, other: ExactScalar) -> int:
        if self.irr == 0:
            return other.radicand
        if other.irr == 0 or other.radicand == self.radicand:
            return self.radicand
        raise ValueError(f"sqrt({self.radicand}) and sqrt({other.radicand}) "
                         "live in different quadratic fields")

    def __add__(self, other):
        try:
            other = ExactScalar.coerce(other)
        except TypeError:
            return NotImplemented
        d = self._field(other)
        return ExactScalar(self.rat + other.rat, self.irr + other.irr, d)

    __radd__ = __add__

    def __neg__(self):
        return ExactScalar(-self.rat, -self.irr, self.radicand)

    def __sub__(self, other):
        try:
            other = ExactScalar.coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        try:
            other = ExactScalar.coerce(other)
        except TypeError:
            return NotImplemented
        d = self._field(other)
        return ExactScalar(self.rat * other.rat + self.irr * other.irr * d,
                           self.rat * other.irr + self.irr * other.rat, d)

    __rmul__ = __mul__

    def inverse(self) -> ExactScalar:
        norm = self.rat * self.rat - self.irr * self.irr * self.radicand
        if norm == 0:
            raise ZeroDivisionError("inverse of zero")
        return ExactScalar(self.rat / norm, -self.irr / norm, self.radicand)

    def __truediv__(self, other):
        try:
            other = ExactScalar.coerce(other)
        except TypeError:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return ExactScalar.coerce(other) * self.inverse()

    def __floor__(self) -> int:
        a, b, d, den = self._integer_form()
        if b == 0:
            return a // den
        r = math.isqrt(b * b * d)  # never exact: d is square-free > 1
        s = r if b > 0 else -(r + 1)
        # a + b*sqrt(d) = (a + s) + theta with 0 < theta < 1
        return (a + s) // den

    def frac(self) -> ExactScalar:
        """The representative of ``self mod 1`` in [0, 1)."""
        return self - math.floor(self)

    # -- comparison ---------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            other = ExactScalar(other)
        if not isinstance(other, ExactScalar):
            return NotImplemented
        return (self.rat == other.rat and self.irr == other.irr
                and self.radicand == other.radicand)

    def __lt__(self, other):
        try:
            other = ExactScalar.coerce(other)
        except TypeError:
            return NotImplemented
        if self.irr != 0 and other.irr != 0 and self.radicand != other.radicand:
            # distinct fields: the two values differ by far more than 2**-_PREC
            return _high_precision(self) < _high_precision(other)
        return (self - other).sign() < 0

    def __hash__(self):
        return hash((self.rat, self.irr, self.radicand))

    # -- conversion ---------------------------------------------------------
    def __float__(self) -> float:
        return self.to_dd()[0]

    def to_dd(self) -> tuple[float, float]:
        """Double-double ``(hi, lo)`` with hi = round(value) and lo = round(value - hi)."""
        approx = _high_precision(self)
        hi = float(approx)
        lo = float(approx - Fraction(hi))
        return hi, lo

    def __repr__(self) -> str:
        return f"ExactScalar({str(self)!r})"

    def __str__(self) -> str:
        a, b, d, den = self._integer_form()
        if b == 0:
            return f"{a}" if den == 1 else f"{a}/{den}"
        sign = "+" if b >= 0 else "-"
        body = f"({a}{sign}{abs(b)}*sqrt({d}))"
        return body if den == 1 else f"{body}/{den}"


def _high_precision(x: ExactScalar) -> Fraction:
    """Fraction within 2**-_PREC / D of the true value (truncation toward -inf)."""
    a, b, d, den = x._integer_form()
    if b == 0:
        return Fraction(a, den)
    scale = 1 << _PREC
    r = math.isqrt(b * b * d * scale * scale)
    s = r if b > 0 else -(r + 1)
    return Fraction(a * scale + s, den * scale)


_TOKEN = re.compile(r"\s*(?:(\d+)|(sqrt)|([-+*/()]))")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens: list[str] = []
        pos = 0
        stripped = text.strip()
        while pos < len(stripped):
            m = _TOKEN.match(stripped, pos)
            if not m or m.end() == pos:
                raise ValueError(f"cannot parse exact scalar {text!r} at offset {pos}")
            self.tokens.append(m.group(1) or m.group(2) or m.group(3))
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def take(self, expected: str | None = None) -> str:
        tok = self.peek()
        if tok is None or (expected is not None and tok != expected):
            raise ValueError(f"cannot parse exact scalar {self.text!r}: expected "
                             f"{expected or 'token'}, got {tok!r}")
        self.i += 1
        return tok

    def integer(self) -> int:
        tok = self.take()
        if not tok.isdigit():
            raise ValueError(f"cannot parse exact scalar {self.text!r}: expected integer, got {tok!r}")
        return int(tok)

    def term(self) -> ExactScalar:
        if self.peek() == "sqrt":
            return self.sqrt_call(1)
        n = self.integer()
        if self.peek() == "*":
            self.take("*")
            return self.sqrt_call(n)
        return ExactScalar(n)

    def sqrt_call(self, coef: int) -> ExactScalar:
        self.take("sqrt")
        self.take("(")
        d = self.integer()
        self.take(")")
        if d == 0:
            return ExactScalar(0)
        return ExactScalar(0, coef, d)

    def linear(self) -> ExactScalar:
        sign = 1
        if self.peek() in ("+", "-"):
            sign = -1 if self.take() == "-" else 1
        total = self.term() * sign
        while self.peek() in ("+", "-"):
            sign = -1 if self.take() == "-" else 1
            total = total + self.term() * sign
        return total

    def scalar(self) -> ExactScalar:
        if self.peek() == "(":
            self.take("(")
            value = self.linear()
            self.take(")")
        else:
            value = self.linear()
        if self.peek() == "/":
            self.take("/")
            den = self.integer()
            if den == 0:
                raise ValueError(f"zero denominator in {self.text!r}")
            if not value.is_rational and self.tokens[0] != "(":
                raise ValueError(f"cannot parse exact scalar {self.text!r}: "
                                 "write quadratic irrationals as (a+b*sqrt(d))/c")
            value = value / den
        if self.peek() is not None:
            raise ValueError(f"cannot parse exact scalar {self.text!r}: trailing {self.peek()!r}")
        return value


def parse_scalar(text: str) -> ExactScalar:
    """Parse the text grammar documented at module level."""
    if not isinstance(text, str):
        raise TypeError("exact scalar text must be a string")
    return _Parser(text).scalar()
