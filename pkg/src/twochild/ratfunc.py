"""Exact rational functions of the single parameter ``r``.

Rationals are :class:`fractions.Fraction`.  A :class:`Polynomial` stores its
coefficients in ascending powers of ``r``; a :class:`RationalFunction` is a
reduced ratio of two polynomials whose denominator is monic.  Everything is
exact; floats only appear when a caller asks for ``float(value)``.
"""

from __future__ import annotations

import re
from fractions import Fraction
from numbers import Rational as _RationalABC
from typing import Iterable, Sequence, Union

Rational = Fraction

__all__ = [
    "Rational",
    "Polynomial",
    "RationalFunction",
    "PoleError",
    "RatFuncParseError",
    "R",
    "ZERO",
    "ONE",
    "as_rational",
    "parse_rational",
    "parse_ratfunc",
    "format_decimal",
]


class PoleError(ZeroDivisionError):
    """Evaluation at a root of the denominator."""


class RatFuncParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at offset {position})")
        self.position = position


def as_rational(value) -> Fraction:
    """Coerce ints, Fractions and exact decimal strings to a Fraction.

    Floats are rejected: they would smuggle rounding into an exact pipeline.
    """
    if isinstance(value, bool):
        raise TypeError("bool is not a rational")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, _RationalABC)):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rational(value)
    raise TypeError(f"cannot use {type(value).__name__} as an exact rational")


_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+(?:\.\d*)?|[+-]?\.\d+)\s*(?:/\s*(\d+)\s*)?$")


def parse_rational(text: str) -> Fraction:
    """Parse ``"3"``, ``"-1/50"`` or ``"0.02"`` exactly."""
    m = _RATIONAL_RE.match(text)
    if not m:
        raise ValueError(f"not a rational number: {text!r}")
    value = Fraction(m.group(1))
    if m.group(2) is not None:
        den = int(m.group(2))
        if den == 0:
            raise ZeroDivisionError(f"zero denominator in {text!r}")
        value /= den
    return value


def format_decimal(value: Fraction, digits: int = 5) -> str:
    """Render an exact rational with ``digits`` places, rounding half to even."""
    if digits < 0:
        raise ValueError("digits must be non-negative")
    scaled = round(Fraction(value) * 10**digits)  # Fraction.__round__ is half-even
    sign = "-" if scaled < 0 else ""
    whole, frac = divmod(abs(scaled), 10**digits)
    if digits == 0:
        return f"{sign}{whole}"
    return f"{sign}{whole}.{frac:0{digits}d}"


class Polynomial:
    """Univariate polynomial in ``r`` with Fraction coefficients.

    ``coeffs[i]`` is the coefficient of ``r**i``; trailing zeros are
    stripped, so the zero polynomial has an empty coefficient tuple.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = [as_rational(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs: tuple[Fraction, ...] = tuple(cs)

    @classmethod
    def constant(cls, c) -> "Polynomial":
        return cls([c])

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def leading(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.coeffs == other.coeffs
        return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"Polynomial({[str(c) for c in self.coeffs]})"

    def __str__(self):
        return _poly_text(self.coeffs)

    def __neg__(self):
        return Polynomial(-c for c in self.coeffs)

    def __add__(self, other: "Polynomial") -> "Polynomial":
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (Fraction(0),) * (n - len(self.coeffs))
        b = other.coeffs + (Fraction(0),) * (n - len(other.coeffs))
        return Polynomial(x + y for x, y in zip(a, b))

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        if self.is_zero() or other.is_zero():
            return Polynomial()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return Polynomial(out)

    def scale(self, c) -> "Polynomial":
        c = as_rational(c)
        return Polynomial(x * c for x in self.coeffs)

    def divmod(self, other: "Polynomial") -> tuple["Polynomial", "Polynomial"]:
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dd = other.degree
        lead = other.leading
        quot = [Fraction(0)] * max(len(rem) - dd, 0)
        for k in range(len(rem) - 1, dd - 1, -1):
            q = rem[k] / lead
            if q:
                quot[k - dd] = q
                for j, b in enumerate(other.coeffs):
                    rem[k - dd + j] -= q * b
        return Polynomial(quot), Polynomial(rem[:dd] if dd > 0 else [])

    def monic(self) -> "Polynomial":
        if self.is_zero():
            return self
        return self.scale(1 / self.leading)

    def __call__(self, x) -> Fraction:
        x = as_rational(x)
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def derivative(self) -> "Polynomial":
        return Polynomial(i * c for i, c in enumerate(self.coeffs) if i)


def poly_gcd(a: Polynomial, b: Polynomial) -> Polynomial:
    """Monic gcd by Euclid's algorithm over Q (gcd(0, 0) is 0)."""
    while not b.is_zero():
        a, b = b, a.divmod(b)[1]
    return a.monic()


Number = Union[int, Fraction]


class RationalFunction:
    """Reduced quotient ``num/den`` of polynomials in ``r``; den is monic.

    Instances are immutable and canonical, so ``==`` and ``hash`` are
    structural.
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den=None):
        num = _as_poly(num)
        den = Polynomial([1]) if den is None else _as_poly(den)
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if num.is_zero():
            num, den = Polynomial(), Polynomial([1])
        else:
            g = poly_gcd(num, den)
            if g.degree > 0:
                num = num.divmod(g)[0]
                den = den.divmod(g)[0]
            lead = den.leading
            num, den = num.scale(1 / lead), den.scale(1 / lead)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def __setattr__(self, name, value):
        raise AttributeError("RationalFunction is immutable")

    @classmethod
    def coerce(cls, value) -> "RationalFunction":
        if isinstance(value, RationalFunction):
            return value
        if isinstance(value, Polynomial):
            return cls(value)
        if isinstance(value, str):
            return parse_ratfunc(value)
        return cls(Polynomial([as_rational(value)]))

    # -- predicates ---------------------------------------------------
    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_constant(self) -> bool:
        return self.num.degree <= 0 and self.den.degree == 0

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} depends on r")
        return self.num(0)

    def equals(self, other) -> bool:
        """Cross-multiplied identity test; independent of canonical form."""
        other = RationalFunction.coerce(other)
        return (self.num * other.den - other.num * self.den).is_zero()

    def __eq__(self, other):
        try:
            other = RationalFunction.coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    # -- arithmetic ---------------------------------------------------
    def __add__(self, other):
        other = RationalFunction.coerce(other)
        return RationalFunction(
            self.num * other.den + other.num * self.den, self.den * other.den
        )

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self.num, self.den)

    def __sub__(self, other):
        return self + (-RationalFunction.coerce(other))

    def __rsub__(self, other):
        return RationalFunction.coerce(other) - self

    def __mul__(self, other):
        other = RationalFunction.coerce(other)
        return RationalFunction(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = RationalFunction.coerce(other)
        if other.is_zero():
            raise ZeroDivisionError("division by the zero rational function")
        return RationalFunction(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        return RationalFunction.coerce(other) / self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            raise TypeError("only integer powers are supported")
        if k < 0:
            return (ONE / self) ** (-k)
        out = ONE
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # -- evaluation ---------------------------------------------------
    def has_pole_at(self, r0) -> bool:
        return self.den(as_rational(r0)) == 0

    def eval_at(self, r0) -> Fraction:
        r0 = as_rational(r0)
        d = self.den(r0)
        if d == 0:
            raise PoleError(f"{self} has a pole at r = {r0}")
        return self.num(r0) / d

    __call__ = eval_at

    def decimal(self, r0=None, digits: int = 5) -> str:
        if r0 is None:
            return format_decimal(self.constant_value(), digits)
        return format_decimal(self.eval_at(r0), digits)

    # -- text ---------------------------------------------------------
    def __repr__(self):
        return f"RationalFunction({str(self)!r})"

    def __str__(self):
        return _ratfunc_text(self.num, self.den)


def _as_poly(value) -> Polynomial:
    if isinstance(value, Polynomial):
        return value
    if isinstance(value, (list, tuple)):
        return Polynomial(value)
    return Polynomial([as_rational(value)])


def rf(value) -> RationalFunction:
    return RationalFunction.coerce(value)


R = RationalFunction(Polynomial([0, 1]))
ZERO = RationalFunction(Polynomial())
ONE = RationalFunction(Polynomial([1]))


# ---------------------------------------------------------------------------
# text rendering

def _poly_text(coeffs: Sequence[Fraction]) -> str:
    """Ascending-power rendering, e.g. ``1 - 2r + r^2``."""
    if not coeffs:
        return "0"
    parts: list[str] = []
    for i, c in enumerate(coeffs):
        if c == 0:
            continue
        mag = abs(c)
        if i == 0:
            body = str(mag)
        else:
            var = "r" if i == 1 else f"r^{i}"
            if mag == 1:
                body = var
            elif mag.denominator == 1:
                body = f"{mag}{var}"
            else:
                body = f"({mag}){var}"
        if not parts:
            parts.append(("-" if c < 0 else "") + body)
        else:
            parts.append((" - " if c < 0 else " + ") + body)
    return "".join(parts)


def _lcm(a: int, b: int) -> int:
    from math import gcd

    return a * b // gcd(a, b)


def _integer_pair(num: Polynomial, den: Polynomial) -> tuple[list[int], list[int]]:
    from math import gcd

    scale = 1
    for c in num.coeffs + den.coeffs:
        scale = _lcm(scale, c.denominator)
    n = [int(c * scale) for c in num.coeffs]
    d = [int(c * scale) for c in den.coeffs]
    g = 0
    for x in n + d:
        g = gcd(g, x)
    if g > 1:
        n = [x // g for x in n]
        d = [x // g for x in d]
    # display convention: lowest-order nonzero denominator coefficient positive
    lowest = next(x for x in d if x)
    if lowest < 0:
        n = [-x for x in n]
        d = [-x for x in d]
    return n, d


def _ratfunc_text(num: Polynomial, den: Polynomial) -> str:
    if num.is_zero():
        return "0"
    n, d = _integer_pair(num, den)
    ntext = _poly_text([Fraction(x) for x in n])
    nterms = sum(1 for x in n if x)
    if len(d) == 1:
        if d[0] == 1:
            return ntext
        if nterms > 1:
            ntext = f"({ntext})"
        return f"{ntext}/{d[0]}"
    dtext = _poly_text([Fraction(x) for x in d])
    if nterms > 1 or (nterms == 1 and ntext.startswith("-")):
        ntext = f"({ntext})"
    return f"{ntext}/({dtext})"


# ---------------------------------------------------------------------------
# parsing: integers, decimals, p/q, r, + - * / ^, parentheses, juxtaposition

_TOKEN_RE = re.compile(r"\s*(?:(\d+(?:\.\d*)?|\.\d+)|(r)|([-+*/^()]))")


def _tokenize(text: str):
    pos = 0
    out = []
    text = text.replace("−", "-").replace("²", "^2")
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise RatFuncParseError(f"unexpected character {text[pos]!r}", pos)
        num, var, op = m.groups()
        start = m.start(1) if num else m.start(2) if var else m.start(3)
        if num is not None:
            out.append(("num", Fraction(num), start))
        elif var is not None:
            out.append(("r", None, start))
        else:
            out.append((op, None, start))
        pos = m.end()
    out.append(("end", None, len(text)))
    return out


class _RFParser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i][0]

    def take(self, kind=None):
        tok = self.toks[self.i]
        if kind is not None and tok[0] != kind:
            raise RatFuncParseError(f"expected {kind!r}, found {tok[0]!r}", tok[2])
        self.i += 1
        return tok

    def parse(self) -> RationalFunction:
        val = self.expr()
        self.take("end")
        return val

    def expr(self):
        if self.peek() in "+-":
            sign = self.take()[0]
            val = self.term()
            if sign == "-":
                val = -val
        else:
            val = self.term()
        while self.peek() in ("+", "-"):
            op = self.take()[0]
            rhs = self.term()
            val = val + rhs if op == "+" else val - rhs
        return val

    def term(self):
        val = self.power()
        while True:
            k = self.peek()
            if k in ("*", "/"):
                tok = self.take()
                rhs = self.power()
                if k == "*":
                    val = val * rhs
                else:
                    if rhs.is_zero():
                        raise RatFuncParseError("division by zero", tok[2])
                    val = val / rhs
            elif k in ("num", "r", "("):
                val = val * self.power()  # juxtaposition: 2r, r(1-r)
            else:
                return val

    def power(self):
        base = self.atom()
        if self.peek() == "^":
            self.take()
            neg = False
            if self.peek() == "-":
                self.take()
                neg = True
            tok = self.take("num")
            if tok[1].denominator != 1:
                raise RatFuncParseError("exponent must be an integer", tok[2])
            k = int(tok[1])
            if neg:
                if base.is_zero():
                    raise RatFuncParseError("division by zero", tok[2])
                k = -k
            base = base**k
        return base

    def atom(self):
        kind, val, pos = self.toks[self.i]
        if kind == "num":
            self.i += 1
            return RationalFunction(Polynomial([val]))
        if kind == "r":
            self.i += 1
            return R
        if kind == "(":
            self.i += 1
            inner = self.expr()
            self.take(")")
            return inner
        if kind == "-":
            self.i += 1
            return -self.atom()
        raise RatFuncParseError(f"unexpected {kind!r}", pos)


def parse_ratfunc(text: str) -> RationalFunction:
    """Parse text like ``(2 - r)/(4 - r)``, ``r^2/4`` or ``1/50``."""
    return _RFParser(text).parse()
