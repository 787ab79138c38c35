"""Exact univariate polynomials in q, and quotients of them."""
from __future__ import annotations

from fractions import Fraction


class NonIntegralCount(ArithmeticError):
    """A count that should be an integer polynomial is not."""


def _trim(coeffs):
    c = list(coeffs)
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


class QPoly:
    """Polynomial with rational coefficients, ascending powers of q."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        self.coeffs = _trim(Fraction(c) for c in coeffs)

    @classmethod
    def const(cls, c):
        return cls([c])

    @classmethod
    def monomial(cls, n: int, c=1):
        return cls([0] * n + [c])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def _coerce(self, other):
        if isinstance(other, QPoly):
            return other
        if isinstance(other, (int, Fraction)):
            return QPoly([other])
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0,) * (n - len(self.coeffs))
        b = other.coeffs + (0,) * (n - len(other.coeffs))
        return type(self)._make([x + y for x, y in zip(a, b)])

    __radd__ = __add__

    def __neg__(self):
        return type(self)._make([-x for x in self.coeffs])

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.is_zero() or other.is_zero():
            return type(self)._make([])
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, x in enumerate(self.coeffs):
            if x:
                for j, y in enumerate(other.coeffs):
                    out[i + j] += x * y
        return type(self)._make(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = type(self)._make([1])
        for _ in range(n):
            out = out * self
        return out

    def divmod(self, other: "QPoly"):
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        quo = [Fraction(0)] * max(0, len(rem) - len(other.coeffs) + 1)
        lead = other.coeffs[-1]
        for i in range(len(quo) - 1, -1, -1):
            c = rem[i + len(other.coeffs) - 1] / lead
            quo[i] = c
            if c:
                for j, y in enumerate(other.coeffs):
                    rem[i + j] -= c * y
        return QPoly(quo), QPoly(rem)

    def __call__(self, q):
        out = Fraction(0)
        for c in reversed(self.coeffs):
            out = out * q + c
        return out

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.coeffs)

    @classmethod
    def _make(cls, coeffs):
        return QPoly(coeffs)

    def render(self) -> str:
        if not self.coeffs:
            return "0"
        terms = []
        for n in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[n]
            if c == 0:
                continue
            sign = "-" if c < 0 else "+"
            a = abs(c)
            if n == 0:
                body = str(a)
            else:
                mono = "q" if n == 1 else f"q^{n}"
                body = mono if a == 1 else f"{a}*{mono}"
            terms.append((sign, body))
        first_sign, first = terms[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in terms[1:]:
            out += f" {sign} {body}"
        return out

    def __str__(self):
        return self.render()

    def __repr__(self):
        return f"{type(self).__name__}({self.render()!r})"


class CountPolynomial(QPoly):
    """Integer-coefficient polynomial in q."""

    __slots__ = ()

    def __init__(self, coeffs=()):
        super().__init__(coeffs)
        if not self.is_integral():
            raise NonIntegralCount(f"non-integral coefficients in {self.render()}")

    @classmethod
    def from_qpoly(cls, p: QPoly) -> "CountPolynomial":
        return cls(p.coeffs)

    @property
    def int_coeffs(self) -> tuple[int, ...]:
        return tuple(int(c) for c in self.coeffs)

    def at(self, q: int) -> int:
        v = self(q)
        assert v.denominator == 1
        return int(v)

    def __add__(self, other):
        r = QPoly.__add__(self, other)
        return _maybe_int(r, other)

    __radd__ = __add__

    def __mul__(self, other):
        r = QPoly.__mul__(self, other)
        return _maybe_int(r, other)

    __rmul__ = __mul__

    def __sub__(self, other):
        r = QPoly.__sub__(self, other)
        return _maybe_int(r, other)

    def __neg__(self):
        return CountPolynomial([-c for c in self.coeffs])

    def __pow__(self, n: int):
        out = CountPolynomial([1])
        for _ in range(n):
            out = out * self
        return out


def _maybe_int(r, other):
    if r is NotImplemented:
        return r
    if isinstance(other, (CountPolynomial, int)) and r.is_integral():
        return CountPolynomial(r.coeffs)
    return r


Q = CountPolynomial([0, 1])
ONE = CountPolynomial([1])


def qpow(n: int) -> CountPolynomial:
    if n < 0:
        raise ValueError("negative power of q")
    return CountPolynomial.monomial(n)


class RationalCount:
    """A quotient of polynomials with rational coefficients, kept unreduced."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None):
        self.num = num if isinstance(num, QPoly) else QPoly([num])
        self.den = QPoly([1]) if den is None else (den if isinstance(den, QPoly) else QPoly([den]))
        if self.den.is_zero():
            raise ZeroDivisionError("zero denominator")

    @staticmethod
    def _lift(x):
        return x if isinstance(x, RationalCount) else RationalCount(x)

    def __add__(self, other):
        o = self._lift(other)
        if o.den == self.den:
            return RationalCount(self.num + o.num, self.den)
        return RationalCount(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __mul__(self, other):
        o = self._lift(other)
        return RationalCount(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._lift(other)
        return RationalCount(self.num * o.den, self.den * o.num)

    def __call__(self, q):
        return self.num(q) / self.den(q)

    def at(self, q: int) -> int:
        """Value at q, which must be an integer."""
        v = self(q)
        if v.denominator != 1:
            raise NonIntegralCount(f"value {v} at q={q} is not an integer")
        return int(v)

    def to_polynomial(self) -> CountPolynomial:
        """Exact division; raises NonIntegralCount if it leaves a remainder or fractions."""
        quo, rem = self.num.divmod(self.den)
        if not rem.is_zero():
            raise NonIntegralCount("count is not a polynomial in q")
        return CountPolynomial.from_qpoly(quo)

    def __repr__(self):
        return f"RationalCount(({self.num.render()}) / ({self.den.render()}))"
