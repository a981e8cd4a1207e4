"""Precision-tracked arithmetic in Q_p.

A :class:`PadicScalar` is a residue class ``coeff * p**-scale + p**abs_prec Z_p``.
``abs_prec=None`` marks an exact element of Z[1/p] (parameters, literals);
everything else carries a guaranteed error ball that is propagated
conservatively through every operation.
"""
from __future__ import annotations

import random
import re
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache

from .errors import (
    DenominatorNotPPower,
    DivisionByZero,
    InsufficientPrecision,
    InvalidParameters,
    MalformedLiteral,
    NotIntegral,
    PrecisionExhausted,
)

DIGIT_CHARS = "0123456789abcdefghijklmnopqrstuvwxyz"


@lru_cache(maxsize=8192)
def ppow(p: int, n: int) -> int:
    return p**n


def vp(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if n == 0:
        raise ValueError("valuation of 0")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


@dataclass(frozen=True)
class AtMost:
    """Norm of a scalar that is zero to its precision: only an upper bound is known."""

    bound: Fraction


def _min_prec(*ks: int | None) -> int | None:
    finite = [k for k in ks if k is not None]
    return min(finite) if finite else None


@dataclass(frozen=True)
class PadicScalar:
    p: int
    coeff: int
    scale: int = 0
    abs_prec: int | None = None

    # -- construction -------------------------------------------------------

    @classmethod
    def make(cls, p: int, num: int, den_exp: int = 0, prec: int | None = None) -> PadicScalar:
        """Canonical scalar for the value ``num * p**-den_exp`` known mod ``p**prec``."""
        if num == 0:
            if prec is None:
                return cls(p, 0, 0, None)
            return cls(p, 0, max(0, -prec), prec)
        if den_exp > 0:
            while den_exp > 0 and num % p == 0:
                num //= p
                den_exp -= 1
        elif den_exp < 0:
            num *= ppow(p, -den_exp)
            den_exp = 0
        if prec is None:
            return cls(p, num, den_exp, None)
        e = max(0, den_exp, -prec)
        coeff = (num * ppow(p, e - den_exp)) % ppow(p, e + prec)
        if coeff == 0:
            e = max(0, -prec)
        return cls(p, coeff, e, prec)

    @classmethod
    def from_int(cls, p: int, n: int, prec: int | None = None) -> PadicScalar:
        return cls.make(p, n, 0, prec)

    @classmethod
    def from_fraction(cls, p: int, value: Fraction | int, prec: int | None = None) -> PadicScalar:
        """Embed a rational. A denominator with a non-p part needs ``prec``."""
        value = Fraction(value)
        den = value.denominator
        d = 0
        while den % p == 0:
            den //= p
            d += 1
        if den == 1:
            return cls.make(p, value.numerator, d, prec)
        if prec is None:
            raise DenominatorNotPPower(f"{value} is not in Z[1/{p}]; give a precision")
        m = max(1, prec + d)
        inv = pow(den, -1, ppow(p, m))
        return cls.make(p, value.numerator * inv, d, prec)

    # -- basic properties ---------------------------------------------------

    @property
    def is_exact(self) -> bool:
        return self.abs_prec is None

    @property
    def is_zero(self) -> bool:
        """True when the value is indistinguishable from 0 (exact zero included)."""
        return self.coeff == 0

    @cached_property
    def val(self) -> int | None:
        """Valuation, or None when the scalar is zero to its precision."""
        if self.coeff == 0:
            return None
        return vp(self.coeff, self.p) - self.scale

    def val_lower(self) -> int | None:
        """A lower bound on the valuation of the true value; None stands for +infinity."""
        if self.coeff != 0:
            return self.val
        return self.abs_prec

    def to_fraction(self) -> Fraction:
        """The stored representative as an exact rational."""
        return Fraction(self.coeff, ppow(self.p, self.scale))

    def with_prec(self, k: int) -> PadicScalar:
        """Forget digits at and beyond position ``k``."""
        if self.abs_prec is not None and self.abs_prec <= k:
            return self
        return PadicScalar.make(self.p, self.coeff, self.scale, k)

    def digit(self, i: int) -> int:
        """Digit at position ``i`` (coefficient of p**i) of the representative."""
        if self.abs_prec is not None and i >= self.abs_prec:
            raise InsufficientPrecision(f"digit {i} beyond precision {self.abs_prec}")
        if i < -self.scale:
            return 0
        shift = i + self.scale
        return (self.coeff // ppow(self.p, shift)) % self.p

    def agrees(self, other: PadicScalar, k: int | None = None) -> bool:
        """Whether the two classes overlap, i.e. agree on all common digits (below ``k``)."""
        diff = self - other
        if k is not None:
            if diff.abs_prec is not None and diff.abs_prec < k:
                k = diff.abs_prec
            return diff.coeff == 0 or diff.val >= k
        return diff.coeff == 0

    def __repr__(self) -> str:
        if self.abs_prec is None:
            return f"PadicScalar({self.to_fraction()}, p={self.p}, exact)"
        return f"PadicScalar({format_digits(self, self.abs_prec) if self.abs_prec >= 0 else '?'} + O({self.p}^{self.abs_prec}))"

    # -- operators ----------------------------------------------------------

    def _coerce(self, other) -> PadicScalar:
        if isinstance(other, PadicScalar):
            if other.p != self.p:
                raise ValueError(f"mixed primes {self.p} and {other.p}")
            return other
        if isinstance(other, (int, Fraction)):
            return PadicScalar.from_fraction(self.p, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return arith("add", self, other)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return arith("sub", self, other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return arith("sub", other, self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return arith("mul", self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return pdiv(self, other)

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return pdiv(other, self)

    def __neg__(self) -> PadicScalar:
        return PadicScalar.make(self.p, -self.coeff, self.scale, self.abs_prec)

    def __pow__(self, n: int) -> PadicScalar:
        if n < 0:
            raise ValueError("negative powers: use pdiv")
        result = PadicScalar(self.p, 1, 0, None)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result


def _checked(result: PadicScalar) -> PadicScalar:
    # a zero class with negative precision says nothing, not even integrality
    if result.coeff == 0 and result.abs_prec is not None and result.abs_prec < 0:
        raise PrecisionExhausted(f"result known only modulo p^{result.abs_prec}")
    return result


def arith(op: str, u: PadicScalar, v: PadicScalar) -> PadicScalar:
    """add / sub / mul with conservative absolute-precision propagation."""
    if u.p != v.p:
        raise ValueError(f"mixed primes {u.p} and {v.p}")
    p = u.p
    if op in ("add", "sub"):
        d = max(u.scale, v.scale)
        a = u.coeff * ppow(p, d - u.scale)
        b = v.coeff * ppow(p, d - v.scale)
        num = a + b if op == "add" else a - b
        return _checked(PadicScalar.make(p, num, d, _min_prec(u.abs_prec, v.abs_prec)))
    if op != "mul":
        raise ValueError(f"unknown operation {op!r}")
    if (u.is_exact and u.coeff == 0) or (v.is_exact and v.coeff == 0):
        return PadicScalar(p, 0, 0, None)
    terms = []
    if u.abs_prec is not None:
        terms.append(u.abs_prec + v.val_lower())
    if v.abs_prec is not None:
        terms.append(v.abs_prec + u.val_lower())
    if u.abs_prec is not None and v.abs_prec is not None:
        terms.append(u.abs_prec + v.abs_prec)
    k = min(terms) if terms else None
    return _checked(PadicScalar.make(p, u.coeff * v.coeff, u.scale + v.scale, k))


def pdiv(u: PadicScalar, v: PadicScalar, prec: int | None = None) -> PadicScalar:
    """Quotient u / v.

    Dividing by a value of valuation beta costs beta digits of absolute
    precision; an inexact divisor costs a further ``k_v - 2 beta + val(u)`` bound.
    ``prec`` is only consulted when both operands are exact and the quotient
    leaves Z[1/p].
    """
    if u.p != v.p:
        raise ValueError(f"mixed primes {u.p} and {v.p}")
    p = u.p
    if v.coeff == 0:
        raise DivisionByZero("divisor is zero to its precision")
    if u.is_exact and u.coeff == 0:
        return PadicScalar(p, 0, 0, None)
    beta = v.val
    w = v.coeff // ppow(p, beta + v.scale)  # unit part of the divisor
    terms = []
    if u.abs_prec is not None:
        terms.append(u.abs_prec - beta)
    if v.abs_prec is not None:
        terms.append(v.abs_prec - 2 * beta + u.val_lower())
    k = min(terms) if terms else None
    d = u.scale + beta
    if k is None:
        if u.coeff % w == 0:
            return PadicScalar.make(p, u.coeff // w, d, None)
        if prec is None:
            raise InsufficientPrecision("exact quotient leaves Z[1/p]; give prec")
        k = prec
    m = max(1, k + d)
    winv = pow(w % ppow(p, m), -1, ppow(p, m))
    return _checked(PadicScalar.make(p, u.coeff * winv, d, k))


def pnorm(u: PadicScalar, exact: bool = False) -> Fraction | AtMost:
    """|u| = p**-val(u).

    For a scalar that is zero to its precision the norm is only bounded; an
    :class:`AtMost` marker is returned unless the caller asserts exactness.
    """
    if u.coeff != 0:
        return Fraction(u.p) ** (-u.val)
    if u.is_exact or exact:
        return Fraction(0)
    return AtMost(Fraction(u.p) ** (-u.abs_prec))


def norm_bound(u: PadicScalar) -> Fraction:
    """Smallest certified upper bound on |u|."""
    n = pnorm(u)
    return n.bound if isinstance(n, AtMost) else n


def is_integral(u: PadicScalar) -> bool | None:
    """True/False when |u| <= 1 is decided at u's precision, None otherwise."""
    if u.coeff != 0:
        return u.val >= 0
    return True if u.abs_prec is None or u.abs_prec >= 0 else None


def reduce_mod(u: PadicScalar, j: int) -> int:
    """Representative of u mod p**j in [0, p**j)."""
    if u.coeff != 0 and u.val < 0:
        raise NotIntegral(f"valuation {u.val} < 0")
    if u.abs_prec is not None and u.abs_prec < j:
        raise InsufficientPrecision(f"need {j} digits, have {u.abs_prec}")
    if u.coeff == 0:
        return 0
    return (u.coeff // ppow(u.p, u.scale)) % ppow(u.p, j) if u.scale else u.coeff % ppow(u.p, j)


def haar_sample_unit(seed, N: int, p: int) -> PadicScalar:
    """A Haar-random element of Z_p known to N digits.

    ``seed`` may be an int (fresh generator) or a ``random.Random`` to draw from.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    return PadicScalar(p, rng.randrange(ppow(p, N)), 0, N)


# -- text and JSON forms --------------------------------------------------------

_INT_RE = re.compile(r"^[+-]?\d+$")
_FRAC_RE = re.compile(r"^([+-]?\d+)\s*/\s*(\d+)$")
_DIGITS_RE = re.compile(r"^(?:\.\.\.|…)([0-9a-zA-Z]*)(?:\.([0-9a-zA-Z]+))?$")


def parse_literal(text: str, p: int, prec: int | None = None) -> PadicScalar:
    """Parse ``"7"``, ``"-5"``, ``"1/3"`` or a digit string ``"...0121.2"``.

    Integer and fraction literals are exact unless ``prec`` is given. A digit
    string is written most significant digit first; its precision is the number
    of digits left of the radix point.
    """
    s = text.strip()
    if _INT_RE.match(s):
        return PadicScalar.from_int(p, int(s), prec)
    m = _FRAC_RE.match(s)
    if m:
        num, den = int(m.group(1)), int(m.group(2))
        if den == 0:
            raise MalformedLiteral(f"zero denominator in {text!r}")
        d = den
        while d % p == 0:
            d //= p
        if d != 1:
            raise DenominatorNotPPower(f"denominator {den} is not a power of {p}")
        return PadicScalar.from_fraction(p, Fraction(num, den), prec)
    m = _DIGITS_RE.match(s)
    if m:
        if p > len(DIGIT_CHARS):
            raise MalformedLiteral(f"digit strings need p <= {len(DIGIT_CHARS)}")
        ipart, fpart = m.group(1), m.group(2) or ""
        digits = []
        for ch in (ipart + fpart).lower():
            dv = DIGIT_CHARS.index(ch)
            if dv >= p:
                raise MalformedLiteral(f"digit {ch!r} out of range for p={p}")
            digits.append(dv)
        num = 0
        for dv in digits:
            num = num * p + dv
        k = len(ipart)
        if prec is not None:
            k = min(k, prec)
        return PadicScalar.make(p, num, len(fpart), k)
    raise MalformedLiteral(f"cannot parse {text!r}")


def format_digits(u: PadicScalar, j: int) -> str:
    """Digit string of u through position j-1, round-trippable by :func:`parse_literal`."""
    if j < 0:
        raise ValueError("j must be >= 0")
    if u.abs_prec is not None and u.abs_prec < j:
        raise InsufficientPrecision(f"cannot format {j} digits, have {u.abs_prec}")
    if u.p > len(DIGIT_CHARS):
        raise MalformedLiteral(f"digit strings need p <= {len(DIGIT_CHARS)}")
    ipart = "".join(DIGIT_CHARS[u.digit(i)] for i in range(j - 1, -1, -1))
    frac = "".join(DIGIT_CHARS[u.digit(i)] for i in range(-1, -u.scale - 1, -1))
    return "..." + ipart + ("." + frac if frac else "")


def to_json(u: PadicScalar, prec: int | None = None) -> dict:
    """Little-endian digit record ``{p, val, prec, start, digits}``.

    ``digits[i]`` is the digit at position ``start + i``. Exact scalars also
    carry their rational literal under ``exact``.
    """
    k = u.abs_prec if prec is None else (prec if u.abs_prec is None else min(prec, u.abs_prec))
    out = {"p": u.p, "val": u.val, "prec": k, "start": -u.scale, "digits": None, "exact": None}
    if k is not None:
        out["digits"] = [u.digit(i) for i in range(-u.scale, k)]
    if u.is_exact:
        fr = u.to_fraction()
        out["exact"] = str(fr.numerator) if fr.denominator == 1 else f"{fr.numerator}/{fr.denominator}"
    return out


def from_json(record: dict) -> PadicScalar:
    p = record["p"]
    if record.get("exact") is not None and record.get("prec") is None:
        return parse_literal(record["exact"], p)
    start, k = record["start"], record["prec"]
    num = 0
    for dv in reversed(record["digits"]):
        num = num * p + dv
    return PadicScalar.make(p, num, -start, k)


# -- points and parameters -----------------------------------------------------


@dataclass(frozen=True)
class Point:
    x: PadicScalar
    y: PadicScalar

    @property
    def p(self) -> int:
        return self.x.p

    def norm_bound(self) -> Fraction:
        """max(|x|, |y|), or its certified upper bound when a coordinate is zero to precision."""
        return max(norm_bound(self.x), norm_bound(self.y))

    def in_unit_polydisc(self) -> bool | None:
        ix, iy = is_integral(self.x), is_integral(self.y)
        if ix is False or iy is False:
            return False
        if ix is None or iy is None:
            return None
        return True

    @property
    def prec(self) -> int | None:
        return _min_prec(self.x.abs_prec, self.y.abs_prec)

    def with_prec(self, k: int) -> Point:
        return Point(self.x.with_prec(k), self.y.with_prec(k))

    def agrees(self, other: Point, k: int | None = None) -> bool:
        return self.x.agrees(other.x, k) and self.y.agrees(other.y, k)

    def __sub__(self, other: Point) -> Point:
        return Point(self.x - other.x, self.y - other.y)

    @classmethod
    def from_ints(cls, p: int, x: int, y: int, prec: int | None = None) -> Point:
        return cls(PadicScalar.from_int(p, x, prec), PadicScalar.from_int(p, y, prec))

    @classmethod
    def parse(cls, text: str, p: int, prec: int | None = None) -> Point:
        parts = text.split(",")
        if len(parts) != 2:
            raise MalformedLiteral(f"a point is 'x,y', got {text!r}")
        return cls(parse_literal(parts[0], p, prec), parse_literal(parts[1], p, prec))

    def to_json(self, prec: int | None = None) -> dict:
        return {"x": to_json(self.x, prec), "y": to_json(self.y, prec)}

    @classmethod
    def from_json(cls, record: dict) -> Point:
        return cls(from_json(record["x"]), from_json(record["y"]))


def haar_point(seed, N: int, p: int) -> Point:
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    return Point(haar_sample_unit(rng, N, p), haar_sample_unit(rng, N, p))


@dataclass(frozen=True)
class FieldParams:
    """Prime p (so q = p), map parameters a and b, and a default working precision.

    a and b must be exact: 0 < |a| < 1 and |b| = p.
    """

    p: int
    a: PadicScalar
    b: PadicScalar
    default_precision: int = 40

    def __post_init__(self):
        if not is_prime(self.p):
            raise InvalidParameters(f"p={self.p} is not prime")
        for name, v in (("a", self.a), ("b", self.b)):
            if v.p != self.p:
                raise InvalidParameters(f"{name} lives over p={v.p}, expected {self.p}")
            if not v.is_exact:
                raise InvalidParameters(f"{name} must be an exact literal")
        if self.a.coeff == 0 or self.a.val < 1:
            raise InvalidParameters("need 0 < |a| < 1 (val(a) >= 1)")
        if self.b.coeff == 0 or self.b.val != -1:
            raise InvalidParameters(f"need |b| = q = {self.p} (val(b) = -1)")
        if self.default_precision < 1:
            raise InvalidParameters("default_precision must be positive")
        if self.p == 2:
            warnings.warn("p = 2 is experimental", stacklevel=2)

    @classmethod
    def from_literals(cls, p: int = 3, a: str = "3", b: str = "1/3", default_precision: int = 40) -> FieldParams:
        return cls(p, parse_literal(str(a), p), parse_literal(str(b), p), default_precision)

    @property
    def q(self) -> int:
        return self.p

    @property
    def val_a(self) -> int:
        return self.a.val

    @property
    def abs_a(self) -> Fraction:
        return Fraction(self.p) ** (-self.val_a)

    @property
    def a_int(self) -> int:
        """a as an integer (val(a) >= 1 and a exact in Z[1/p] force a in Z)."""
        return self.a.coeff

    @property
    def b_unit(self) -> int:
        """The integer unit b * p (val(b) = -1 forces scale 1 in canonical form)."""
        return self.b.coeff

    def scalar(self, n, prec: int | None = None) -> PadicScalar:
        return PadicScalar.from_fraction(self.p, Fraction(n), prec)


def canonical_params(default_precision: int = 40) -> FieldParams:
    return FieldParams.from_literals(3, "3", "1/3", default_precision)
