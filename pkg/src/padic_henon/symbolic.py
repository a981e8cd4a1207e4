"""Itinerary coding of the attractor.

A window (s_-m .. s_-1 . s_0 .. s_n) is decoded to the point (x_0, x_-1) of the
scalar orbit x_{k+1} = a x_{k-1} + phi(x_k) with x_k = s_k mod p, pinned by
x_n = s_n and a virtual x_{-m-1} = 0. Geometrically this is the meeting point of
the vertical curve of the forward symbols and the horizontal curve of the
backward symbols, and both constructions are available: a Gauss-Seidel sweep
over the orbit (fast, vectorised over many windows) and the nested
contractions that define the curves (slow, used as the reference).
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .dynamics import backward_orbit, iterate_forward, step
from .errors import (
    EmptyForwardPart,
    InsufficientPrecision,
    MalformedLiteral,
    NoSolutionInDisc,
    NotIntegral,
    PrecisionExhausted,
    RecursionBudgetExceeded,
)
from .padic import DIGIT_CHARS, FieldParams, PadicScalar, Point, is_integral, ppow, reduce_mod

GUARD_DIGITS = 4
# int64 products of two residues stay exact below this modulus
_INT64_MODULUS_CAP = 3_000_000_000


@dataclass(frozen=True)
class ItineraryWindow:
    """Symbols s_-1..s_-m (``back``) and s_0..s_n (``fwd``) over F_p."""

    back: tuple[int, ...]
    fwd: tuple[int, ...]
    p: int

    def __post_init__(self):
        object.__setattr__(self, "back", tuple(int(s) for s in self.back))
        object.__setattr__(self, "fwd", tuple(int(s) for s in self.fwd))
        if not self.fwd:
            raise EmptyForwardPart("a window needs at least s_0")
        for s in self.back + self.fwd:
            if not 0 <= s < self.p:
                raise ValueError(f"symbol {s} outside [0, {self.p})")

    @property
    def m(self) -> int:
        return len(self.back)

    @property
    def n(self) -> int:
        return len(self.fwd) - 1

    def symbols(self) -> tuple[int, ...]:
        """All symbols in time order s_-m .. s_n."""
        return tuple(reversed(self.back)) + self.fwd

    def symbol(self, k: int) -> int:
        return self.fwd[k] if k >= 0 else self.back[-k - 1]

    def format(self) -> str:
        chars = DIGIT_CHARS
        return "".join(chars[s] for s in reversed(self.back)) + "." + "".join(chars[s] for s in self.fwd)

    __str__ = format

    @classmethod
    def parse(cls, text: str, p: int) -> ItineraryWindow:
        text = text.strip()
        if text.count(".") != 1:
            raise MalformedLiteral(f"window {text!r} needs exactly one '.'")
        left, right = text.split(".")
        try:
            back = [DIGIT_CHARS.index(c) for c in reversed(left.lower())]
            fwd = [DIGIT_CHARS.index(c) for c in right.lower()]
        except ValueError:
            raise MalformedLiteral(f"bad symbol in window {text!r}") from None
        try:
            return cls(tuple(back), tuple(fwd), p)
        except ValueError as exc:
            raise MalformedLiteral(str(exc)) from None

    @classmethod
    def from_symbols(cls, symbols: Sequence[int], m: int, p: int) -> ItineraryWindow:
        """Inverse of :meth:`symbols`: the first ``m`` entries are s_-m..s_-1."""
        symbols = tuple(symbols)
        return cls(tuple(reversed(symbols[:m])), symbols[m:], p)


@dataclass(frozen=True)
class DecodedPoint:
    point: Point
    radius: Fraction


def tube_radii(m: int, n: int, params: FieldParams) -> tuple[Fraction, Fraction]:
    """(delta_n, eps_m) = (q^-(n+1), |a|^m q^-(m+1))."""
    if m < 0 or n < 0:
        raise ValueError("depths must be non-negative")
    q = params.q
    return Fraction(1, q ** (n + 1)), params.abs_a ** m / q ** (m + 1)


def decode_radius(m: int, n: int, params: FieldParams) -> Fraction:
    """Radius of the ball known to contain every point whose itinerary extends the window."""
    return max(Fraction(1, params.q ** (n + 1)), (params.abs_a / params.q) ** m)


def radius_digits(m: int, n: int, params: FieldParams) -> int:
    """Number of p-adic digits pinned down by a window: -log_p of :func:`decode_radius`."""
    return min(n + 1, m * (params.val_a + 1))


# -- encoding ---------------------------------------------------------------


def encode_forward(pt: Point, n: int, params: FieldParams) -> tuple[int, ...]:
    """s_0..s_n, the residues of the x-coordinates of T^0(pt)..T^n(pt)."""
    return tuple(reduce_mod(q.x, 1) for q in iterate_forward(pt, n, params, min_prec=1))


def encode_backward(pt: Point, m: int, params: FieldParams) -> tuple[int, ...]:
    """s_-1..s_-m, the residues of the y-coordinates of T^0(pt)..T^-(m-1)(pt).

    Certifies T^-m(pt) in R^2, so a point outside T^m(R^2) raises
    :class:`ExitsUnitPolydisc`.
    """
    seg = backward_orbit(pt, m, params)
    out = []
    for k in range(m):
        y = seg.at(-k).y
        try:
            out.append(reduce_mod(y, 1))
        except InsufficientPrecision:
            raise PrecisionExhausted("backward orbit ran out of digits", index=k) from None
    return tuple(out)


def encode(pt: Point, m: int, n: int, params: FieldParams) -> ItineraryWindow:
    return ItineraryWindow(encode_backward(pt, m, params), encode_forward(pt, n, params), params.p)


# -- modular kernels (shared by Python ints and numpy arrays) ----------------


def _powmod(y, e: int, M):
    result = None
    base = y
    while e:
        if e & 1:
            result = base if result is None else result * base % M
        e >>= 1
        if e:
            base = base * base % M
    return result


def _same(u, v) -> bool:
    return bool(np.all(u == v))


class _Kernel:
    """Residue arithmetic mod p^k for the map with parameters ``params``."""

    def __init__(self, params: FieldParams, k: int):
        if k < 1:
            raise ValueError("need at least one digit")
        p = params.p
        self.p, self.k = p, k
        self.M = ppow(p, k)
        self.M1 = ppow(p, k - 1)
        self.a = params.a_int % self.M
        bu = params.b_unit
        self.bu = bu % self.M1 if self.M1 > 1 else 0
        self.binv = pow(bu, -1, self.M1) if self.M1 > 1 else 0

    def phi(self, y):
        """phi(y) mod p^(k-1) from y mod p^k."""
        return (_powmod(y, self.p, self.M) - y) % self.M // self.p * self.bu % self.M1

    def div_b(self, d):
        """d / b mod p^k from d mod p^(k-1)."""
        return self.p * (d % self.M1 * self.binv % self.M1)

    def solve_local(self, t, y):
        """The root of phi(y) = t (mod p^(k-1)) in the residue disc of the start ``y``."""
        for _ in range(self.k + 1):
            ny = (y - self.div_b(t - self.phi(y))) % self.M
            if _same(ny, y):
                return ny
            y = ny
        raise NoSolutionInDisc("local contraction failed to settle")

    def gauss_seidel(self, x: list, lo: int, hi: int, periodic: bool = False) -> list:
        """Solve x[i+1] = a x[i-1] + phi(x[i]) for the unknowns lo..hi-1 in place.

        With ``periodic`` the indices wrap around and every entry is unknown.
        """
        L = len(x)
        for _ in range(self.k + 2):
            changed = False
            for i in range(hi - 1, lo - 1, -1):
                t = (x[(i + 1) % L] - self.a * x[(i - 1) % L]) % self.M
                y = self.solve_local(t, x[i])
                if not changed and not _same(y, x[i]):
                    changed = True
                x[i] = y
            if not changed:
                return x
        raise NoSolutionInDisc("Gauss-Seidel sweep did not settle")


def _dtype_for(M: int):
    return np.int64 if M < _INT64_MODULUS_CAP else object


def _orbit_solve(symbols: Sequence, m: int, params: FieldParams, k: int) -> list:
    """Residues x_-m-1 .. x_n mod p^k for time-ordered symbols s_-m..s_n."""
    ker = _Kernel(params, k)
    x = [0] + list(symbols)
    return ker.gauss_seidel(x, 1, len(x) - 1)


def default_precision(m: int, n: int, params: FieldParams) -> int:
    """Enough digits to decode, re-encode both halves, and stay below the radius."""
    return max(n + 1, m * (params.val_a + 1) + 1) + GUARD_DIGITS


def decode(window: ItineraryWindow, params: FieldParams, prec: int | None = None,
           method: str = "gs", verify: bool = True) -> DecodedPoint:
    """Finite-depth conjugacy: the point coded by ``window`` and its certified radius.

    ``method`` is "gs" (orbit sweep) or "curves" (curve intersection); both give
    the same residues. ``verify`` re-encodes the point and checks the window.
    """
    if window.p != params.p:
        raise ValueError("window and parameters use different primes")
    m, n = window.m, window.n
    k = default_precision(m, n, params) if prec is None else prec
    if method == "gs":
        x = _orbit_solve(window.symbols(), m, params, k)
        X, Y = x[m + 1], x[m]
    elif method == "curves":
        X, Y = _intersect_curves(window, params, k)
    else:
        raise ValueError(f"unknown decode method {method!r}")
    pt = Point(PadicScalar.from_int(params.p, int(X), k), PadicScalar.from_int(params.p, int(Y), k))
    result = DecodedPoint(pt, decode_radius(m, n, params))
    if verify:
        _verify_round_trip(result.point, window, params)
    return result


def _verify_round_trip(pt: Point, window: ItineraryWindow, params: FieldParams) -> None:
    fwd_budget = pt.prec - window.n
    back_budget = pt.prec - window.m * (params.val_a + 1)
    if fwd_budget < 1 or back_budget < 1:
        return
    if encode_forward(pt, window.n, params) != window.fwd:
        raise AssertionError(f"forward re-encoding of {window} disagrees")
    if encode_backward(pt, window.m, params) != window.back:
        raise AssertionError(f"backward re-encoding of {window} disagrees")


def batch_decode(windows: np.ndarray, m: int, params: FieldParams, prec: int) -> tuple[np.ndarray, np.ndarray]:
    """Decode many windows at once.

    ``windows`` has shape (W, m+n+1) with rows in time order s_-m..s_n. Returns
    the residues of x and y mod p^prec.
    """
    windows = np.asarray(windows)
    if windows.ndim != 2 or windows.shape[1] < m + 1:
        raise ValueError("windows must be a 2-d array with at least m+1 columns")
    dtype = _dtype_for(ppow(params.p, prec))
    cols = [windows[:, i].astype(dtype) for i in range(windows.shape[1])]
    x = _orbit_solve(cols, m, params, prec)
    return x[m + 1], x[m]


def all_windows(p: int, length: int) -> np.ndarray:
    """Every symbol string of the given length, one per row, in lexicographic order."""
    if length == 0:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.indices((p,) * length).reshape(length, -1).T
    return np.ascontiguousarray(grids, dtype=np.int64)


# -- the curves ---------------------------------------------------------------


class _CurveEvaluator:
    """Memoised evaluation of the nested contractions that define the curves."""

    def __init__(self, params: FieldParams, max_depth: int = 256):
        self.params = params
        self.p = params.p
        self.max_depth = max_depth
        self.memo: dict = {}
        self.kernels: dict[int, _Kernel] = {}

    def kernel(self, r: int) -> _Kernel:
        ker = self.kernels.get(r)
        if ker is None:
            ker = self.kernels[r] = _Kernel(self.params, r)
        return ker

    def _check_depth(self, syms: tuple) -> None:
        if len(syms) - 1 > self.max_depth:
            raise RecursionBudgetExceeded(f"curve level {len(syms) - 1} exceeds budget {self.max_depth}")

    def vertical(self, syms: tuple, t: int, r: int) -> int:
        """f^(s_0..s_n)(t) mod p^r: the x with T(x, t) on the curve of s_1..s_n."""
        if r <= 0:
            return 0
        if len(syms) == 1:
            return syms[0] % ppow(self.p, r)
        self._check_depth(syms)
        key = ("v", syms, r, t % ppow(self.p, r - 1))
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        ker = self.kernel(r)
        at = ker.a * t
        x = syms[0]
        for _ in range(r + 2):
            inner = self.vertical(syms[1:], x, r - 1)
            nx = (x + ker.div_b(at + ker.phi(x) - inner)) % ker.M
            if nx == x:
                break
            x = nx
        else:
            raise NoSolutionInDisc("vertical contraction did not settle")
        self.memo[key] = x
        return x

    def horizontal(self, syms: tuple, t: int, r: int) -> int:
        """g^(s_-1..s_-m)(t) mod p^r: the y with T^-1(t, y) on the curve of s_-2..s_-m."""
        if r <= 0:
            return 0
        if len(syms) == 1:
            return syms[0] % ppow(self.p, r)
        self._check_depth(syms)
        key = ("h", syms, r, t % ppow(self.p, r - 1))
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        ker = self.kernel(r)
        y = syms[0]
        for _ in range(r + 2):
            inner = self.horizontal(syms[1:], y, r - 1)
            ny = (y - ker.div_b(t - ker.phi(y) - ker.a * inner)) % ker.M
            if ny == y:
                break
            y = ny
        else:
            raise NoSolutionInDisc("horizontal contraction did not settle")
        self.memo[key] = y
        return y


def _curve_arg(t: PadicScalar, prec: int) -> tuple[int, int]:
    """t mod p^(prec-1) and the precision the curve value can carry."""
    if is_integral(t) is False:
        raise NotIntegral("curve argument must lie in R")
    if t.abs_prec is not None:
        prec = min(prec, t.abs_prec + 1)
    if prec < 1:
        raise PrecisionExhausted("argument carries no digits")
    return reduce_mod(t, prec - 1), prec


def vertical_curve_eval(fwd: Sequence[int], t: PadicScalar, params: FieldParams,
                        prec: int | None = None, max_depth: int = 256) -> PadicScalar:
    """x = f(t) on the vertical curve of s_0..s_n; the constant s_0 when n = 0.

    The curve is (1/q)-Lipschitz, so the result carries one digit more than ``t``.
    """
    prec = params.default_precision if prec is None else prec
    ti, prec = _curve_arg(t, prec)
    ev = _CurveEvaluator(params, max_depth)
    return PadicScalar.from_int(params.p, ev.vertical(tuple(fwd), ti, prec), prec)


def horizontal_curve_eval(back: Sequence[int], t: PadicScalar, params: FieldParams,
                          prec: int | None = None, max_depth: int = 256) -> PadicScalar:
    """y = g(t) on the horizontal curve of s_-1..s_-m; the constant s_-1 when m = 1."""
    prec = params.default_precision if prec is None else prec
    ti, prec = _curve_arg(t, prec)
    ev = _CurveEvaluator(params, max_depth)
    return PadicScalar.from_int(params.p, ev.horizontal(tuple(back), ti, prec), prec)


def _intersect_curves(window: ItineraryWindow, params: FieldParams, k: int,
                      start: int | None = None) -> tuple[int, int]:
    """Alternate x = f(y), y = g(x); the composite is a 1/q^2 contraction."""
    ev = _CurveEvaluator(params)
    fwd = window.fwd
    back = window.back + (0,)
    M = ppow(params.p, k)
    x = fwd[0] if start is None else start % M
    y = ev.horizontal(back, x, k)
    for _ in range(k + 2):
        nx = ev.vertical(fwd, y, k)
        ny = ev.horizontal(back, nx, k)
        if nx == x and ny == y:
            return x, y
        x, y = nx, ny
    raise NoSolutionInDisc("curve intersection did not settle")


def intersect_curves(window: ItineraryWindow, params: FieldParams, prec: int,
                     start: PadicScalar | int | None = None) -> Point:
    """Reference decode by curve intersection, starting the alternation at x = ``start``."""
    if isinstance(start, PadicScalar):
        start = reduce_mod(start, prec)
    X, Y = _intersect_curves(window, params, prec, start)
    return Point(PadicScalar.from_int(params.p, X, prec), PadicScalar.from_int(params.p, Y, prec))


def local_digit_solve(t_next: PadicScalar, drag: PadicScalar, s: int, params: FieldParams,
                      prec: int | None = None) -> PadicScalar:
    """The x = s mod p with phi(x) + drag = t_next.

    Iterates x <- x - (t_next - phi(x) - drag)/b from x = s until two iterates
    agree; each pass fixes one more digit.
    """
    if not 0 <= s < params.p:
        raise ValueError(f"symbol {s} outside [0, {params.p})")
    target = t_next - drag
    if is_integral(target) is False:
        raise NoSolutionInDisc("phi maps R into R, so t_next - drag must be integral")
    k = target.abs_prec + 1 if target.abs_prec is not None else None
    if prec is not None:
        k = prec if k is None else min(k, prec)
    if k is None:
        k = params.default_precision
    if k < 1:
        raise PrecisionExhausted("no digits left to solve for")
    ker = _Kernel(params, k)
    ti = reduce_mod(target, k - 1) if k > 1 else 0
    return PadicScalar.from_int(params.p, int(ker.solve_local(ti, s)), k)


# -- shift, conjugacy, companions, periodic points ----------------------------


def shift(window: ItineraryWindow) -> ItineraryWindow:
    """Move s_0 into the past: (..s_-1.s_0 s_1..) -> (..s_-1 s_0.s_1..)."""
    if window.n < 1:
        raise EmptyForwardPart("cannot shift a window with only s_0")
    return ItineraryWindow((window.fwd[0],) + window.back, window.fwd[1:], window.p)


def conjugacy_residual(window: ItineraryWindow, params: FieldParams, prec: int | None = None) -> Fraction:
    """Upper bound on the sup-norm of T(decode(w)) - decode(shift(w))."""
    if window.n < 1:
        raise EmptyForwardPart("conjugacy needs n >= 1")
    sw = shift(window)
    k = prec if prec is not None else max(default_precision(window.m, window.n, params),
                                          default_precision(sw.m, sw.n, params))
    lhs = step(decode(window, params, k, verify=False).point, params)
    rhs = decode(sw, params, k, verify=False).point
    return (lhs - rhs).norm_bound()


def stable_companion(pt: Point, new_back: Sequence[int], n: int, params: FieldParams,
                     prec: int | None = None) -> Point:
    """The point with pt's first n+1 forward symbols and backward symbols ``new_back``."""
    fwd = encode_forward(pt, n, params)
    return decode(ItineraryWindow(tuple(new_back), fwd, params.p), params, prec).point


def periodic_point(word: Sequence[int], params: FieldParams, prec: int | None = None) -> Point:
    """The T-periodic point whose itinerary repeats ``word`` (s_0..s_{L-1}) forever."""
    word = tuple(int(s) for s in word)
    if not word:
        raise EmptyForwardPart("empty period word")
    for s in word:
        if not 0 <= s < params.p:
            raise ValueError(f"symbol {s} outside [0, {params.p})")
    k = params.default_precision if prec is None else prec
    x = _Kernel(params, k).gauss_seidel(list(word), 0, len(word), periodic=True)
    return Point(PadicScalar.from_int(params.p, x[0], k), PadicScalar.from_int(params.p, x[-1], k))


def periodic_extension(window: ItineraryWindow) -> tuple[int, ...]:
    """The period word s_-m..s_n read from time 0, i.e. the bisequence repeating the window."""
    syms = window.symbols()
    m = window.m
    return syms[m:] + syms[:m]


def random_window(rng: random.Random, m: int, n: int, p: int) -> ItineraryWindow:
    return ItineraryWindow(tuple(rng.randrange(p) for _ in range(m)),
                           tuple(rng.randrange(p) for _ in range(n + 1)), p)


def iter_windows(m: int, n: int, p: int) -> Iterable[ItineraryWindow]:
    for syms in itertools.product(range(p), repeat=m + n + 1):
        yield ItineraryWindow.from_symbols(syms, m, p)
