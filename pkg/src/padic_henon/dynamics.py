"""The automorphism T(x, y) = (a y + b (x^q - x), x) of K^2, its inverse, and orbits.

Precision bookkeeping is whatever the scalar arithmetic proves: a forward step
costs one digit on the new x-coordinate (phi expands by q), a backward step
costs 1 + val(a) digits (phi, then division by a).
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

from .errors import (
    ExitsUnitPolydisc,
    Indeterminate,
    NotInUnitPolydisc,
    NotIntegral,
    PrecisionExhausted,
)
from .padic import FieldParams, PadicScalar, Point, from_json, is_integral, to_json


def phi(t: PadicScalar, params: FieldParams, allow_outside: bool = False) -> PadicScalar:
    """b (t^q - t). Maps R into R; pass ``allow_outside`` to evaluate off R."""
    if not allow_outside:
        inside = is_integral(t)
        if inside is False:
            raise NotIntegral(f"phi needs t in R, got valuation {t.val}")
        if inside is None:
            raise Indeterminate("cannot certify t in R")
    return params.b * (t ** params.p - t)


def step(pt: Point, params: FieldParams) -> Point:
    """T(x, y) = (a y + phi(x), x)."""
    return Point(params.a * pt.y + phi(pt.x, params, allow_outside=True), pt.x)


def step_inv(pt: Point, params: FieldParams) -> Point:
    """T^-1(x, y) = (y, (x - phi(y)) / a)."""
    return Point(pt.y, (pt.x - phi(pt.y, params, allow_outside=True)) / params.a)


@dataclass
class OrbitSegment:
    """Points T^k(pt) for k in [k_min, k_min + len(points) - 1], in time order."""

    points: list[Point]
    params: FieldParams
    k_min: int = 0

    @property
    def k_max(self) -> int:
        return self.k_min + len(self.points) - 1

    def at(self, k: int) -> Point:
        if not self.k_min <= k <= self.k_max:
            raise IndexError(k)
        return self.points[k - self.k_min]

    def precisions(self) -> list[tuple[int | None, int | None]]:
        return [(pt.x.abs_prec, pt.y.abs_prec) for pt in self.points]

    def __len__(self) -> int:
        return len(self.points)

    def to_jsonl(self) -> str:
        lines = []
        for i, pt in enumerate(self.points):
            rec = {"k": self.k_min + i, "x": to_json(pt.x), "y": to_json(pt.y),
                   "prec": pt.prec}
            lines.append(json.dumps(rec, sort_keys=True))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str, params: FieldParams) -> OrbitSegment:
        recs = [json.loads(line) for line in text.splitlines() if line.strip()]
        recs.sort(key=lambda r: r["k"])
        pts = [Point(from_json(r["x"]), from_json(r["y"])) for r in recs]
        return cls(pts, params, recs[0]["k"] if recs else 0)


def iterate_forward(pt: Point, n: int, params: FieldParams, min_prec: int = 1) -> Iterator[Point]:
    """Yield T^0(pt), ..., T^n(pt), raising once a coordinate drops below ``min_prec`` digits."""
    cur = pt
    for k in range(n + 1):
        if cur.prec is not None and cur.prec < min_prec:
            raise PrecisionExhausted(f"orbit precision fell to {cur.prec}", index=k)
        yield cur
        if k < n:
            cur = step(cur, params)


def forward_orbit(pt: Point, n: int, params: FieldParams, min_prec: int = 1) -> OrbitSegment:
    """n forward steps. The start needs about n + min_prec digits."""
    return OrbitSegment(list(iterate_forward(pt, n, params, min_prec)), params, 0)


def _certify_in_r2(pt: Point, k: int) -> None:
    inside = pt.in_unit_polydisc()
    if inside is False:
        raise ExitsUnitPolydisc(k)
    if inside is None:
        raise Indeterminate(index=k)


def backward_orbit(pt: Point, m: int, params: FieldParams, min_prec: int = 0) -> OrbitSegment:
    """m backward steps, each certified to stay in R^2.

    Raises :class:`ExitsUnitPolydisc` (k) when T^-k(pt) provably leaves R^2,
    i.e. pt is not in T^k(R^2).
    """
    _certify_in_r2(pt, 0)
    pts = [pt]
    cur = pt
    for k in range(1, m + 1):
        try:
            cur = step_inv(cur, params)
        except PrecisionExhausted:
            raise Indeterminate(index=k) from None
        _certify_in_r2(cur, k)
        if cur.prec is not None and cur.prec < min_prec:
            raise PrecisionExhausted(f"backward precision fell to {cur.prec}", index=k)
        pts.append(cur)
    pts.reverse()
    return OrbitSegment(pts, params, -m)


@dataclass(frozen=True)
class BasinStatus:
    """Outcome of :func:`basin_entry_time`: ``kind`` is entered, diverging or indeterminate."""

    kind: str
    steps: int

    @classmethod
    def entered(cls, n: int) -> BasinStatus:
        return cls("entered", n)

    @classmethod
    def diverging(cls, n: int) -> BasinStatus:
        return cls("diverging", n)

    @classmethod
    def indeterminate(cls, n: int) -> BasinStatus:
        return cls("indeterminate", n)


def divergence_streak(params: FieldParams) -> int:
    return max(3, params.val_a + 2)


def basin_entry_time(pt: Point, params: FieldParams, budget: int = 50) -> BasinStatus:
    """Least n <= budget with T^n(pt) in R^2, or a divergence classification.

    Diverging is a heuristic: the sup-norm grew strictly for
    ``divergence_streak`` consecutive steps with |x| > 1.
    """
    need = divergence_streak(params)
    cur, prev, streak = pt, pt.norm_bound(), 0
    for n in range(budget + 1):
        inside = cur.in_unit_polydisc()
        if inside is True:
            return BasinStatus.entered(n)
        if inside is None:
            return BasinStatus.indeterminate(n)
        if n == budget:
            break
        try:
            cur = step(cur, params)
        except PrecisionExhausted:
            return BasinStatus.indeterminate(n + 1)
        nrm = cur.norm_bound()
        if nrm > prev and is_integral(cur.x) is False:
            streak += 1
        else:
            streak = 0
        if streak >= need:
            return BasinStatus.diverging(n + 1)
        prev = nrm
    return BasinStatus.indeterminate(budget)


def newton_polygon(vals: list[int | None]) -> list[tuple[Fraction, int]]:
    """Lower convex hull of (i, vals[i]) as (slope, horizontal length) segments.

    ``None`` marks a zero coefficient and is skipped.
    """
    pts = [(i, v) for i, v in enumerate(vals) if v is not None]
    hull: list[tuple[int, int]] = []
    for pt in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # drop the middle point when it lies on or above the chord
            if (y2 - y1) * (pt[0] - x1) >= (pt[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(pt)
    return [(Fraction(y2 - y1, x2 - x1), x2 - x1) for (x1, y1), (x2, y2) in zip(hull, hull[1:])]


def eigen_norms(pt: Point, params: FieldParams) -> tuple[Fraction, Fraction]:
    """Norms of the Jacobian eigenvalues at pt in R^2, read off the Newton polygon of
    lambda^2 - b(q x^(q-1) - 1) lambda - a."""
    inside = pt.in_unit_polydisc()
    if inside is not True:
        raise NotInUnitPolydisc("eigen_norms needs a point certified in R^2")
    p = params.p
    trace = params.b * (p * pt.x ** (p - 1) - 1)
    if trace.is_zero:
        raise PrecisionExhausted("trace coefficient is zero to its precision")
    segments = newton_polygon([params.a.val, trace.val, 0])
    if [length for _, length in segments] != [1, 1]:
        raise ArithmeticError(f"unexpected Newton polygon {segments}")
    norms = sorted(Fraction(p) ** slope for slope, _ in segments)
    lo, hi = norms
    if lo != params.abs_a / p or hi != p:
        raise ArithmeticError(f"eigen norms {norms} disagree with (|a|/q, q)")
    return lo, hi
