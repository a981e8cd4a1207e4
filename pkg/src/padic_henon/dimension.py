"""Exact ball counts over the attractor and the dimension estimates built from them.

Balls of radius p^-j in R^2 are residue classes mod p^j, so the number of
radius-r balls meeting the attractor is an exact integer once every window of
a sufficiently deep itinerary length has been decoded.
"""
from __future__ import annotations

import csv
import io
import math
import statistics
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DegenerateSeries, DepthInsufficient, WindowCapExceeded
from .padic import FieldParams, Point, ppow, reduce_mod
from .symbolic import all_windows, batch_decode, decode_radius, radius_digits

DEFAULT_CAP_EXPONENT = 10
_CHUNK = 1 << 16


@dataclass(frozen=True, order=True)
class BallId:
    """The ball {(x, y) in R^2 : x = x_res, y = y_res mod p^depth}."""

    depth: int
    x_res: int
    y_res: int
    p: int

    def __post_init__(self):
        if self.depth < 0:
            raise ValueError("depth must be non-negative")
        M = ppow(self.p, self.depth)
        if not (0 <= self.x_res < M and 0 <= self.y_res < M):
            raise ValueError(f"residues must be reduced mod {self.p}^{self.depth}")

    @property
    def radius(self) -> Fraction:
        return Fraction(1, ppow(self.p, self.depth))

    def parent(self) -> BallId:
        if self.depth == 0:
            raise ValueError("R^2 has no parent ball")
        M = ppow(self.p, self.depth - 1)
        return BallId(self.depth - 1, self.x_res % M, self.y_res % M, self.p)

    def contains(self, pt: Point) -> bool:
        return (reduce_mod(pt.x, self.depth), reduce_mod(pt.y, self.depth)) == (self.x_res, self.y_res)

    @classmethod
    def of_point(cls, pt: Point, depth: int) -> BallId:
        return cls(depth, reduce_mod(pt.x, depth), reduce_mod(pt.y, depth), pt.p)


def theoretical_dimension(params: FieldParams) -> Fraction:
    """1 + 1/(1 + log_q(1/|a|)); exact because |a| is a power of q."""
    return 1 + Fraction(1, 1 + params.val_a)


def dimension_formula(q: float, abs_a: float) -> float:
    """The same formula for an arbitrary 0 < |a| < 1."""
    return 1.0 + 1.0 / (1.0 + math.log(1.0 / abs_a, q))


def window_depths(j: int, params: FieldParams) -> tuple[int, int]:
    """Smallest (m, n) whose decode radius is at most p^-j."""
    if j < 0:
        raise ValueError("depth must be non-negative")
    if j == 0:
        return 0, 0
    return -(-j // (params.val_a + 1)), j - 1


def _check_window(j: int, m: int, n: int, params: FieldParams) -> None:
    if radius_digits(m, n, params) < j:
        raise DepthInsufficient(
            f"window (m={m}, n={n}) only pins radius {decode_radius(m, n, params)}, "
            f"above {params.p}^-{j}")


def ball_census(j: int, params: FieldParams, m: int | None = None, n: int | None = None,
                max_windows: int | None = None) -> Counter:
    """How many windows of shape (m, n) decode into each depth-j ball."""
    if m is None or n is None:
        m, n = window_depths(j, params)
    _check_window(j, m, n, params)
    p = params.p
    cap = ppow(p, DEFAULT_CAP_EXPONENT) if max_windows is None else max_windows
    total = ppow(p, m + n + 1)
    if total > cap:
        raise WindowCapExceeded(f"{total} windows exceed the cap of {cap}")
    census: Counter = Counter()
    if j == 0:
        census[BallId(0, 0, 0, p)] = total
        return census
    windows = all_windows(p, m + n + 1)
    M = ppow(p, j)
    for lo in range(0, total, _CHUNK):
        X, Y = batch_decode(windows[lo:lo + _CHUNK], m, params, j)
        keys = np.asarray(X, dtype=object) * M + np.asarray(Y, dtype=object)
        for key, cnt in zip(*np.unique(keys, return_counts=True)):
            census[BallId(j, int(key) // M, int(key) % M, p)] += int(cnt)
    return census


def attractor_ball_ids(j: int, params: FieldParams, m: int | None = None, n: int | None = None,
                       max_windows: int | None = None) -> set[BallId]:
    """The depth-j balls meeting the attractor."""
    return set(ball_census(j, params, m, n, max_windows))


def tube_scale_depth(n: int, params: FieldParams) -> int:
    """-log_p of eps_n = |a|^n / q^(n+1)."""
    return n * (params.val_a + 1) + 1


@dataclass
class CountEntry:
    depth: int
    radius: Fraction
    count: int
    mass_lower_bound: float
    tube_index: int | None = None
    paper_upper_bound: Fraction | None = None
    tube_cover_bound: Fraction | None = None


@dataclass
class CountSeries:
    entries: list[CountEntry]
    params: FieldParams
    alpha: Fraction = field(default=Fraction(0))

    def radii(self) -> list[Fraction]:
        return [e.radius for e in self.entries]

    def counts(self) -> list[int]:
        return [e.count for e in self.entries]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["radius", "count", "paper_upper_bound", "mass_lower_bound", "tube_cover_bound"])
        for e in self.entries:
            w.writerow([f"{float(e.radius):.12g}", e.count,
                        "" if e.paper_upper_bound is None else str(e.paper_upper_bound),
                        f"{e.mass_lower_bound:.6f}",
                        "" if e.tube_cover_bound is None else str(e.tube_cover_bound)])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {
            "p": self.params.p,
            "a": str(self.params.a.to_fraction()),
            "b": str(self.params.b.to_fraction()),
            "alpha": str(self.alpha),
            "entries": [
                {"depth": e.depth, "radius": str(e.radius), "count": e.count,
                 "mass_lower_bound": e.mass_lower_bound, "tube_index": e.tube_index,
                 "paper_upper_bound": None if e.paper_upper_bound is None else str(e.paper_upper_bound),
                 "tube_cover_bound": None if e.tube_cover_bound is None else str(e.tube_cover_bound)}
                for e in self.entries
            ],
        }


def box_count(depths, params: FieldParams, max_windows: int | None = None) -> CountSeries:
    """Exact N(p^-j) for each depth j.

    Rows whose radius is a tube scale eps_n also carry the covering bound
    q^n/eps_n and the bound q^(n+1)/eps_n that counts the n+1 symbols fixing
    the tube.
    """
    depths = sorted(depths)
    alpha = theoretical_dimension(params)
    q = params.q
    tube_at = {}
    for t in range(1, max(depths, default=0) + 1):
        d = tube_scale_depth(t, params)
        if d > max(depths, default=0):
            break
        tube_at[d] = t
    entries = []
    for j in depths:
        r = Fraction(1, ppow(params.p, j))
        count = len(ball_census(j, params, max_windows=max_windows))
        entry = CountEntry(j, r, count, float(r) ** -float(alpha) / q ** 2)
        t = tube_at.get(j)
        if t is not None:
            entry.tube_index = t
            entry.paper_upper_bound = q ** t / r
            entry.tube_cover_bound = q ** (t + 1) / r
        entries.append(entry)
    return CountSeries(entries, params, alpha)


def _exact_exponent(n, base: int) -> int | None:
    """k with n == base**k, or None."""
    if not isinstance(n, int) or n < 1:
        return None
    k = 0
    while n % base == 0:
        n //= base
        k += 1
    return k if n == 1 else None


def slope_exact(series: CountSeries) -> Fraction | None:
    """The least-squares slope as a rational, when every radius and count is a power of p."""
    p = series.params.p
    pts = []
    for e in series.entries:
        j = _exact_exponent(Fraction(e.radius).denominator, p) if Fraction(e.radius).numerator == 1 else None
        k = _exact_exponent(e.count, p)
        if j is None or k is None:
            return None
        pts.append((Fraction(j), Fraction(k)))
    if len(pts) < 3 or len({x for x, _ in pts}) < 2:
        return None
    xbar = sum(x for x, _ in pts) / len(pts)
    ybar = sum(y for _, y in pts) / len(pts)
    return (sum((x - xbar) * (y - ybar) for x, y in pts)
            / sum((x - xbar) ** 2 for x, _ in pts))


def dimension_estimate(series: CountSeries) -> float:
    """Least-squares slope of log N(r) against log(1/r)."""
    pts = [(math.log(1 / float(e.radius)), math.log(e.count)) for e in series.entries]
    if len(pts) < 3:
        raise DegenerateSeries(f"need at least 3 radii, got {len(pts)}")
    xs, ys = zip(*pts)
    if len(set(xs)) < 2:
        raise DegenerateSeries("all radii coincide")
    exact = slope_exact(series)
    if exact is not None:
        return float(exact)
    slope, _ = statistics.linear_regression(xs, ys)
    return slope


def slope_within(series: CountSeries, target: Fraction, tol: Fraction) -> bool:
    """|slope - target| <= tol, decided exactly whenever the slope is rational."""
    exact = slope_exact(series)
    if exact is not None:
        return abs(exact - Fraction(target)) <= Fraction(tol)
    return abs(dimension_estimate(series) - float(target)) <= float(tol)


def synthetic_series(radii, exponent: float, params: FieldParams) -> CountSeries:
    """CountSeries with N(r) = r^-exponent; counts may be non-integral."""
    entries = [CountEntry(0, Fraction(r), float(r) ** -exponent, 0.0) for r in radii]
    return CountSeries(entries, params)


def regularity_ratios(depths, params: FieldParams, max_windows: int | None = None) -> dict[int, float]:
    """max over depth-j balls of mu(B) / diam(B)^alpha, per depth."""
    from .measure import ball_measures

    alpha = float(theoretical_dimension(params))
    out = {}
    for j in depths:
        mus = ball_measures(j, params, max_windows=max_windows)
        out[j] = max(float(mu) * params.p ** (alpha * j) for mu in mus.values())
    return out


def regularity_check(depths, params: FieldParams, max_windows: int | None = None) -> float:
    """The largest mu(B)/diam(B)^alpha over all enumerated balls; bounded by q^2."""
    return max(regularity_ratios(depths, params, max_windows).values())
