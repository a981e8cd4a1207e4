"""The acceptance suite: one function per criterion, each returning a :class:`CriterionResult`."""
from __future__ import annotations

import random
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .dimension import box_count, dimension_estimate, regularity_check, slope_within, theoretical_dimension
from .dynamics import backward_orbit, eigen_norms, phi, step
from .errors import ExitsUnitPolydisc
from .measure import orbit_rows
from .padic import FieldParams, PadicScalar, Point, canonical_params, haar_point, pnorm
from .symbolic import (
    ItineraryWindow,
    conjugacy_residual,
    decode,
    encode,
    random_window,
    stable_companion,
    tube_radii,
)


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} [{self.number}] {self.title}: {self.detail} ({self.seconds:.1f}s)"


def variant_params() -> FieldParams:
    return FieldParams.from_literals(p=3, a="9", b="1/3")


def hensel_sqrt(c: int, p: int, root_mod_p: int, digits: int) -> int:
    """Root of x^2 = c congruent to ``root_mod_p``, lifted one digit at a time by trial."""
    x = root_mod_p % p
    if (x * x - c) % p:
        raise ValueError("no root with that residue")
    for k in range(1, digits):
        M = p ** (k + 1)
        x = next(x + d * p ** k for d in range(p) if ((x + d * p ** k) ** 2 - c) % M == 0)
    return x


def phi_expansion(seed: int = 1, pairs: int = 10_000, width: int = 30) -> CriterionResult:
    params = canonical_params()
    p = params.p
    rng = random.Random(seed)
    bad = 0
    for _ in range(pairs):
        t1 = rng.randrange(p ** width)
        v = rng.randrange(1, width)
        u = rng.randrange(1, p ** (width - v))
        if u % p == 0:
            u += 1
        s1, s2 = PadicScalar.from_int(p, t1), PadicScalar.from_int(p, t1 + u * p ** v)
        lhs = pnorm(phi(s1, params) - phi(s2, params))
        if lhs != params.q * pnorm(s1 - s2):
            bad += 1
    return CriterionResult(1, "phi expansion", bad == 0, f"{pairs - bad}/{pairs} pairs with |dphi| = q|dt|")


def strict_attractor() -> CriterionResult:
    params = canonical_params()
    try:
        backward_orbit(Point.from_ints(params.p, 1, 0), 1, params)
    except ExitsUnitPolydisc as exc:
        return CriterionResult(2, "strict attractor witness", exc.k == 1, f"T^-1(1,0) leaves R^2 at step {exc.k}")
    return CriterionResult(2, "strict attractor witness", False, "backward step from (1,0) stayed in R^2")


def conjugacy(seed: int = 2024, count: int = 500, depth: int = 6) -> CriterionResult:
    params = canonical_params()
    rng = random.Random(seed)
    delta, _ = tube_radii(0, depth - 1, params)
    _, eps = tube_radii(depth + 1, 0, params)
    bound = max(delta, eps)
    worst = Fraction(0)
    round_trips = 0
    for _ in range(count):
        w = random_window(rng, depth, depth, params.p)
        worst = max(worst, conjugacy_residual(w, params))
        pt = decode(w, params, verify=False).point
        round_trips += encode(pt, w.m, w.n, params) == w
    ok = worst <= bound and round_trips == count
    return CriterionResult(3, "conjugacy", ok,
                           f"max residual {worst} <= {bound}; {round_trips}/{count} round trips")


def fixed_point(digits: int = 4) -> CriterionResult:
    params = canonical_params()
    w = ItineraryWindow((1,) * 6, (1,) * 7, params.p)
    pt = decode(w, params).point
    M = params.p ** digits
    root = hensel_sqrt(-5, params.p, 1, digits) % M
    got = (pt.x.coeff % M, pt.y.coeff % M)
    return CriterionResult(4, "fixed point cross-check", got == (root, root),
                           f"decoded {got} mod 3^{digits}, Hensel root {root}")


def equidistribution(seed: int = 11, N: int = 10_000) -> CriterionResult:
    params = canonical_params()
    tol = {1: 0.02, 2: 0.015}
    haar = haar_point(seed, N + 2, params.p)
    inv_a = (PadicScalar.from_int(params.p, 1) / params.a).with_prec(N + 2)
    basin = step(Point(PadicScalar.from_int(params.p, 0, N + 2), inv_a), params)
    rows = orbit_rows("haar", haar, N, params, (1, 2), tolerances=tol)
    rows += orbit_rows("basin", basin, N, params, (1, 2), tolerances=tol)
    worst = max(abs(r.frequency - float(Fraction(r.expected))) for r in rows)
    failed = [f"{r.seed}:{r.word}" for r in rows if not r.passed]
    return CriterionResult(5, "equidistribution", not failed,
                           f"{len(rows) - len(failed)}/{len(rows)} bands, worst deviation {worst:.4f}")


def stable_manifold(steps: int = 8) -> CriterionResult:
    params = canonical_params()
    origin = Point.from_ints(params.p, 0, 0)
    companion = stable_companion(origin, (1,) + (0,) * (steps - 1), steps + 2, params, prec=40)
    a, b = origin, companion
    ok = not a.agrees(b)
    worst_margin = None
    for k in range(1, steps + 1):
        a, b = step(a, params), step(b, params)
        eps = params.abs_a ** (k - 1) / params.q ** k
        dist = (a - b).norm_bound()
        ok = ok and dist <= eps
        ratio = dist / eps
        worst_margin = ratio if worst_margin is None else max(worst_margin, ratio)
    return CriterionResult(6, "stable-manifold convergence", ok,
                           f"max |T^k P - T^k P'| / eps_(k-1) over k<=8 is {worst_margin}")


def dimension_sandwich() -> CriterionResult:
    canon, var = canonical_params(), variant_params()
    series = box_count(range(1, 5), canon)
    alpha = float(theoretical_dimension(canon))
    lower_ok = all(e.count >= float(e.radius) ** -alpha / 9 for e in series.entries)
    tube_rows = [e for e in series.entries if e.paper_upper_bound is not None]
    upper_ok = all(e.count <= e.paper_upper_bound for e in tube_rows)
    tube_ok = all(e.count <= e.tube_cover_bound for e in tube_rows)
    tol = Fraction(1, 10)
    series_c, series_v = box_count(range(1, 7), canon), box_count(range(1, 8), var)
    slope_c, slope_v = dimension_estimate(series_c), dimension_estimate(series_v)
    slopes_ok = (slope_within(series_c, theoretical_dimension(canon), tol)
                 and slope_within(series_v, theoretical_dimension(var), tol)
                 and slope_within(series, theoretical_dimension(canon), tol))
    tubes = ", ".join(f"N(eps_{e.tube_index})={e.count} vs {e.paper_upper_bound} (q^(n+1)/eps_n={e.tube_cover_bound})"
                      for e in tube_rows)
    detail = (f"counts {series.counts()}; lower bound {'ok' if lower_ok else 'violated'}; "
              f"tube cover {'ok' if upper_ok else 'violated'}: {tubes}; "
              f"slopes {dimension_estimate(series):.4f} at j<=4, {slope_c:.4f} at j<=6 (1.5), "
              f"{slope_v:.4f} at j<=7 (4/3)")
    return CriterionResult(7, "dimension sandwich and slope", lower_ok and upper_ok and slopes_ok and tube_ok, detail)


def measure_regularity(max_depth: int = 3) -> CriterionResult:
    params = canonical_params()
    ratio = regularity_check(range(0, max_depth + 1), params)
    return CriterionResult(8, "measure regularity", ratio <= params.q ** 2,
                           f"max mu(B)/diam(B)^1.5 = {ratio:.4f} <= 9")


def eigen_constancy(seed: int = 5, count: int = 100) -> CriterionResult:
    params = canonical_params()
    rng = random.Random(seed)
    target = (Fraction(1, 9), Fraction(3))
    hits = sum(eigen_norms(haar_point(rng, 30, params.p), params) == target for _ in range(count))
    return CriterionResult(9, "eigen-norm constancy", hits == count, f"{hits}/{count} points give (1/9, 3)")


CRITERIA: dict[int, Callable[[], CriterionResult]] = {
    1: phi_expansion,
    2: strict_attractor,
    3: conjugacy,
    4: fixed_point,
    5: equidistribution,
    6: stable_manifold,
    7: dimension_sandwich,
    8: measure_regularity,
    9: eigen_constancy,
}


def run_criterion(number: int) -> CriterionResult:
    start = time.perf_counter()
    result = CRITERIA[number]()
    result.seconds = time.perf_counter() - start
    return result


def run_all(numbers=None) -> list[CriterionResult]:
    return [run_criterion(k) for k in (numbers or sorted(CRITERIA))]
