"""Bernoulli measure on itineraries, its image on the attractor, and orbit statistics."""
from __future__ import annotations

import csv
import io
import itertools
import json
import math
import random
from dataclasses import asdict, dataclass, field
from fractions import Fraction

from .dimension import BallId, ball_census, window_depths
from .dynamics import basin_entry_time, iterate_forward, step
from .errors import DepthInsufficient
from .padic import DIGIT_CHARS, FieldParams, PadicScalar, Point, haar_point, haar_sample_unit, reduce_mod
from .symbolic import ItineraryWindow, radius_digits, random_window

DEFAULT_Z_MAX = 4.0


def bernoulli_window(seed, m: int, n: int, p: int) -> ItineraryWindow:
    """A window of i.i.d. uniform symbols, reproducible from ``seed``."""
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    return random_window(rng, m, n, p)


@dataclass
class FrequencyReport:
    word: str
    observed_count: int
    total: int
    expected: Fraction
    z_score: float

    @property
    def frequency(self) -> float:
        return self.observed_count / self.total

    def within(self, tol: float) -> bool:
        return abs(self.frequency - self.expected) <= tol


def _word_text(word) -> str:
    return "".join(DIGIT_CHARS[s] for s in word)


def _report(word, count: int, total: int, p: int) -> FrequencyReport:
    expected = Fraction(1, p ** len(word))
    e = float(expected)
    sigma = math.sqrt(e * (1 - e) / total) if total else 0.0
    z = (count / total - e) / sigma if sigma else 0.0
    return FrequencyReport(_word_text(word), count, total, expected, z)


def orbit_symbols(pt: Point, N: int, params: FieldParams) -> list[int]:
    """The forward symbols s_0..s_{N-1} of pt; needs about N + 1 digits."""
    return [reduce_mod(q.x, 1) for q in iterate_forward(pt, N - 1, params, min_prec=1)]


def word_counts(symbols: list[int], length: int, p: int) -> dict[tuple, int]:
    """Sliding-window counts of every word of the given length."""
    counts = dict.fromkeys(itertools.product(range(p), repeat=length), 0)
    for i in range(len(symbols) - length + 1):
        counts[tuple(symbols[i:i + length])] += 1
    return counts


def symbol_frequencies(pt: Point, N: int, params: FieldParams,
                       symbols: list[int] | None = None) -> list[FrequencyReport]:
    """One report per symbol, counting s_0 over T^0(pt)..T^(N-1)(pt)."""
    syms = orbit_symbols(pt, N, params) if symbols is None else symbols[:N]
    counts = word_counts(syms, 1, params.p)
    return [_report(w, c, N, params.p) for w, c in counts.items()]


def cylinder_frequency(pt: Point, word, N: int, params: FieldParams,
                       symbols: list[int] | None = None) -> FrequencyReport:
    """Occurrences of ``word`` as consecutive forward symbols among s_0..s_{N-1}, over N."""
    word = tuple(DIGIT_CHARS.index(c) for c in word) if isinstance(word, str) else tuple(word)
    syms = orbit_symbols(pt, N, params) if symbols is None else symbols[:N]
    L = len(word)
    count = sum(1 for i in range(len(syms) - L + 1) if tuple(syms[i:i + L]) == word)
    return _report(word, count, N, params.p)


def ball_measures(j: int, params: FieldParams, m: int | None = None, n: int | None = None,
                  max_windows: int | None = None) -> dict[BallId, Fraction]:
    """mu_T of every depth-j ball meeting the attractor."""
    if m is None or n is None:
        m, n = window_depths(j, params)
    weight = Fraction(1, params.q ** (m + n + 1))
    return {ball: cnt * weight for ball, cnt in ball_census(j, params, m, n, max_windows).items()}


def mu_ball(ball: BallId, params: FieldParams, m: int | None = None, n: int | None = None,
            max_windows: int | None = None) -> Fraction:
    """mu_T(ball): the fraction of windows of shape (m, n) decoding into the ball.

    Exact as long as the window decode radius does not exceed the ball radius.
    """
    if m is None or n is None:
        m, n = window_depths(ball.depth, params)
    if radius_digits(m, n, params) < ball.depth:
        raise DepthInsufficient(f"window (m={m}, n={n}) is too shallow for depth {ball.depth}")
    if ball.depth == 0:
        return Fraction(1)
    return ball_measures(ball.depth, params, m, n, max_windows).get(ball, Fraction(0))


# -- equidistribution experiments ---------------------------------------------


def haar_start(seed, N: int, params: FieldParams) -> Point:
    """A Haar-random point of R^2 carrying enough digits for an N-step orbit."""
    return haar_point(seed, N + 2, params.p)


def basin_start(seed, N: int, params: FieldParams) -> Point:
    """A random point of the basin outside R^2: (x, y/a) with x, y Haar and y a unit."""
    rng = random.Random(seed)
    x = haar_sample_unit(rng, N + 2, params.p)
    y = haar_sample_unit(rng, N + 2, params.p)
    if reduce_mod(y, 1) == 0:
        y = y + 1
    return Point(x, y / params.a)


def entered_start(pt: Point, params: FieldParams, budget: int = 50) -> tuple[Point, int]:
    """Move a basin point forward until it lies in R^2; returns the point and the entry time."""
    status = basin_entry_time(pt, params, budget)
    if status.kind != "entered":
        raise ValueError(f"start did not enter R^2: {status.kind} after {status.steps} steps")
    for _ in range(status.steps):
        pt = step(pt, params)
    return pt, status.steps


@dataclass
class ReportRow:
    seed: str
    word: str
    observed: int
    total: int
    expected: str
    frequency: float
    z_score: float
    passed: bool


@dataclass
class EquidistributionReport:
    rows: list[ReportRow] = field(default_factory=list)
    z_max: float = DEFAULT_Z_MAX
    tolerances: dict[int, float] | None = None

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def failures(self) -> list[ReportRow]:
        return [r for r in self.rows if not r.passed]

    def to_json(self) -> str:
        return json.dumps({"z_max": self.z_max, "tolerances": self.tolerances,
                           "passed": self.passed, "rows": [asdict(r) for r in self.rows]},
                          indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["seed", "word", "observed", "expected", "z_score", "pass"])
        for r in self.rows:
            w.writerow([r.seed, r.word, r.observed, r.expected, f"{r.z_score:.4f}", int(r.passed)])
        return buf.getvalue()


def band_check(rep: FrequencyReport, z_max: float, tol: float | None) -> bool:
    """Pass when inside the absolute tolerance if one is given, else within z_max sigmas."""
    if tol is not None:
        return rep.within(tol)
    return abs(rep.z_score) <= z_max


def orbit_rows(label: str, pt: Point, N: int, params: FieldParams, word_lengths,
               z_max: float = DEFAULT_Z_MAX, tolerances: dict[int, float] | None = None) -> list[ReportRow]:
    syms = orbit_symbols(pt, N, params)
    rows = []
    for L in word_lengths:
        for word, count in word_counts(syms, L, params.p).items():
            rep = _report(word, count, N, params.p)
            tol = None if tolerances is None else tolerances.get(L)
            rows.append(ReportRow(label, rep.word, count, N, str(rep.expected), rep.frequency,
                                  rep.z_score, band_check(rep, z_max, tol)))
    return rows


def equidistribution_report(params: FieldParams, seeds, N: int = 10_000, word_lengths=(1, 2),
                            z_max: float = DEFAULT_Z_MAX, tolerances: dict[int, float] | None = None,
                            basin: bool = True, extra_starts: dict[str, Point] | None = None
                            ) -> EquidistributionReport:
    """Word frequencies along Haar-random orbits, plus basin starts outside R^2.

    For each seed the report covers a Haar point of R^2 and, with ``basin``, a
    random basin point outside R^2 moved into R^2 first. The start (0, 1/a) is
    always included with ``basin``.
    """
    report = EquidistributionReport(z_max=z_max, tolerances=tolerances)
    starts: list[tuple[str, Point]] = []
    for seed in seeds:
        starts.append((f"haar:{seed}", haar_start(seed, N, params)))
        if basin:
            starts.append((f"basin:{seed}", basin_start(seed, N, params)))
    if basin:
        inv_a = PadicScalar.from_int(params.p, 1) / params.a
        starts.append(("basin:0;1/a", Point(PadicScalar.from_int(params.p, 0, N + 2),
                                            inv_a.with_prec(N + 2))))
    for label, pt in (extra_starts or {}).items():
        starts.append((label, pt))
    for label, pt in starts:
        if pt.in_unit_polydisc() is not True:
            pt, _ = entered_start(pt, params)
        report.rows.extend(orbit_rows(label, pt, N, params, word_lengths, z_max, tolerances))
    return report
