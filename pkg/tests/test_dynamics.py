import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from padic_henon.dynamics import (
    OrbitSegment,
    backward_orbit,
    basin_entry_time,
    divergence_streak,
    eigen_norms,
    forward_orbit,
    iterate_forward,
    newton_polygon,
    phi,
    step,
    step_inv,
)
from padic_henon.errors import (
    ExitsUnitPolydisc,
    Indeterminate,
    NotInUnitPolydisc,
    NotIntegral,
    PrecisionExhausted,
)
from padic_henon.padic import PadicScalar, Point, haar_point, parse_literal, pnorm, reduce_mod
from padic_henon.symbolic import ItineraryWindow, decode


def S(text, prec=None):
    return parse_literal(text, 3, prec)


def pt(x, y, prec=None):
    return Point(S(x, prec), S(y, prec))


def vfrac(x: Fraction, p=3):
    v = 0
    n, d = x.numerator, x.denominator
    while n % p == 0:
        n //= p
        v += 1
    while d % p == 0:
        d //= p
        v -= 1
    return v


@pytest.mark.parametrize("t,expected", [("0", 0), ("1", 0), ("2", 2)])
def test_phi_examples(canon, t, expected):
    assert phi(S(t), canon).to_fraction() == expected


def test_phi_precision_costs_one_digit(canon):
    assert phi(S("5", 10), canon).abs_prec == 9


def test_phi_outside_r(canon):
    with pytest.raises(NotIntegral):
        phi(S("1/3"), canon)
    assert phi(S("1/3"), canon, allow_outside=True).to_fraction() == Fraction(1, 81) - Fraction(1, 9)


def test_step_examples(canon):
    assert step(pt("0", "0"), canon) == pt("0", "0")
    assert step(pt("1", "1"), canon) == pt("3", "1")
    assert step(pt("2", "0"), canon) == pt("2", "2")


def test_step_inv_examples(canon):
    out = step_inv(pt("1", "0"), canon)
    assert out == Point(S("0"), S("1/3"))
    assert out.norm_bound() == 3
    assert step_inv(pt("0", "0"), canon) == pt("0", "0")


def test_step_precision_contract(canon):
    q = step(Point(S("4", 12), S("5", 7)), canon)
    assert q.x.abs_prec == min(7 + 1, 12 - 1)
    r = step_inv(Point(S("4", 12), S("5", 7)), canon)
    assert r.y.abs_prec == min(12, 7 - 1) - 1


def test_forward_orbit_of_fixed_point(canon):
    seg = forward_orbit(pt("0", "0"), 10, canon)
    assert len(seg) == 11 and all(q == pt("0", "0") for q in seg.points)


def test_forward_precision_ledger(canon):
    seg = forward_orbit(haar_point(3, 50, 3), 10, canon)
    assert seg.at(10).x.abs_prec == 40
    assert [q.x.abs_prec for q in seg.points] == list(range(50, 39, -1))


def test_forward_orbit_reports_where_precision_died(canon):
    with pytest.raises(PrecisionExhausted) as info:
        forward_orbit(haar_point(1, 5, 3), 10, canon)
    assert info.value.index == 5


def test_backward_exit_witness(canon):
    with pytest.raises(ExitsUnitPolydisc) as info:
        backward_orbit(pt("1", "0"), 1, canon)
    assert info.value.k == 1


def test_backward_orbit_of_fixed_point(canon):
    seg = backward_orbit(pt("0", "0"), 20, canon)
    assert seg.k_min == -20 and all(q == pt("0", "0") for q in seg.points)


def test_backward_orbit_of_decoded_point(canon):
    w = ItineraryWindow((1, 2, 0, 1, 1, 2, 0, 2, 1, 0), (2, 1, 0), 3)
    d = decode(w, canon, prec=30)
    seg = backward_orbit(d.point, 10, canon)
    ys = [seg.at(-k).y.abs_prec for k in range(1, 11)]
    # each backward step costs 1 + val(a) digits once the ledger settles
    assert all(b - a == 2 for a, b in zip(ys[1:], ys))
    assert tuple(reduce_mod(seg.at(-k).y, 1) for k in range(10)) == w.back


def test_backward_orbit_indeterminate_at_low_precision(canon):
    with pytest.raises(Indeterminate):
        backward_orbit(pt("0", "0", 1), 1, canon)


def test_orbit_jsonl_round_trip(canon):
    seg = forward_orbit(haar_point(9, 12, 3), 5, canon)
    back = OrbitSegment.from_jsonl(seg.to_jsonl(), canon)
    assert back.points == seg.points and back.k_min == 0


def test_basin_entry_examples(canon):
    assert basin_entry_time(pt("2", "1"), canon).kind == "entered"
    assert basin_entry_time(pt("2", "1"), canon).steps == 0
    status = basin_entry_time(Point(S("0"), S("1/3")), canon)
    assert (status.kind, status.steps) == ("entered", 1)


def test_divergence_classification_matches_explicit_iteration(canon):
    status = basin_entry_time(Point(S("1/3"), S("0")), canon)
    assert status.kind == "diverging"
    assert status.steps == divergence_streak(canon) == 3
    # independent oracle: ten exact steps in rational arithmetic
    x, y = Fraction(1, 3), Fraction(0)
    norms = [3]
    for _ in range(10):
        x, y = 3 * y + Fraction(1, 3) * (x ** 3 - x), x
        norms.append(max(Fraction(3) ** -vfrac(v) if v else 0 for v in (x, y)))
        assert vfrac(x) < 0
    assert all(b > a for a, b in zip(norms, norms[1:]))


def test_basin_budget_exhausted_is_indeterminate(canon):
    status = basin_entry_time(Point(S("1/3"), S("0")), canon, budget=1)
    assert status.kind == "indeterminate"


@pytest.mark.parametrize("point", [("0", "0"), ("1", "1")])
def test_eigen_norms_examples(canon, point):
    assert eigen_norms(pt(*point), canon) == (Fraction(1, 9), Fraction(3))


def test_eigen_norms_variant(variant):
    assert eigen_norms(pt("2", "1"), variant) == (Fraction(1, 27), Fraction(3))


def test_eigen_norms_outside_r2(canon):
    with pytest.raises(NotInUnitPolydisc):
        eigen_norms(pt("1/3", "0"), canon)


def test_newton_polygon():
    assert newton_polygon([1, -1, 0]) == [(Fraction(-2), 1), (Fraction(1), 1)]
    assert newton_polygon([0, 5, 0]) == [(Fraction(0), 2)]
    assert newton_polygon([2, None, 0]) == [(Fraction(-1), 2)]


@given(st.integers(0, 3 ** 20), st.integers(0, 3 ** 20))
def test_eigen_norms_agree_with_vieta(canon, x, y):
    lo, hi = eigen_norms(Point.from_ints(3, x, y, 20), canon)
    trace = Fraction(1, 3) * (3 * Fraction(x) ** 2 - 1)
    # |l1 l2| = |a|; with distinct norms the larger one equals |l1 + l2|
    assert lo * hi == canon.abs_a
    assert hi == Fraction(3) ** -vfrac(trace)


@given(st.integers(0, 3 ** 25), st.integers(1, 24), st.integers(1, 3 ** 10))
def test_phi_expands_small_distances_exactly(canon, t, v, u):
    u = u if u % 3 else u + 1
    t1, t2 = PadicScalar.from_int(3, t), PadicScalar.from_int(3, t + u * 3 ** v)
    assert pnorm(phi(t1, canon) - phi(t2, canon)) == 3 * pnorm(t1 - t2)


def test_forward_invariance(canon):
    rng = random.Random(0)
    for _ in range(1000):
        assert step(haar_point(rng, 8, 3), canon).in_unit_polydisc() is True


@given(st.integers(0, 2), st.integers(0, 3 ** 15), st.integers(0, 3 ** 15))
def test_partition_compatibility(canon, s, x, y):
    image = step(Point.from_ints(3, s + 3 * x, y, 16), canon)
    assert image.in_unit_polydisc() is True
    assert reduce_mod(image.y, 1) == s


@given(st.integers(0, 3 ** 20), st.integers(0, 3 ** 20))
def test_inverse_round_trip(canon, x, y):
    p0 = Point.from_ints(3, x, y, 20)
    a = step_inv(step(p0, canon), canon)
    b = step(step_inv(p0, canon), canon)
    assert a.agrees(p0, a.prec) and b.agrees(p0, b.prec)
    assert a.prec >= 17 and b.prec >= 17


def test_iterate_forward_is_lazy(canon):
    gen = iterate_forward(haar_point(2, 3, 3), 10_000, canon)
    assert next(gen).prec == 3
