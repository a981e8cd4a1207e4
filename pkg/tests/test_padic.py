import random
import warnings
from fractions import Fraction

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from padic_henon.errors import (
    DenominatorNotPPower,
    DivisionByZero,
    InsufficientPrecision,
    InvalidParameters,
    MalformedLiteral,
    NotIntegral,
    PrecisionExhausted,
)
from padic_henon.padic import (
    AtMost,
    FieldParams,
    PadicScalar,
    Point,
    arith,
    format_digits,
    from_json,
    haar_sample_unit,
    is_integral,
    parse_literal,
    pdiv,
    pnorm,
    reduce_mod,
    to_json,
)

from conftest import finite_scalars, p_power_fractions

P = 3


def S(text, prec=None):
    return parse_literal(text, P, prec)


def vfrac(x: Fraction, p=P):
    """Valuation of a nonzero rational, computed independently of the package."""
    v = 0
    n, d = x.numerator, x.denominator
    while n % p == 0:
        n //= p
        v += 1
    while d % p == 0:
        d //= p
        v -= 1
    return v


def test_add_small_integers():
    r = S("1") + S("2")
    assert r.to_fraction() == 3 and pnorm(r) == Fraction(1, 3)


def test_mul_by_zero_keeps_propagated_precision():
    x = S("7", 10)
    assert (x * S("0")).is_exact and (x * S("0")).is_zero
    z = x * S("0", 5)
    assert z.is_zero and z.abs_prec == 5
    assert pnorm(z) == AtMost(Fraction(1, 3 ** 5))


def test_inverse_pair():
    r = S("1/3") * S("3")
    assert r.to_fraction() == 1 and pnorm(r) == 1


def test_pdiv_examples():
    q = pdiv(S("1"), S("3"))
    assert q.to_fraction() == Fraction(1, 3) and pnorm(q) == 3
    assert pdiv(S("6"), S("3")).to_fraction() == 2


def test_pdiv_by_a_loses_val_a_digits():
    x = S("7", 10)
    q = x / S("3")
    assert q.abs_prec == 9
    assert q.to_fraction() == Fraction(7, 3)


def test_pdiv_by_zero():
    with pytest.raises(DivisionByZero):
        S("5") / S("0", 4)


def test_exact_quotient_outside_z1p_needs_precision():
    with pytest.raises(InsufficientPrecision):
        pdiv(S("1"), S("2"))
    half = pdiv(S("1"), S("2"), prec=8)
    assert (half * 2).agrees(S("1"), 8)


@pytest.mark.parametrize("text,norm", [("3", Fraction(1, 3)), ("1/3", Fraction(3)), ("7", Fraction(1))])
def test_pnorm_examples(text, norm):
    assert pnorm(S(text)) == norm


def test_pnorm_exact_zero():
    assert pnorm(S("0")) == 0
    assert pnorm(S("0", 4), exact=True) == 0


def test_reduce_mod_examples():
    assert reduce_mod(S("7"), 1) == 1
    assert reduce_mod(S("7"), 2) == 7
    assert reduce_mod(S("-1", 5), 3) == 26
    with pytest.raises(NotIntegral):
        reduce_mod(S("1/3"), 1)
    with pytest.raises(InsufficientPrecision):
        reduce_mod(S("7", 2), 3)


def test_negative_precision_zero_is_exhausted():
    with pytest.raises(PrecisionExhausted):
        S("0", 2) / S("27")


def test_haar_sampling_is_deterministic():
    a = haar_sample_unit(42, 4, 3)
    b = haar_sample_unit(42, 4, 3)
    assert a == b and a.abs_prec == 4 and 0 <= a.coeff < 81


def test_haar_single_digit():
    vals = {haar_sample_unit(s, 1, 3).coeff for s in range(50)}
    assert vals == {0, 1, 2}


def test_haar_digit_frequencies():
    rng = random.Random(7)
    n = 10_000
    counts = [0, 0, 0]
    for _ in range(n):
        counts[haar_sample_unit(rng, 1, 3).coeff] += 1
    sigma = (n * (1 / 3) * (2 / 3)) ** 0.5
    assert all(abs(c - n / 3) <= 3 * sigma for c in counts)


def test_parse_examples():
    assert pnorm(S("1/3")) == 3
    one = S("...0001")
    assert one.to_fraction() == 1 and one.abs_prec == 4
    assert S("…12").to_fraction() == 5
    frac = S("...01.2")
    assert frac.to_fraction() == Fraction(5, 3) and frac.abs_prec == 2


def test_parse_errors():
    with pytest.raises(DenominatorNotPPower):
        S("1/2")
    with pytest.raises(MalformedLiteral):
        S("abc")
    with pytest.raises(MalformedLiteral):
        S("...0131")
    with pytest.raises(MalformedLiteral):
        S("1/0")


def test_rational_with_foreign_denominator_given_precision():
    half = PadicScalar.from_fraction(3, Fraction(1, 2), 6)
    assert (half * 2).agrees(S("1"), 6)


def test_point_parse_and_norm():
    pt = Point.parse("1/3,7", 3)
    assert pt.norm_bound() == 3
    assert pt.in_unit_polydisc() is False
    assert Point.parse("0,0", 3, 4).in_unit_polydisc() is True
    with pytest.raises(MalformedLiteral):
        Point.parse("1,2,3", 3)


def test_integrality_undecided_for_negative_precision_zero():
    z = PadicScalar.make(3, 0, 0, -2)
    assert is_integral(z) is None


def test_field_params_validation():
    FieldParams.from_literals(3, "3", "1/3")
    FieldParams.from_literals(5, "-10", "2/5")
    with pytest.raises(InvalidParameters):
        FieldParams.from_literals(9, "9", "1/9")
    with pytest.raises(InvalidParameters):
        FieldParams.from_literals(3, "1", "1/3")
    with pytest.raises(InvalidParameters):
        FieldParams.from_literals(3, "0", "1/3")
    with pytest.raises(InvalidParameters):
        FieldParams.from_literals(3, "3", "1/9")
    with pytest.raises(InvalidParameters):
        FieldParams(3, S("3", 10), S("1/3"))


def test_p_two_is_flagged_experimental():
    with pytest.warns(UserWarning, match="experimental"):
        FieldParams.from_literals(2, "2", "1/2")


def test_variant_params():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        v = FieldParams.from_literals(3, "9", "1/3")
    assert v.val_a == 2 and v.abs_a == Fraction(1, 9)


# -- properties -----------------------------------------------------------------


@given(p_power_fractions(), p_power_fractions())
def test_exact_arithmetic_matches_fractions(u, v):
    su, sv = PadicScalar.from_fraction(P, u), PadicScalar.from_fraction(P, v)
    assert (su + sv).to_fraction() == u + v
    assert (su - sv).to_fraction() == u - v
    assert (su * sv).to_fraction() == u * v


@given(p_power_fractions(), p_power_fractions())
def test_ultrametric_inequality(u, v):
    assume(u != 0 and v != 0 and u + v != 0)
    nu, nv = Fraction(3) ** -vfrac(u), Fraction(3) ** -vfrac(v)
    s = pnorm(PadicScalar.from_fraction(P, u) + PadicScalar.from_fraction(P, v))
    assert s <= max(nu, nv)
    if nu != nv:
        assert s == max(nu, nv)


@given(p_power_fractions(), p_power_fractions())
def test_norm_is_multiplicative(u, v):
    assume(u != 0 and v != 0)
    su, sv = PadicScalar.from_fraction(P, u), PadicScalar.from_fraction(P, v)
    assert pnorm(su * sv) == pnorm(su) * pnorm(sv)


@given(finite_scalars(), finite_scalars(), st.sampled_from(["add", "sub", "mul"]))
def test_results_are_canonical(u, v, op):
    r = arith(op, u, v)
    if not r.is_exact:
        assert 0 <= r.coeff < 3 ** (r.scale + r.abs_prec)


@given(finite_scalars(min_prec=3), finite_scalars(min_prec=3))
def test_pdiv_result_is_canonical(u, v):
    assume(not v.is_zero)
    try:
        r = pdiv(u, v)
    except PrecisionExhausted:
        assert u.is_zero and u.abs_prec < v.val
        return
    assert 0 <= r.coeff < 3 ** (r.scale + r.abs_prec)


@given(st.lists(st.integers(0, 3 ** 30), min_size=4, max_size=4), st.integers(5, 15),
       st.lists(st.sampled_from(["add", "sub", "mul", "div"]), min_size=1, max_size=6))
def test_precision_is_sound(seeds, k, ops):
    """Rerunning with ten more starting digits agrees on every digit the short run claims."""

    def run(prec):
        vals = [PadicScalar.from_int(P, s, prec) for s in seeds]
        acc = vals[0]
        for i, op in enumerate(ops):
            other = vals[1 + i % 3]
            if op == "div":
                other = other + 1 if reduce_mod(other, 1) == 0 else other
                acc = acc / other
            else:
                acc = arith(op, acc, other)
        return acc

    try:
        short = run(k)
    except PrecisionExhausted:
        return
    long = run(k + 10)
    assert long.abs_prec >= short.abs_prec
    assert short.agrees(long, short.abs_prec)


@given(finite_scalars(min_prec=3, max_prec=20), st.integers(0, 2))
def test_digit_string_round_trip(u, shift):
    u = u / PadicScalar.from_int(P, 3 ** shift) if shift else u
    k = u.abs_prec
    text = format_digits(u, k)
    back = parse_literal(text, P)
    assert back == u


@given(finite_scalars(max_prec=20))
def test_json_round_trip(u):
    assert from_json(to_json(u)) == u


@given(p_power_fractions())
def test_json_round_trip_exact(x):
    u = PadicScalar.from_fraction(P, x)
    assert from_json(to_json(u)) == u


def test_point_json_round_trip():
    pt = Point.parse("5,1/3", 3, 7)
    assert Point.from_json(pt.to_json()) == pt
