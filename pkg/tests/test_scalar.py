from __future__ import annotations

import cmath
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nfdiag.cyclotomic import Cyclotomic, cyclotomic_poly, euler_phi
from nfdiag.scalar import Coefficient, MissingSymbol, add, inv, mul, nth_root

C = Coefficient
c, d = C.symbol("c"), C.symbol("d")
omega = C.root_of_unity(1, 3)


def test_cyclotomic_polynomials():
    assert cyclotomic_poly(1) == (-1, 1)
    assert cyclotomic_poly(3) == (1, 1, 1)
    assert cyclotomic_poly(4) == (1, 0, 1)
    assert [euler_phi(n) for n in (1, 2, 6, 12)] == [1, 1, 2, 4]


def test_omega_sum_is_minus_one():
    assert add(omega, omega**2) == C.rational(-1)


def test_group_law_on_terms():
    lhs = C.root_of_unity(1, 3) * C.symbol("c", Fraction(1, 3))
    rhs = C.root_of_unity(2, 3) * C.symbol("c", Fraction(2, 3))
    assert mul(lhs, rhs) == c


def test_inverse_negates_exponents():
    t = C.symbol("c", Fraction(2, 3)) * C.symbol("d", Fraction(1, 3))
    assert inv(t) == C.symbol("c", Fraction(-2, 3)) * C.symbol("d", Fraction(-1, 3))


def test_multi_term_inverse_rejected():
    with pytest.raises(ValueError):
        (c + d).inv()


def test_nth_root_examples():
    assert nth_root(c, 2) == C.symbol("c", Fraction(1, 2))
    assert nth_root(c * c * d, 3) == C.symbol("c", Fraction(2, 3)) * C.symbol("d", Fraction(1, 3))
    assert nth_root(C.one(), 5).is_one()
    with pytest.raises((ValueError, ZeroDivisionError)):
        nth_root(c, 0)


def test_nth_root_of_roots_of_unity_and_rationals():
    assert nth_root(C.rational(-1), 2) == C.root_of_unity(1, 4)
    r = nth_root(C.rational(2), 2)
    assert r * r == C.rational(2)
    assert abs(r.instantiate({}) - 2**0.5) < 1e-15


def test_instantiate_examples():
    assert abs(C.symbol("c", Fraction(1, 3)).instantiate({"c": 8}) - 2.0) < 1e-14
    assert abs(C.root_of_unity(1, 4).instantiate({}) - 1j) < 1e-15
    assert C.rational(-1) * c != c
    assert (C.rational(-1) * c).instantiate({"c": 3}) == -3


def test_instantiate_errors():
    with pytest.raises(MissingSymbol):
        c.instantiate({})
    with pytest.raises(ValueError):
        c.instantiate({"c": 0})


def test_principal_branch_for_negative_base():
    v = C.symbol("c", Fraction(1, 2)).instantiate({"c": -4})
    assert abs(v - 2j) < 1e-14


def test_extended_precision_matches_float():
    ctx = mpmath.MPContext()
    ctx.dps = 40
    t = C.root_of_unity(2, 5) * C.symbol("c", Fraction(-2, 3)) * C.rational(Fraction(3, 7))
    vals = {"c": 1.5 - 0.25j}
    assert abs(complex(t.instantiate_mp(vals, ctx)) - t.instantiate(vals)) < 1e-14


def test_text_and_json_round_trip():
    t = C.symbol("c", Fraction(2, 3)) * C.symbol("d", Fraction(-1, 3)) * omega
    assert C.parse(str(t)) == t
    assert C.from_json(t.to_json()) == t
    s = c + omega * d + C.rational(Fraction(1, 2))
    assert C.from_json(s.to_json()) == s
    assert C.parse(str(s)) == s


def test_json_schema_fields():
    js = (C.root_of_unity(1, 3) * C.symbol("c", Fraction(1, 2))).to_json()
    assert set(js) >= {"zeta_num", "zeta_den", "rational", "exponents"}


def test_cyclotomic_lift_and_inverse():
    z = Cyclotomic.zeta(1, 3)
    assert z.lift(12) == z
    x = Cyclotomic(5, [Fraction(1), Fraction(2), Fraction(0), Fraction(-1)])
    assert (x * x.inverse()) == Cyclotomic.rational(1)


exps = st.fractions(min_value=-3, max_value=3, max_denominator=6)
roots = st.tuples(st.integers(0, 11), st.sampled_from([1, 2, 3, 4, 6, 12]))


@st.composite
def terms(draw):
    num, den = draw(roots)
    return C.root_of_unity(num, den, 12) * C.symbol("c", draw(exps)) * C.symbol("d", draw(exps))


@given(terms(), terms(), terms())
def test_ring_laws(a, b, e):
    assert (a * b) * e == a * (b * e)
    assert a * (b + e) == a * b + a * e
    assert a + b == b + a


@given(terms())
def test_inverse_law(a):
    assert (a * a.inv()).is_one()


@given(terms(), st.integers(1, 6))
def test_root_power_law(a, k):
    assert nth_root(a, k) ** k == a


@given(terms(), terms())
def test_instantiate_is_multiplicative(a, b):
    vals = {"c": 0.7 + 1.1j, "d": -1.3 + 0.2j}
    assert cmath.isclose((a * b).instantiate(vals), a.instantiate(vals) * b.instantiate(vals), rel_tol=1e-12)
