from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from translab.dyadic import DyadicRational as D
from translab.errors import BadInput, NotIncreasing
from translab.rules import Rule

dyadics = st.builds(D, st.integers(-10**6, 10**6), st.integers(0, 40))


def test_canonical_form():
    x = D(4, 2)
    assert (x.num, x.exp) == (1, 0)
    assert D(6, 2) == D(3, 1)


def test_coerce_float_and_fraction():
    assert D.coerce(0.375) == D(3, 3)
    assert D.coerce(Fraction(3, 8)) == D(3, 3)
    assert not D.is_dyadic(Fraction(1, 3))
    with pytest.raises(ValueError):
        D.coerce(Fraction(1, 3))


@given(dyadics, dyadics)
def test_arithmetic_matches_fractions(a, b):
    fa, fb = a.to_fraction(), b.to_fraction()
    assert (a + b).to_fraction() == fa + fb
    assert (a - b).to_fraction() == fa - fb
    assert (a * b).to_fraction() == fa * fb
    assert (a < b) == (fa < fb)
    assert (a == b) == (fa == fb)


@given(dyadics)
def test_hash_compatible_with_fraction(a):
    assert hash(a) == hash(a.to_fraction())
    assert len({a, a.to_fraction()}) == 1


@given(dyadics, st.integers(0, 60))
def test_scaled_int(a, e):
    if e >= a.exp:
        assert Fraction(a.scaled_int(e), 2**e) == a.to_fraction()


@pytest.mark.parametrize("text,first,gap", [
    ("affine:2,1", [3, 5, 7, 9], 2),
    ("poly:0,1/2,1/2", [1, 3, 6, 10], float("inf")),
    ("exp:2", [2, 4, 8, 16], float("inf")),
    ("floor_scaled:1", [0, 1, 1, 2], 1),
])
def test_rule_values_and_gaps(text, first, gap):
    r = Rule.parse(text)
    assert [r(k) for k in range(1, 5)] == first
    assert r.sup_gap() == gap


def test_pow2_floor_values():
    r = Rule.pow2_floor(0)
    assert [r(k) for k in range(1, 9)] == [1, 2, 2, 4, 4, 4, 4, 8]


@given(st.integers(0, 6), st.integers(1, 5000))
def test_floor_scaled_gap_bound(j, k):
    r = Rule.floor_scaled(j)
    assert r(k + 1) - r(k) <= r.sup_gap()


def test_prefix_rule():
    r = Rule.parse("prefix:1,3,7")
    assert r.is_prefix and len(r) == 3 and r.sup_gap() is None


@pytest.mark.parametrize("text", ["affine:1,0", "exp:2", "poly:1,-1/2,1/2", "prefix:2,5"])
def test_rule_roundtrip(text):
    r = Rule.parse(text)
    assert Rule.from_dict(r.to_dict()) == r


def test_rule_errors():
    with pytest.raises(BadInput):
        Rule.parse("bogus:1")
    with pytest.raises(NotIncreasing):
        Rule.parse("affine:-1,0").check_increasing(1)
