from fractions import Fraction as F

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import mpf_to_mpq, randt2_exact
from translab import catalog, classify, witness
from translab.errors import BadInput, InvalidChain, PrecisionOverflow
from translab.rules import Rule
from translab.sets import Window, enumerate_set

L1 = catalog.get("union_counterexample.1").spec


@pytest.fixture(scope="module")
def wit2():
    v = classify.count_ratio_test(L1, 1, Window(0, 70), depth=2)
    return witness.build_type2_witness(L1, 1, v.chain)


def test_step_function_validation():
    f = witness.StepFunction(((2, 3, F(1, 2)), (0, 1, 1)))
    assert f.pieces[0][0] == 0 and f(F(5, 2)) == F(1, 2) and f(3) == 0 and f(-1) == 0
    with pytest.raises(BadInput):
        witness.StepFunction(((0, 2, 1), (1, 3, 1)))
    with pytest.raises(BadInput):
        witness.StepFunction(((1, 1, 1),))
    with pytest.raises(BadInput):
        witness.StepFunction(((0, 1, -1),))
    g = f.rescaled(F(1, 3))
    assert g(F(5, 6)) == F(1, 2)


def test_witness_shape(wit2):
    assert wit2.depth == 2
    assert [p[:2] for p in wit2.f.pieces] == [(46, 48), (190, 192)]
    assert (wit2.I_C.lo, wit2.I_C.hi) == (0, F(1, 3))
    assert (wit2.I_D.lo, wit2.I_D.hi) == (F(-2, 3), F(-1, 3))


def test_block_contribution_matches_enumeration(wit2):
    f1 = witness.StepFunction((wit2.f.pieces[0],))
    a, b, v = f1.pieces[0]
    for x in (F(0), F(1, 2), F(-3, 2), F(-1)):
        pts = enumerate_set(wit2.scaled_spec, Window(a - x, b - x))
        assert witness.block_contribution(f1, wit2.scaled_spec, 1, x) == v * len(pts)


def test_rescaling_is_consistent(wit2):
    for x in (F(0), F(1, 8), F(-1, 2), F(-5, 8)):
        assert witness.rescaling_gap(wit2, x) == 0


def test_profiles_certified(wit2):
    c, d = witness.witness_profiles(wit2, 16)
    assert all(p.certified for p in c + d)
    assert max(p.cumulative[-1] for p in c) < 1
    assert min(p.cumulative[-1] for p in d) >= 2


def test_invalid_chains(wit2):
    with pytest.raises(InvalidChain):
        witness.build_type2_witness(L1, 2, wit2.chain)
    bad = classify.RatioChain(F(1, 3), (48, 49), (F(100), F(100)))
    with pytest.raises(InvalidChain):
        witness.build_type2_witness(L1, 1, bad)
    fake = classify.RatioChain(F(1, 3), (10,), (F(4),))
    with pytest.raises(InvalidChain):
        witness.build_type2_witness(catalog.dyadic_a().spec, 1, fake)


def test_csv_outputs(wit2):
    text = witness.step_function_csv(wit2.f, {"depth": 2})
    assert text.splitlines()[1] == "a,b,value"
    c, _ = witness.witness_profiles(wit2, 2)
    rows = witness.profile_csv(c, {}).splitlines()
    assert rows[1] == "x_num,x_exp,k,block_sum,cumulative,cert_type,cert_bound"
    assert len(rows) == 2 + 2 * 2


def test_randt2_reference_value():
    assert witness.randt2_term(F(1, 2), 1, 4) == mpmath.mpf(175) / 256
    assert witness.randt2_term(F(1, 2), 3, 0) == 0


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 15), st.integers(0, 12), st.integers(1, 6))
def test_randt2_matches_rational_oracle(a, m, gap):
    q = F(a, 16)
    exact = randt2_exact(q, m, gap)
    got = mpf_to_mpq(witness.randt2_term(q, m, gap))
    assert abs(got - exact) <= exact / 10**12


def test_randt2_errors():
    with pytest.raises(PrecisionOverflow):
        witness.randt2_term(F(1, 2), 5000, 1)
    with pytest.raises(BadInput):
        witness.randt2_term(F(3, 2), 1, 1)


def test_randt2_series():
    rows = witness.randt2_series(Rule.affine(1, 0), Rule.exponential(2), F(1, 2), 5)
    assert [r.gap for r in rows] == [2, 4, 8, 16, 32]
    with mpmath.workprec(96):
        assert abs(rows[-1].partial - mpmath.fsum(r.term for r in rows)) < 1e-25
    slow = witness.randt2_series(Rule.parse("prefix:1,2,3,4"), Rule.parse("prefix:1,2,3,4,5"), F(1, 2), 4)
    assert not witness.series_divergence_evidence(slow)
    with pytest.raises(BadInput):
        witness.randt2_series(Rule.parse("prefix:1"), Rule.parse("prefix:1,2"), F(1, 2), 3)
    assert witness.series_csv(rows, {}).splitlines()[1] == "k,m_k,gap,term,partial_sum"


def test_exp_integral():
    rep = witness.exp_integral_test(witness.StepFunction(((0, 1, 1),)))
    with mpmath.workprec(96):
        assert rep.finite and abs(rep.value - mpmath.expm1(1)) < 1e-25
    div = witness.exp_integral_test(lambda k: (k, k + F(1, 2**k), 1))
    assert div.finite is False
    conv = witness.exp_integral_test(lambda k: (k, k + F(1, 4**k), 1))
    assert conv.finite is True and 3.9 < conv.value < 4.0
