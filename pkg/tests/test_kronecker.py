import dataclasses
import math
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import translab.kronecker as kr
from oracles import kron_scan, nearest
from translab.errors import BadInput, NotFoundWithinBound, SpacingError


@pytest.fixture(scope="module")
def w1():
    return kr.build_S_witness(K=1, seed=3)


def test_nearest_dist():
    assert kr.nearest_dist(F(13, 10)) == F(3, 10)
    assert kr.nearest_dist(F(-7, 10)) == F(3, 10)
    assert kr.nearest_dist(2) == 0


def test_precheck():
    bad = kr.precheck_condition_B(kr.ApproxProblem([F(1, 2)], [F(1, 4)], F(1, 20)))
    assert bad.admissible is False and bad.u == (2,)
    ok = kr.precheck_condition_B(kr.ApproxProblem([F(1, 2)], [F(1, 2)], F(1, 20)))
    assert ok.admissible is True
    big = kr.ApproxProblem([0.1] * 5, [0.2] * 5, 0.1)
    assert kr.precheck_condition_B(big).admissible is None


def test_trivial_solutions():
    assert kr.solve(kr.ApproxProblem([0.3], [0.3], 0.1)) == 1
    assert kr.solve(kr.ApproxProblem([0.3], [0.0], 0.1)) == 0
    assert kr.solve(kr.ApproxProblem([0.3], [-0.3], 0.1)) == -1


def test_not_found():
    with pytest.raises(NotFoundWithinBound):
        kr.solve(kr.ApproxProblem([F(1, 2)], [F(1, 4)], F(1, 20), p_bound=1000))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0.001, 0.999), min_size=1, max_size=2),
       st.lists(st.floats(0.0, 0.999), min_size=2, max_size=2))
def test_solve_matches_scan(theta, alpha):
    alpha = alpha[:len(theta)]
    prob = kr.ApproxProblem(theta, alpha, F(1, 20), p_bound=2000)
    expect = kron_scan(theta, alpha, 0.05, 2000)
    if expect is None:
        with pytest.raises(NotFoundWithinBound):
            kr.solve(prob)
    else:
        assert kr.solve(prob) == expect


def test_bucketed_search_agrees_with_direct(monkeypatch):
    rng = random.Random(1)
    for _ in range(15):
        L = rng.randint(1, 3)
        theta = [F(rng.randrange(1, 2**40), 2**40) for _ in range(L)]
        alpha = [F(rng.randrange(0, 2**40), 2**40) for _ in range(L)]
        prob = kr.ApproxProblem(theta, alpha, F(1, 50), p_bound=200000)
        monkeypatch.setattr(kr, "DIRECT_SCAN", 1 << 30)
        try:
            a = kr.solve(prob)
        except NotFoundWithinBound:
            a = None
        monkeypatch.setattr(kr, "DIRECT_SCAN", 64)
        monkeypatch.setattr(kr, "BABY_STEPS", 1000)
        try:
            b = kr.solve(prob)
        except NotFoundWithinBound:
            b = None
        assert a == b


def test_seeded_alphas_and_betas():
    al = kr.seeded_alphas(8, 0)
    assert al == kr.seeded_alphas(8, 0) and al != kr.seeded_alphas(8, 1)
    assert all(b - a > 5 for a, b in zip(al, al[1:]))
    assert all(a.denominator == 2**kr.ALPHA_BITS for a in al)
    assert kr.extract_betas([F(1), F(3), F(7), F(13)], 3) == [0, 2, 3]
    with pytest.raises(SpacingError):
        kr.extract_betas([F(1), F(3), F(5)], 2)
    with pytest.raises(SpacingError):
        kr.extract_betas([F(3), F(1)], 1)


@given(st.integers(1, 12), st.fractions(F(1, 8), F(1, 2)), st.integers(1, 40), st.integers(1, 40))
def test_band_measure_matches_interval_union(t, H, a4, w4):
    a = 1 + F(a4, 7)
    b = a + F(w4, 9)
    ivs = sorted((F(j, t) - H / t, F(j, t) + H / t) for j in range(1, math.ceil(b * t) + 2))
    total, cur = F(0), None
    for lo, hi in ivs:
        lo, hi = max(lo, a), min(hi, b)
        if lo >= hi:
            continue
        if cur and lo <= cur[1]:
            cur = (cur[0], max(cur[1], hi))
        else:
            if cur:
                total += cur[1] - cur[0]
            cur = (lo, hi)
    if cur:
        total += cur[1] - cur[0]
    assert kr.band_measure(t, H, a, b) == total


def test_r_value():
    from translab.catalog import dyadic_a
    assert kr.r_value(dyadic_a().spec, F(49, 2)) == 24
    assert kr.r_value(dyadic_a().spec, F(10)) == 10


def test_level_one_witness(w1):
    lv = w1.levels[0]
    assert lv.ok and lv.n == 2 and len(lv.alpha_ik) == 2
    assert lv.t == lv.p * 2**lv.r
    assert all(r <= F(1, 20) for r in kr.level_residuals(w1, 1))
    assert kr.spacing_ok(w1)
    xs = [F(1, 4) + F(j, 64) for j in range(32)]
    assert kr.check_claim_divergence(w1, xs).full_fraction == 1
    conv = kr.check_claim_convergence(w1)
    assert conv.ok and conv.rows[0]["muG"] == 1


def test_membership_is_exact(w1):
    lv = dataclasses.replace(w1.levels[0], n=4, p=3, r=2, t=12)
    w1 = dataclasses.replace(w1, levels=[lv])
    a = lv.alpha_ik[0]
    j = math.ceil(a * lv.t) + 5
    assert w1.in_S(F(j, lv.t), 1, 1)
    assert w1.in_S(F(j, lv.t) + F(1, lv.n * lv.t), 1, 1)
    assert not w1.in_S(F(j, lv.t) + F(1, lv.n * lv.t) + F(1, 10**40), 1, 1)
    assert not w1.in_S(a - 1, 1, 1)


def test_witness_errors():
    with pytest.raises(BadInput):
        kr.build_S_witness(K=4)
    with pytest.raises(SpacingError):
        kr.build_S_witness(K=1, alphas=[F(1), F(2), F(3), F(4)])
    w = kr.build_S_witness(K=1, seed=3, p_bound=10)
    assert not w.levels[0].ok and "no p" in w.levels[0].error
    assert not kr.check_claim_convergence(w).ok


def test_witness_csv(w1):
    text = kr.witness_csv(w1, {"K": 1})
    lines = text.splitlines()
    assert lines[1].startswith("k,i,n,r,p,t") and len(lines) == 4
    small = dataclasses.replace(w1, levels=[dataclasses.replace(w1.levels[0], p=1, r=2, t=4)])
    rows = kr.witness_csv(small, {}).splitlines()
    k = rows.index("k,i,lo_num,hi_num,den")
    triples = [r.split(",") for r in rows[k + 1:]]
    assert triples
    for kk, i, lo, hi, den in triples:
        a = small.levels[0].alpha_ik[int(i) - 1]
        assert int(den) == 2 * 4 and int(hi) - int(lo) == 2
        assert F(int(hi), int(den)) >= a and F(int(lo), int(den)) <= a + 1


def test_nearest_oracle_consistency():
    assert nearest(F(9, 4)) == kr.nearest_dist(F(9, 4))
