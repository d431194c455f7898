from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from translab import catalog as c
from translab import classify as cl
from translab.errors import UnsupportedRule
from translab.rules import Rule
from translab.sets import Block, DyadicBlocks, Window, count_cells

K = Rule.affine(1, 0)
NAT = DyadicBlocks([Block(0, 0, None)])


def test_mk_type_verdicts():
    assert cl.mk_type(c.dyadic_a()).witness == {"M": 1}
    assert cl.mk_type(c.dyadic_family(Rule.exponential(2), K)).kind == cl.TYPE2
    assert cl.mk_type(c.example_dyadic_b(K=3)).kind == cl.INCONCLUSIVE
    with pytest.raises(UnsupportedRule):
        cl.mk_type(c.log_integers(10))


def test_ratio_conventions():
    assert cl.ratio(0, 0) == 0
    assert cl.ratio(3, 0) == cl.INF
    assert cl.ratio(6, 4) == F(3, 2)


def test_count_ratio_on_lambda1():
    v = cl.count_ratio_test(c.get("union_counterexample.1").spec, 1, Window(0, 70), depth=2)
    assert v.kind == cl.EVIDENCE and v.evidence_for == cl.TYPE2
    assert v.witness["positions"] == ["16", "64"]
    assert v.chain.is_valid()


def test_count_ratio_inconclusive_cases():
    assert cl.count_ratio_test(c.dyadic_a().spec, 1, Window(0, 64), 3).kind == cl.INCONCLUSIVE
    late = DyadicBlocks([Block(0, 100, None)])
    v = cl.count_ratio_test(late, 1, Window(0, 64), 2)
    assert v.kind == cl.INCONCLUSIVE and v.witness["indices"] == []


def test_chain_extraction_respects_spacing():
    cv = count_cells(c.get("union_counterexample.1").spec, F(1, 3), Window(0, 300))
    ch = cl.extract_chain(cv)
    assert ch.is_valid()
    assert all(b - a >= 2 for a, b in zip(ch.indices, ch.indices[1:]))


@given(st.integers(1, 50))
def test_reduction_bound_formula(cv):
    assert cl.reduction_bound(cv) == cv + (cv + 1) * cv + (cv + 1) * cv * (2 + cv)


def test_reduction_holds_on_catalog_counts():
    for e in (c.get("union_counterexample.1"), c.dyadic_a(), c.dyadic_family(Rule.exponential(2), K)):
        fine = list(count_cells(e.spec, F(1, 3), Window(0, 14)).counts)
        for cval in (2, 4, 16):
            assert cl.reduction_holds(fine, cval)


def test_growth():
    fast = c.dyadic_family(Rule.exponential(2), K).spec
    assert cl.growth_test(fast, 1, Window(0, 17)).kind == cl.EVIDENCE
    assert cl.growth_test(c.dyadic_a().spec, 1, Window(0, 17)).kind == cl.INCONCLUSIVE
    assert cl.growth_test(DyadicBlocks([Block(0, 100, None)]), 1, Window(0, 10)).kind == cl.INCONCLUSIVE


def test_lacunarity():
    assert cl.lacunarity_label(cl.lacunarity_test(c.log_integers(10**4).spec, Window(0, F(46, 5)))) == "dense-evidence"
    assert cl.lacunarity_label(cl.lacunarity_test(NAT, Window(0, 64))) == "lacunary-evidence"
    single = DyadicBlocks([Block(3, 0, None)])
    assert cl.lacunarity_label(cl.lacunarity_test(single, Window(0, 64))) == "lacunary-evidence"
    assert cl.lacunarity_label(cl.lacunarity_test(c.get("union_counterexample.1").spec, Window(0, 256))) \
        == "dense-evidence"


def test_speed():
    v = cl.speed_test(c.dyadic_a().spec, Window(0, 12))
    assert v.kind == cl.EVIDENCE and any("independence hypothesis fails" in n for n in v.notes)
    assert cl.speed_test(NAT, Window(0, 50)).kind == cl.INCONCLUSIVE


def test_translators():
    v = cl.translator_test(c.dyadic_a().spec, F(1, 2), Window(0, 8))
    assert "finite-evidence" in v.notes and v.witness["count"] <= 2
    assert cl.translator_test(NAT, 1, Window(0, 8)).witness["count"] == 0
    assert "growing" in cl.translator_test(c.log_integers(5000).spec, F(1, 2), Window(0, 8)).notes
    assert set(cl.condition_star(c.dyadic_a().spec, Window(0, 8)).values()) == {"finite-evidence"}


def test_periodicity():
    e = c.alg_indep_type1(4)
    assert cl.periodicity_test(e.spec, 1, c.periodicity_threshold(1))
    assert cl.periodicity_test(e.spec, 2, c.periodicity_threshold(2))
    grid = DyadicBlocks([Block(2, 0, None)])
    assert cl.periodicity_test(grid, 2, 3)
    assert not cl.periodicity_test(DyadicBlocks([Block(1, 0, None)]), 2, 3)


def test_shift_inclusion():
    sub, eq = cl.shift_inclusion(c.dyadic_a().spec, 4)
    assert sub and not eq
    assert cl.shift_inclusion(NAT, 4) == (True, True)


def test_classify_all():
    kinds = [v.kind for v in cl.classify_all(c.dyadic_a(), ["mk", "ratio", "growth", "lacunarity", "speed"])]
    assert kinds[0] == cl.TYPE1 and cl.TYPE2 not in kinds[1:3]
    with pytest.raises(Exception):
        cl.classify_all(c.dyadic_a(), ["bogus"])
