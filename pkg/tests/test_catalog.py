from fractions import Fraction as F

import pytest

from oracles import grid_points
from translab import catalog as c
from translab.catalog import OPEN, TYPE1, TYPE2
from translab.errors import BadInput, DepthTooLarge
from translab.rules import Rule
from translab.sets import Window, count_points, enumerate_set, union

K = Rule.affine(1, 0)


def test_dyadic_a_matches_grid_oracle():
    e = c.dyadic_a()
    got = [x.to_fraction() for x in enumerate_set(e.spec, Window(0, 6))]
    assert got == sorted(grid_points([(n, n, n + 1) for n in range(6)], 0, 6))
    assert e.known_type == TYPE1


@pytest.mark.parametrize("n,kind", [(-2, TYPE2), (-1, TYPE1), (0, TYPE2), (1, TYPE1), (2, TYPE2), (3, TYPE1)])
def test_sandwich_types(n, kind):
    assert c.sandwich(n).known_type == kind


def test_sandwich_generators():
    assert [c.l_value(v, 1) for v in range(1, 7)] == [0, 1, 1, 2, 2, 3]
    assert [c.m_value(v, 0) for v in range(1, 9)] == [1, 2, 2, 4, 4, 4, 4, 8]
    # m never exceeds l on the same scale
    assert all(c.m_value(v, j) <= max(v * 2**-j, 1) for v in range(1, 500) for j in range(0, 3))


def test_union_counterexample_pair():
    l1, l2 = c.union_counterexample()
    assert l1.known_type == l2.known_type == TYPE2
    assert [count_points(l1.spec, Window(n, n + 1)) for n in range(9)] == [1, 2, 4, 4, 16, 32, 64, 128, 256]
    assert [count_points(l2.spec, Window(n, n + 1)) for n in range(9)] == [1, 2, 4, 8, 16, 16, 16, 16, 256]
    u = union(l1.spec, l2.spec)
    w = Window(0, 20)
    assert enumerate_set(u, w) == enumerate_set(c.union_counterexample_union().spec, w)


def test_log_integers():
    e = c.log_integers(100)
    vals = enumerate_set(e.spec, Window(0, 10))
    assert len(vals) == 100 and vals[0] == 0.0 and e.known_type == TYPE2


def test_alg_indep_layers_and_guard():
    e = c.alg_indep_type1(3)
    assert e.known_type == TYPE1 and "sampled" in e.notes[0]
    assert c.anti_lex_pairs(4) == [(1, 1), (1, 2), (2, 2), (1, 3)]
    layers = c.alg_indep_layers(3, [F(1, 3), F(1, 5)])
    assert all(0 < x < 1 for L in layers for x in L)
    assert all(set(a) <= set(b) for a, b in zip(layers, layers[1:]))
    with pytest.raises(DepthTooLarge):
        c.alg_indep_type1(6)
    with pytest.raises(BadInput):
        c.alg_indep_type1(2, alpha=[0.5, 0.5])


def test_periodicity_threshold():
    assert [c.periodicity_threshold(i) for i in (1, 2, 3)] == [2, 4, 16]


def test_example_dyadic_b():
    e = c.example_dyadic_b()
    assert e.known_type == TYPE2 and [e.m(k) for k in range(1, 5)] == [1, 2, 4, 7]
    assert c.example_dyadic_b(K=3).known_type == OPEN


def test_entry_algebra():
    t1 = c.union_entry(c.dyadic_a(), c.sandwich(1))
    assert t1.known_type == TYPE1
    assert c.union_entry(c.dyadic_a(), c.example_dyadic_b()).known_type == OPEN
    assert c.minkowski_entry(c.dyadic_a(), c.sandwich(1)).known_type == TYPE1


def test_registry():
    assert c.get("sandwich", n="2").known_type == TYPE2
    assert c.get("dyadic_family", m="exp:2").known_type == TYPE2
    assert c.get("example_dyadic_b", K="3").known_type == OPEN
    with pytest.raises(BadInput):
        c.get("nope")
    lines = c.listing_csv().splitlines()
    assert lines[1] == "name,known_type,source,params"
    assert len(lines) == 2 + len(c.default_entries())
