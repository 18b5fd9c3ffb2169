import random
from fractions import Fraction

import pytest

from deltarel import oracle
from deltarel.measure import MeasureEngine

F = Fraction


def test_fig1_values(fig1, v):
    r = oracle.brute_measures(fig1, v, {1, 3, 4, 9}, measure="path")
    assert r.epsilon == F(1, 64)
    assert r.points == 512
    full = oracle.brute_measures(fig1, v, range(1, 10))
    assert full.epsilon == 0 and full.precision == 1


def test_point_table_matches_engine_on_binary_tree():
    t = oracle.random_tree(10, 2, max_depth=8, seed=11)
    x = oracle.random_point(t, random.Random(1))
    table = oracle.PointTable(t, x)
    eng = MeasureEngine(t, x)
    rng = random.Random(2)
    for _ in range(200):
        s = {i for i in range(1, 11) if rng.random() < 0.5}
        rep = table.report(s)
        assert (rep.epsilon, rep.precision, rep.fix_prob) == (eng.epsilon(s), eng.precision(s), eng.fix_probability(s))


def test_minimal_families_at_extremes(fig1, v):
    assert oracle.brute_minimal_idrs(fig1, v, 1) == [frozenset()]
    axps = oracle.brute_minimal_idrs(fig1, v, 0)
    for s in axps:
        assert oracle.brute_entails(fig1, v, s)
        assert all(not oracle.brute_entails(fig1, v, s - {i}) for i in s)


def test_duals_at_zero_are_contrastive(fig1, v):
    # freeing a dual set must allow some other prediction, and no smaller set may
    for t in oracle.brute_minimal_duals(fig1, v, 0):
        rest = set(range(1, 10)) - t
        assert not oracle.brute_entails(fig1, v, rest)
        assert all(oracle.brute_entails(fig1, v, rest | {i}) for i in t)


def test_cap():
    t = oracle.random_tree(13, 2, max_depth=6, seed=1)
    x = oracle.random_point(t, random.Random(0))
    with pytest.raises(oracle.OracleCapExceeded):
        oracle.brute_minimal_idrs(t, x, 0)
    with pytest.raises(oracle.OracleCapExceeded):
        oracle.brute_measures(t, x, (), cap=1000)


def test_berge_small():
    assert oracle.berge_transversals([{1, 2}, {2, 3}]) == {frozenset({2}), frozenset({1, 3})}
    assert oracle.berge_transversals([]) == {frozenset()}


def test_random_tree_is_deterministic():
    a = oracle.random_tree(6, 3, seed=5, weighted=True)
    b = oracle.random_tree(6, 3, seed=5, weighted=True)
    assert a == b


def test_random_tree_size_control():
    t = oracle.random_tree(40, 2, max_depth=40, split_prob=1.0, max_nodes=9600, seed=7)
    assert len(t) >= 9000 and t.features.m == 40
