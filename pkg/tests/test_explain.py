import json
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from deltarel import oracle
from deltarel.explain import (
    BudgetExhaustedError,
    InfeasibleSeedError,
    check_idrs,
    explain_instance,
    min_cardinality_drs,
    min_cdrs,
    min_idrs,
    resolve_order,
)
from deltarel.measure import MeasureEngine, epsilon, precision

from conftest import DATA

F = Fraction
AXP = frozenset({1, 2, 3, 4, 9})


def _decisions(expl):
    return [(s.feature, "keep" if s.kept else "drop") for s in expl.trace]


@pytest.mark.parametrize("measure", ["path", "joint"])
def test_running_trace(fig1, v, measure):
    e = min_idrs(fig1, v, "3/100", seed=AXP, order=[1, 2, 3, 4, 9], measure=measure)
    assert e.subset == {1, 9}
    assert e.epsilon == F(7, 256)
    assert _decisions(e) == [(1, "keep"), (2, "drop"), (3, "drop"), (4, "drop"), (9, "keep")]
    assert e.trace[-1].epsilon > F(3, 100)


def test_running_trace_values_under_path_measure(fig1, v):
    e = min_idrs(fig1, v, F(3, 100), seed=AXP, order=[1, 2, 3, 4, 9], measure="path")
    assert [s.epsilon for s in e.trace[:4]] == [F(1, 2), F(1, 64), F(3, 128), F(7, 256)]
    assert e.trace[4].epsilon == F(15, 256)


def test_delta_zero_gives_axp(fig1, v):
    e = min_idrs(fig1, v, 0)
    assert e.epsilon == 0
    assert oracle.brute_entails(fig1, v, e.subset)
    assert e.subset == AXP


def test_delta_one_gives_empty_set(fig1, v):
    assert min_idrs(fig1, v, 1).subset == frozenset()


def test_infeasible_seed(fig1, v):
    with pytest.raises(InfeasibleSeedError) as err:
        min_idrs(fig1, v, "3/100", seed={2, 3})
    assert err.value.epsilon > F(3, 100)


def test_bad_delta(fig1, v):
    with pytest.raises(ValueError):
        min_idrs(fig1, v, "3/2")


def test_resolve_order():
    assert resolve_order("asc", {3, 1}) == [1, 3]
    assert resolve_order([9, 4], {1, 4, 9}) == [9, 4, 1]
    with pytest.raises(ValueError):
        resolve_order([1, 1], {1})


def test_greedy_order_is_minimal(fig1, v):
    e = min_idrs(fig1, v, "3/100", order="greedy")
    assert check_idrs(fig1, v, "3/100", subset=e.subset).minimal


def test_check_idrs(fig1, v):
    ok = check_idrs(fig1, v, "3/100", subset={1, 9})
    assert ok.relevant and ok.minimal
    bad = check_idrs(fig1, v, "3/100", subset={2, 3, 4, 9}, measure="path")
    assert not bad.relevant and bad.epsilon == F(1, 2)
    full = check_idrs(fig1, v, 0, subset=range(1, 10))
    assert full.relevant and not full.minimal


def test_min_cardinality_examples(fig1, v):
    e = min_cardinality_drs(fig1, v, 1)
    assert e.precision == 1 and len(e) <= 5
    k, _ = oracle.brute_min_cardinality(fig1, v, 1)
    assert len(e) == k
    assert min_cardinality_drs(fig1, v, 0).subset == frozenset()


def test_min_cardinality_budget(fig1, v):
    with pytest.raises(BudgetExhaustedError) as err:
        min_cardinality_drs(fig1, v, 1, budget=1)
    assert err.value.best.precision == 1


def test_bundled_mincard_answers(random8):
    answers = json.loads(DATA.joinpath("random8_mincard.json").read_text())
    delta = F(answers["delta"])
    for row in answers["answers"]:
        e = min_cardinality_drs(random8, row["values"], delta)
        assert len(e) == row["min_size"]
        assert sorted(e.subset) in row["min_sets"]


def test_min_cdrs(fig1, v):
    e = min_cdrs(fig1, v, F(9, 10), certify=True)
    assert precision(fig1, v, e.subset) >= F(9, 10)
    assert e.minimal is not None


def test_explain_instance_dispatch(fig1, v):
    assert explain_instance(fig1, v, 0).subset == AXP
    assert explain_instance(fig1, v, 1, algorithm="mincard").precision == 1
    with pytest.raises(ValueError):
        explain_instance(fig1, v, 0, algorithm="other")


def _small_case(seed):
    rng = random.Random(seed)
    m = rng.randint(2, 8)
    t = oracle.random_tree(m, [rng.choice((2, 3)) if m <= 6 else 2 for _ in range(m)], max_depth=7,
                           weighted=rng.random() < 0.5, seed=seed)
    return t, oracle.random_point(t, rng), rng


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), delta=st.sampled_from([F(0), F(1, 16), F(1, 8), F(1, 4), F(1, 2)]))
def test_min_idrs_is_subset_minimal(seed, delta):
    t, x, _ = _small_case(seed)
    for measure in ("joint", "path"):
        e = min_idrs(t, x, delta, measure=measure, order="greedy" if seed % 2 else "asc")
        assert e.subset in set(oracle.brute_minimal_idrs(t, x, delta, measure=measure))
        assert e.epsilon == epsilon(t, x, e.subset, measure=measure)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), delta=st.sampled_from([F(1, 2), F(3, 4), F(9, 10), F(1)]))
def test_min_cardinality_matches_brute(seed, delta):
    t, x, _ = _small_case(seed)
    k, sets = oracle.brute_min_cardinality(t, x, delta)
    e = min_cardinality_drs(t, x, delta)
    assert len(e) == k
    assert e.subset == min(sets, key=sorted)
    assert MeasureEngine(t, x).meets_precision(e.subset, delta)
