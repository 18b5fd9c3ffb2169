import itertools
import json
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from deltarel import oracle
from deltarel.model import (
    TreeSchemaError,
    TreeSyntaxError,
    TreeValidationError,
    as_rational,
    classify,
    coerce_values,
    leaf_of,
    parse_tree,
    serialize_tree,
    tree_from_dict,
    tree_to_dict,
    validate_tree,
)

from conftest import small_tree_doc


def test_smallest_tree_has_two_paths():
    t = tree_from_dict(small_tree_doc())
    assert len(t.paths) == 2
    assert [len(p.nodes) for p in t.paths] == [2, 2]


def test_fig1_path_counts(fig1):
    labels = [p.label for p in fig1.paths]
    assert len(labels) == 18
    assert labels.count(0) == 5 and labels.count(1) == 13


def test_fig1_is_valid(fig1):
    assert validate_tree(fig1) == []


def test_overlapping_children_name_the_node():
    doc = small_tree_doc([
        {"from": "r", "to": "a", "allowed": [0, 1]},
        {"from": "r", "to": "b", "allowed": [1]},
    ])
    with pytest.raises(TreeValidationError) as err:
        tree_from_dict(doc)
    assert any(d.node == "r" and "overlap" in d.message for d in err.value.diagnostics)


def test_incomplete_children_reported():
    doc = small_tree_doc([{"from": "r", "to": "a", "allowed": [0]}])
    doc["nodes"].pop("b")
    diags = validate_tree(tree_from_dict(doc, validate=False))
    assert any(d.node == "r" and "do not cover" in d.message for d in diags)


def test_out_of_domain_literal_reported():
    doc = small_tree_doc([
        {"from": "r", "to": "a", "allowed": [0]},
        {"from": "r", "to": "b", "allowed": [1, 7]},
    ])
    diags = validate_tree(tree_from_dict(doc, validate=False))
    assert any("outside the domain" in d.message for d in diags)


def test_single_leaf_tree_rejected():
    doc = {"features": [{"id": 1, "name": "x1", "domain": [0, 1]}], "classes": ["a"],
           "root": "r", "nodes": {"r": {"leaf": "a"}}, "edges": []}
    with pytest.raises(TreeValidationError, match="single leaf"):
        tree_from_dict(doc)


def test_unreachable_node_reported():
    doc = small_tree_doc()
    doc["nodes"]["z"] = {"leaf": 0}
    diags = validate_tree(tree_from_dict(doc, validate=False))
    assert any(d.node == "z" for d in diags)


def test_fig1_classifies_running_instance(fig1, v):
    assert classify(fig1, v) == 1


def test_points_on_first_path_are_class_0(fig1):
    q1 = fig1.paths[0]
    assert q1.nodes == ("1", "2")
    for rest in itertools.product((0, 1), repeat=8):
        assert classify(fig1, (0,) + rest) == 0


def test_complete_binary_tree_paths():
    doc = {
        "features": [{"id": 1, "name": "a", "domain": [0, 1]}, {"id": 2, "name": "b", "domain": [0, 1]}],
        "classes": [0, 1], "root": "r",
        "nodes": {"r": {"feature": 1}, "l": {"feature": 2}, "h": {"feature": 2},
                  "l0": {"leaf": 0}, "l1": {"leaf": 1}, "h0": {"leaf": 1}, "h1": {"leaf": 0}},
        "edges": [
            {"from": "r", "to": "l", "allowed": [0]}, {"from": "r", "to": "h", "allowed": [1]},
            {"from": "l", "to": "l0", "allowed": [0]}, {"from": "l", "to": "l1", "allowed": [1]},
            {"from": "h", "to": "h0", "allowed": [0]}, {"from": "h", "to": "h1", "allowed": [1]},
        ],
    }
    t = tree_from_dict(doc)
    assert len(t.paths) == 4
    for p in t.paths:
        assert p.tested == {1, 2}
        assert all(len(a) == 1 for a in p.allowed)


def test_repeated_tests_intersect():
    doc = {
        "features": [{"id": 1, "name": "x", "domain": ["a", "b", "c"]}],
        "classes": [0, 1], "root": "r",
        "nodes": {"r": {"feature": 1}, "s": {"feature": 1}, "o": {"leaf": 0},
                  "hit": {"leaf": 1}, "miss": {"leaf": 0}},
        "edges": [
            {"from": "r", "to": "s", "allowed": ["a", "b"]}, {"from": "r", "to": "o", "allowed": ["c"]},
            {"from": "s", "to": "hit", "allowed": ["b"]}, {"from": "s", "to": "miss", "allowed": ["a"]},
        ],
    }
    t = tree_from_dict(doc)
    hit = next(p for p in t.paths if p.leaf == "hit")
    assert hit.allowed[0] == {"b"}
    reaching = [x for x in "abc" if leaf_of(t, (x,)) == "hit"]
    assert reaching == ["b"]


def test_syntax_error_carries_position():
    with pytest.raises(TreeSyntaxError) as err:
        parse_tree('{"features": [\n  oops]}')
    assert err.value.line == 2


def test_schema_error():
    doc = small_tree_doc()
    doc["nodes"]["r"] = {"feature": "x1"}
    with pytest.raises(TreeSchemaError):
        tree_from_dict(doc)


def test_weights_must_sum_to_one():
    doc = small_tree_doc()
    doc["features"][0]["weights"] = ["1/2", "1/3"]
    with pytest.raises((TreeSchemaError, TreeValidationError)):
        tree_from_dict(doc)


@pytest.mark.parametrize("raw, expected", [
    ("0.03", Fraction(3, 100)), (0.03, Fraction(3, 100)), ("7/256", Fraction(7, 256)), (1, Fraction(1)),
])
def test_as_rational(raw, expected):
    assert as_rational(raw) == expected


def test_coerce_values_matches_tokens(fig1):
    assert coerce_values(fig1, "1 1 1 1 0 0 0 0 1".split()) == (1, 1, 1, 1, 0, 0, 0, 0, 1)
    with pytest.raises(ValueError):
        coerce_values(fig1, ["2"] * 9)


def test_fig1_round_trip(fig1):
    again = parse_tree(serialize_tree(fig1))
    assert again == fig1
    assert serialize_tree(again) == serialize_tree(fig1)


def test_weighted_round_trip(fig1_weighted):
    doc = tree_to_dict(fig1_weighted)
    assert doc["features"][0]["weights"] == ["3/4", "1/4"]
    assert parse_tree(json.dumps(doc)) == fig1_weighted


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), m=st.integers(1, 7), weighted=st.booleans())
def test_random_round_trip(seed, m, weighted):
    t = oracle.random_tree(m, [2 + (seed + k) % 2 for k in range(m)], max_depth=6, weighted=weighted, seed=seed)
    assert validate_tree(t) == []
    text = serialize_tree(t)
    again = parse_tree(text)
    assert again == t and serialize_tree(again) == text


@pytest.mark.parametrize("seed", range(5))
def test_each_point_lies_on_exactly_one_path(seed):
    t = oracle.random_tree(7, [2, 3, 2, 3, 2, 2, 3], max_depth=7, seed=seed)
    rng = random.Random(seed)
    for _ in range(1000):
        x = oracle.random_point(t, rng)
        on = [p for p in t.paths if p.consistent_with(x, range(1, 8))]
        assert len(on) == 1
        assert on[0].leaf == leaf_of(t, x)
