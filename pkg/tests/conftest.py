from fractions import Fraction
from importlib.resources import files

import pytest

from deltarel import example_tree

V = (1, 1, 1, 1, 0, 0, 0, 0, 1)
DATA = files("deltarel").joinpath("data")


def small_tree_doc(children=None, domain=(0, 1)):
    """One boolean test on x1 with two leaves; ``children`` overrides the edge list."""
    edges = children or [
        {"from": "r", "to": "a", "allowed": [0]},
        {"from": "r", "to": "b", "allowed": [1]},
    ]
    return {
        "features": [{"id": 1, "name": "x1", "domain": list(domain)}],
        "classes": [0, 1],
        "root": "r",
        "nodes": {"r": {"feature": 1}, "a": {"leaf": 0}, "b": {"leaf": 1}},
        "edges": edges,
    }


@pytest.fixture(scope="session")
def fig1():
    return example_tree("fig1")


@pytest.fixture(scope="session")
def fig1_weighted():
    return example_tree("fig1_weighted")


@pytest.fixture(scope="session")
def random8():
    return example_tree("random8")


@pytest.fixture
def v():
    return V


def q(s):
    return Fraction(s)
