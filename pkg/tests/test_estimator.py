import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from deltarel import IDRSExplainer, MinCardinalityExplainer, serialize_tree

from conftest import DATA, V


def test_idrs_transform(fig1):
    est = IDRSExplainer(tree=fig1, delta=0).fit([V])
    mask = est.transform([V])
    assert mask.shape == (1, 9)
    assert list(np.flatnonzero(mask[0]) + 1) == [1, 2, 3, 4, 9]
    assert est.predict([V]).tolist() == [1]


def test_tree_from_path_or_text(fig1):
    a = IDRSExplainer(tree=str(DATA.joinpath("fig1.json"))).fit()
    b = IDRSExplainer(tree=serialize_tree(fig1)).fit()
    assert a.tree_ == b.tree_ == fig1


def test_params_and_clone(fig1):
    est = IDRSExplainer(tree=fig1, delta="3/100", order=[1, 2, 3, 4, 9], seed_set=[1, 2, 3, 4, 9])
    assert est.get_params()["delta"] == "3/100"
    twin = clone(est).fit()
    assert twin.explain([V])[0].subset == {1, 9}
    est.set_params(delta=1)
    assert est.fit().explain([V])[0].subset == frozenset()


def test_string_rows_are_coerced(fig1):
    est = IDRSExplainer(tree=fig1).fit()
    assert est.transform([[str(x) for x in V]]).sum() == 5


def test_input_validation(fig1):
    est = IDRSExplainer(tree=fig1)
    with pytest.raises(NotFittedError):
        est.transform([V])
    est.fit()
    with pytest.raises(ValueError):
        est.transform([V[:5]])
    with pytest.raises(ValueError):
        IDRSExplainer().fit()
    with pytest.raises(ValueError):
        IDRSExplainer(tree=fig1, delta=2).fit()


def test_min_cardinality_explainer(fig1):
    est = MinCardinalityExplainer(tree=fig1, delta=1).fit()
    e = est.explain([V])[0]
    assert e.precision == 1
    assert list(est.get_feature_names_out()) == [f"x{i}" for i in range(1, 10)]
