"""scikit-learn style wrappers around the explainers.

The wrapped decision tree is a hyper-parameter; ``fit`` only loads and
validates it, so the estimators can sit in pipelines and be cloned or
grid-searched over ``delta`` like any other transformer.  ``transform``
maps each row to a boolean mask of the features in its explanation.
"""
from __future__ import annotations

import os

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .explain import check_delta, min_cardinality_drs, min_idrs
from .model import DecisionTree, classify, coerce_values, load_tree, parse_tree, tree_from_dict


def _resolve_tree(tree) -> DecisionTree:
    if isinstance(tree, DecisionTree):
        return tree
    if isinstance(tree, dict):
        return tree_from_dict(tree)
    if isinstance(tree, (str, os.PathLike)):
        if isinstance(tree, str) and tree.lstrip().startswith("{"):
            return parse_tree(tree)
        return load_tree(tree)
    raise TypeError(f"cannot build a decision tree from {type(tree).__name__}")


class _TreeExplainer(TransformerMixin, BaseEstimator):

    def fit(self, X=None, y=None):
        """Load and validate the tree; ``X`` is only checked for shape.

        Parameters
        ----------
        X : array-like of shape (n_samples, n_features), optional
            Instances the explainer will be used on.
        y : ignored

        Returns
        -------
        self : object
        """
        if self.tree is None:
            raise ValueError("no decision tree given")
        self.tree_ = _resolve_tree(self.tree)
        self.delta_ = check_delta(self.delta)
        self.n_features_in_ = self.tree_.features.m
        self.feature_names_in_ = np.array([f.name for f in self.tree_.features], dtype=object)
        if X is not None:
            self._rows(X)
        return self

    def _rows(self, X) -> list[tuple]:
        X = check_array(X, dtype=object, ensure_all_finite=False)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, but the tree uses {self.n_features_in_}")
        return [coerce_values(self.tree_, row) for row in X.tolist()]

    def predict(self, X):
        check_is_fitted(self)
        return np.array([classify(self.tree_, row) for row in self._rows(X)], dtype=object)

    def explain(self, X) -> list:
        """One :class:`~deltarel.explain.Explanation` per row of ``X``."""
        check_is_fitted(self)
        return [self._explain_row(row) for row in self._rows(X)]

    def transform(self, X):
        expls = self.explain(X)
        mask = np.zeros((len(expls), self.n_features_in_), dtype=bool)
        for r, e in enumerate(expls):
            for i in e.subset:
                mask[r, i - 1] = True
        return mask

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self)
        return self.feature_names_in_.copy()


class IDRSExplainer(_TreeExplainer):
    """Subset-minimal Idelta-relevant sets by deletion.

    Parameters
    ----------
    tree : DecisionTree, dict, JSON string or path
        The classifier to explain.
    delta : rational-like, default=0
        Largest tolerated error mass; ``0`` gives abductive explanations.
    order : {"asc", "greedy"} or list of int, default="asc"
        Deletion order.
    measure : {"joint", "path"}, default="joint"
        Error measure, see :mod:`deltarel.measure`.
    seed_set : list of int, optional
        Starting set for deletion; all features when omitted.
    """

    def __init__(self, tree=None, delta=0, order="asc", measure="joint", seed_set=None):
        self.tree = tree
        self.delta = delta
        self.order = order
        self.measure = measure
        self.seed_set = seed_set

    def _explain_row(self, row):
        return min_idrs(self.tree_, row, self.delta_, order=self.order, seed=self.seed_set,
                        measure=self.measure)


class MinCardinalityExplainer(_TreeExplainer):
    """Smallest feature sets whose conditional precision reaches ``delta``.

    Parameters
    ----------
    tree : DecisionTree, dict, JSON string or path
    delta : rational-like, default=1
        Required precision.
    budget : int, optional
        Largest size searched before giving up.
    """

    def __init__(self, tree=None, delta=1, budget=None):
        self.tree = tree
        self.delta = delta
        self.budget = budget

    def _explain_row(self, row):
        return min_cardinality_drs(self.tree_, row, self.delta_, budget=self.budget)
