"""scikit-learn style front ends.

The hardness measures describe the training set itself, so these estimators
expose ``fit`` and ``fit_transform`` (like ``TSNE``) rather than a
``transform`` for unseen rows.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.multiclass import type_of_target
from sklearn.utils.validation import check_is_fitted, check_X_y

from .core import CLASSIFICATION, REGRESSION, Dataset
from .ih import instance_hardness
from .measures import classification_profile, regression_profile


class ClassificationHardness(BaseEstimator):
    """Per-instance hardness measures for a labelled dataset.

    Parameters
    ----------
    k : int, default=5
        Neighborhood size for kDN.
    min_leaf_dcp : int, default=5
        Minimum leaf size of the DCP tree.
    de_quantile : float, default=0.15
        Distance quantile defining the density-graph threshold.
    measures : list of str or None, default=None
        Subset of measures to compute; all twelve when None.

    Attributes
    ----------
    hardness_ : ndarray of shape (n_samples, n_measures)
    profile_ : HardnessProfile
    classes_ : ndarray
        Labels in order of first appearance.
    """

    def __init__(self, k=5, min_leaf_dcp=5, de_quantile=0.15, measures=None):
        self.k = k
        self.min_leaf_dcp = min_leaf_dcp
        self.de_quantile = de_quantile
        self.measures = measures

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=float)
        self.n_features_in_ = X.shape[1]
        ds = Dataset.from_labels(X, list(y))
        self.classes_ = np.asarray(ds.classes)
        self.profile_ = classification_profile(ds, self.k, self.min_leaf_dcp, self.de_quantile, self.measures)
        self.hardness_ = self.profile_.values
        return self

    def fit_transform(self, X, y):
        return self.fit(X, y).hardness_

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "profile_")
        return np.asarray(self.profile_.names, dtype=object)


class RegressionHardness(BaseEstimator):
    """Per-instance hardness measures for a dataset with a continuous target.

    Parameters
    ----------
    k : int, default=5
        Neighbors of the leave-one-out regressor behind S3.
    hb_bins : int, default=10
        Histogram bins for HB.
    de_quantile : float, default=0.15
    min_leaf_td : int, default=5
        Minimum leaf size of the regression tree used by TD.
    measures : list of str or None, default=None
    """

    def __init__(self, k=5, hb_bins=10, de_quantile=0.15, min_leaf_td=5, measures=None):
        self.k = k
        self.hb_bins = hb_bins
        self.de_quantile = de_quantile
        self.min_leaf_td = min_leaf_td
        self.measures = measures

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=float, y_numeric=True)
        self.n_features_in_ = X.shape[1]
        ds = Dataset(X, y, REGRESSION)
        self.profile_, self.cfe_trace_ = regression_profile(
            ds, self.k, self.hb_bins, self.de_quantile, self.min_leaf_td, self.measures, return_trace=True)
        self.hardness_ = self.profile_.values
        return self

    def fit_transform(self, X, y):
        return self.fit(X, y).hardness_

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "profile_")
        return np.asarray(self.profile_.names, dtype=object)


class InstanceHardness(BaseEstimator):
    """Instance hardness from out-of-fold predictions of a learner pool.

    Parameters
    ----------
    pool : list of estimators or (name, estimator) pairs, default=None
        Any scikit-learn compatible learners; the built-in pool when None.
    folds : int, default=10
    random_state : int, default=0
        Seeds the fold assignment and any stochastic learner.
    task : {"auto", "classification", "regression"}, default="auto"
        "auto" treats a continuous target as regression.

    Attributes
    ----------
    ih_ : ndarray of shape (n_samples,)
    result_ : IhResult
    """

    def __init__(self, pool=None, folds=10, random_state=0, task="auto"):
        self.pool = pool
        self.folds = folds
        self.random_state = random_state
        self.task = task

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=float, y_numeric=False)
        self.n_features_in_ = X.shape[1]
        task = self.task
        if task == "auto":
            task = REGRESSION if type_of_target(y) == "continuous" else CLASSIFICATION
        if task == CLASSIFICATION:
            ds = Dataset.from_labels(X, list(y))
            self.classes_ = np.asarray(ds.classes)
        else:
            ds = Dataset(X, np.asarray(y, dtype=float), REGRESSION)
        self.task_ = task
        self.result_ = instance_hardness(ds, self.pool, self.folds, self.random_state)
        self.ih_ = self.result_.ih
        return self

    def fit_transform(self, X, y):
        return self.fit(X, y).ih_[:, None]
