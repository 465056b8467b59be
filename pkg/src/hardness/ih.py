"""Instance hardness from out-of-fold predictions of a learner pool.

Classification: ``IH(i) = 1 - mean_j p_j(y_i | x_i)``.
Regression: ``IH(i) = 1 - mean_j exp(-(y_i - yhat_ji)**2 / gamma)`` with
``gamma`` the mean squared response (signal power).
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import clone
from sklearn.model_selection import KFold, StratifiedKFold

from .core import CLASSIFICATION, REGRESSION, ParameterError, ValidationError, atomic_open, format_value, scale
from .models import default_pool

GAMMA_FLOOR = 1e-12


@dataclass(frozen=True)
class CvPlan:
    folds: int
    assignment: np.ndarray  # fold index per instance
    stratified: bool
    seed: int

    def split(self):
        for f in range(self.folds):
            test = np.flatnonzero(self.assignment == f)
            train = np.flatnonzero(self.assignment != f)
            yield train, test


def make_cv_plan(ds, folds: int = 10, seed: int = 0) -> CvPlan:
    """Deterministic (stratified, for classification) fold assignment.

    If the smallest class has fewer members than ``folds``, the fold count is
    reduced to that class size and a warning is issued.
    """
    if folds < 2:
        raise ParameterError(f"folds must be >= 2, got {folds}")
    n = ds.n
    if n < folds:
        raise ParameterError(f"cannot make {folds} folds from {n} instances")
    assignment = np.empty(n, dtype=np.intp)
    if ds.kind == CLASSIFICATION:
        smallest = int(np.bincount(ds.target).min())
        if smallest < 2:
            raise ValidationError("every class needs at least 2 members for cross-validation")
        if smallest < folds:
            warnings.warn(f"smallest class has {smallest} members; using {smallest} folds instead of {folds}",
                          RuntimeWarning, stacklevel=2)
            folds = smallest
        splitter = StratifiedKFold(n_splits=folds, shuffle=True, random_state=seed)
        splits = splitter.split(np.zeros((n, 1)), ds.target)
        stratified = True
    else:
        splitter = KFold(n_splits=folds, shuffle=True, random_state=seed)
        splits = splitter.split(np.zeros((n, 1)))
        stratified = False
    for f, (_, test) in enumerate(splits):
        assignment[test] = f
    assignment.setflags(write=False)
    return CvPlan(folds, assignment, stratified, seed)


def ih_from_probabilities(p_true) -> np.ndarray:
    """IH for classification given ``p_true[j, i]``, learner j's probability of i's label."""
    p = np.atleast_2d(np.asarray(p_true, dtype=float))
    if p.shape[0] == 0:
        raise ParameterError("empty learner pool")
    return 1.0 - p.mean(axis=0)


def gamma_signal_power(y) -> float:
    """Mean squared response, floored at 1e-12 for an all-zero signal."""
    y = np.asarray(y, dtype=float)
    gamma = float(np.mean(y ** 2))
    if gamma <= 0.0:
        warnings.warn("signal power is zero; flooring gamma at 1e-12", RuntimeWarning, stacklevel=2)
        gamma = GAMMA_FLOOR
    return gamma


def ih_from_predictions(y, predictions, gamma: float | None = None) -> np.ndarray:
    """IH for regression given ``predictions[j, i]`` from each learner j."""
    y = np.asarray(y, dtype=float)
    yhat = np.atleast_2d(np.asarray(predictions, dtype=float))
    if yhat.shape[0] == 0:
        raise ParameterError("empty learner pool")
    if gamma is None:
        gamma = gamma_signal_power(y)
    return 1.0 - np.exp(-((y[None, :] - yhat) ** 2) / gamma).mean(axis=0)


@dataclass
class IhResult:
    kind: str
    ih: np.ndarray
    learners: tuple
    predictions: np.ndarray  # (learners, n): p(true class) or regression prediction
    folds: int
    seed: int
    gamma: float | None = None
    probabilities: np.ndarray | None = None  # (learners, n, classes), classification only
    meta: dict = field(default_factory=dict)

    def metadata(self) -> dict:
        out = {
            "kind": self.kind,
            "pool": list(self.learners),
            "folds": self.folds,
            "seed": self.seed,
            "gamma": self.gamma,
            "target_space": "raw",
            "feature_space": "min-max scaled",
        }
        out.update(self.meta)
        return out

    def to_csv(self, path) -> None:
        with atomic_open(path) as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["instance_id", "ih", *self.learners])
            for i in range(len(self.ih)):
                writer.writerow([i, format_value(self.ih[i])] + [format_value(v) for v in self.predictions[:, i]])

    def write_metadata(self, path) -> None:
        with atomic_open(path) as fh:
            json.dump(self.metadata(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _named(pool):
    named = []
    for k, item in enumerate(pool):
        if isinstance(item, tuple):
            named.append(item)
        else:
            named.append((f"{type(item).__name__.lower()}_{k}", item))
    if not named:
        raise ParameterError("empty learner pool")
    return named


def _job_estimator(est, seed, learner_idx, fold):
    est = clone(est)
    params = est.get_params(deep=False)
    if "random_state" in params:
        base = params["random_state"]
        base = seed if base is None else int(base)
        state = np.random.SeedSequence([base, learner_idx, fold]).generate_state(1)[0]
        est.set_params(random_state=int(state))
    return est


def _class_proba(est, X, n_classes):
    """Probabilities over all classes, aligned to integer class codes."""
    proba = np.zeros((X.shape[0], n_classes))
    classes = np.asarray(est.classes_).astype(int)
    if hasattr(est, "predict_proba"):
        proba[:, classes] = est.predict_proba(X)
    else:
        proba[np.arange(X.shape[0]), np.asarray(est.predict(X)).astype(int)] = 1.0
    return proba


def ih_classification(ds, pool=None, plan: CvPlan | None = None) -> IhResult:
    """Out-of-fold classification instance hardness."""
    if ds.kind != CLASSIFICATION:
        raise ValidationError("ih_classification needs a classification dataset")
    plan = plan or make_cv_plan(ds)
    named = _named(pool if pool is not None else default_pool(CLASSIFICATION, plan.seed))
    X = scale(ds).features
    y = np.asarray(ds.target)
    n_classes = len(ds.classes)
    proba = np.zeros((len(named), ds.n, n_classes))
    for f, (train, test) in enumerate(plan.split()):
        for j, (_, learner) in enumerate(named):
            est = _job_estimator(learner, plan.seed, j, f).fit(X[train], y[train])
            proba[j, test] = _class_proba(est, X[test], n_classes)
    p_true = proba[:, np.arange(ds.n), y]
    return IhResult(CLASSIFICATION, ih_from_probabilities(p_true), tuple(nm for nm, _ in named),
                    p_true, plan.folds, plan.seed, probabilities=proba)


def ih_regression(ds, pool=None, plan: CvPlan | None = None) -> IhResult:
    """Out-of-fold regression instance hardness on the raw response scale."""
    if ds.kind != REGRESSION:
        raise ValidationError("ih_regression needs a regression dataset")
    plan = plan or make_cv_plan(ds)
    named = _named(pool if pool is not None else default_pool(REGRESSION, plan.seed))
    X = scale(ds).features
    y = np.asarray(ds.target, dtype=float)
    preds = np.zeros((len(named), ds.n))
    for f, (train, test) in enumerate(plan.split()):
        for j, (_, learner) in enumerate(named):
            est = _job_estimator(learner, plan.seed, j, f).fit(X[train], y[train])
            preds[j, test] = est.predict(X[test])
    gamma = gamma_signal_power(y)
    return IhResult(REGRESSION, ih_from_predictions(y, preds, gamma), tuple(nm for nm, _ in named),
                    preds, plan.folds, plan.seed, gamma=gamma)


def instance_hardness(ds, pool=None, folds: int = 10, seed: int = 0) -> IhResult:
    plan = make_cv_plan(ds, folds, seed)
    if ds.kind == CLASSIFICATION:
        return ih_classification(ds, pool, plan)
    return ih_regression(ds, pool, plan)
