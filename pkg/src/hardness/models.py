"""Small learners used by the hardness measures and by the instance-hardness pools.

The learners follow the scikit-learn estimator protocol (``get_params``,
``fit``/``predict``/``predict_proba``, ``classes_``) so that they can be
cloned, cross-validated, or swapped for any other scikit-learn estimator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata
from sklearn.base import BaseEstimator, ClassifierMixin, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_random_state, check_X_y

from .core import CLASSIFICATION, REGRESSION, ParameterError, ValidationError
from .geometry import knn

GINI = "gini"
VARIANCE = "variance"


def _features(view):
    return np.asarray(getattr(view, "features", view), dtype=float)


def fsum_dot(a, b) -> float:
    """Correctly rounded dot product; independent of element order."""
    return math.fsum(np.multiply(a, b).tolist())


# ---------------------------------------------------------------------------
# CART
# ---------------------------------------------------------------------------

@dataclass
class CartTree:
    """Axis-aligned binary tree grown without pruning.

    Nodes are stored in flat lists; ``feature[node] == -1`` marks a leaf.
    ``value`` holds class counts (classification) or the response mean.
    """

    mode: str
    min_leaf: int
    feature: list
    threshold: list
    left: list
    right: list
    depth: list
    value: list
    members: list
    leaf_of: np.ndarray  # leaf node index for each training instance

    @property
    def max_depth(self) -> int:
        return max(self.depth[node] for node in self.leaves())

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def leaves(self) -> list:
        return [k for k, f in enumerate(self.feature) if f == -1]

    def is_leaf(self, node) -> bool:
        return self.feature[node] == -1

    def route(self, x) -> int:
        """Leaf reached by a feature vector (value <= threshold goes left)."""
        node = 0
        while self.feature[node] != -1:
            node = self.left[node] if x[self.feature[node]] <= self.threshold[node] else self.right[node]
        return node

    def apply(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        out = np.zeros(X.shape[0], dtype=np.intp)
        active = np.arange(X.shape[0])
        stack = [(0, active)]
        while stack:
            node, rows = stack.pop()
            if self.feature[node] == -1:
                out[rows] = node
                continue
            go_left = X[rows, self.feature[node]] <= self.threshold[node]
            stack.append((self.left[node], rows[go_left]))
            stack.append((self.right[node], rows[~go_left]))
        return out


def _best_split(X, y, idx, mode, min_leaf, n_classes, parent_impurity):
    """Best legal ``(feature, threshold)`` at a node, or None if nothing helps."""
    n = len(idx)
    best = None
    best_gain = 0.0
    if mode == GINI:
        tol = 1e-12 * n
    else:
        tol = 1e-10 * parent_impurity
    for f in range(X.shape[1]):
        xs = X[idx, f]
        order = np.argsort(xs, kind="stable")
        xs_sorted = xs[order]
        # split after position p keeps p + 1 rows on the left
        p = np.arange(n - 1)
        legal = (xs_sorted[:-1] < xs_sorted[1:]) & (p + 1 >= min_leaf) & (n - p - 1 >= min_leaf)
        if not legal.any():
            continue
        n_left = (p + 1).astype(float)
        n_right = n - n_left
        if mode == GINI:
            onehot = np.zeros((n, n_classes))
            onehot[np.arange(n), y[idx][order]] = 1.0
            cl = np.cumsum(onehot, axis=0)[:-1]
            cr = onehot.sum(axis=0) - cl
            child = (n_left - (cl ** 2).sum(axis=1) / n_left) + (n_right - (cr ** 2).sum(axis=1) / n_right)
            gain = parent_impurity - child
        else:
            ys = y[idx][order]
            ys = ys - ys.mean()
            s1 = np.cumsum(ys)[:-1]
            s2 = np.cumsum(ys ** 2)[:-1]
            t1, t2 = ys.sum(), (ys ** 2).sum()
            sse_l = np.maximum(s2 - s1 ** 2 / n_left, 0.0)
            sse_r = np.maximum((t2 - s2) - (t1 - s1) ** 2 / n_right, 0.0)
            gain = t2 - (sse_l + sse_r)
        gain = np.where(legal, gain, -np.inf)
        k = int(np.argmax(gain))  # first maximum = lowest threshold
        if gain[k] > tol and (best is None or gain[k] > best_gain):
            lo, hi = xs_sorted[k], xs_sorted[k + 1]
            thr = (lo + hi) / 2.0
            if not lo <= thr < hi:
                thr = lo
            best_gain = float(gain[k])
            best = (f, thr)
    return best


def fit_cart(view, targets, mode=GINI, min_leaf: int = 1, n_classes: int | None = None) -> CartTree:
    """Grow an unpruned CART tree.

    A node becomes a leaf when it is pure (zero variance), holds at most
    ``min_leaf`` rows, or has no legal split that reduces impurity. A split is
    legal only if both children keep at least ``min_leaf`` rows. Thresholds are
    midpoints between consecutive distinct values; ties in impurity decrease go
    to the lowest feature index, then the lowest threshold.
    """
    if mode in (CLASSIFICATION, "classification"):
        mode = GINI
    elif mode in (REGRESSION, "regression"):
        mode = VARIANCE
    if mode not in (GINI, VARIANCE):
        raise ParameterError(f"unknown tree mode {mode!r}")
    if min_leaf < 1:
        raise ParameterError("min_leaf must be >= 1")
    X = _features(view)
    n = X.shape[0]
    if n < 1:
        raise ParameterError("cannot grow a tree on zero rows")
    if mode == GINI:
        y = np.asarray(targets, dtype=np.intp)
        if n_classes is None:
            n_classes = int(y.max()) + 1
    else:
        y = np.asarray(targets, dtype=float)

    tree = CartTree(mode, min_leaf, [], [], [], [], [], [], [], np.zeros(n, dtype=np.intp))

    def new_node(idx, depth):
        tree.feature.append(-1)
        tree.threshold.append(np.nan)
        tree.left.append(-1)
        tree.right.append(-1)
        tree.depth.append(depth)
        if mode == GINI:
            tree.value.append(np.bincount(y[idx], minlength=n_classes))
        else:
            tree.value.append(math.fsum(y[idx].tolist()) / len(idx))
        tree.members.append(idx)
        return len(tree.feature) - 1

    root = new_node(np.arange(n), 0)
    stack = [root]
    while stack:
        node = stack.pop()
        idx = tree.members[node]
        size = len(idx)
        if mode == GINI:
            counts = tree.value[node]
            impurity = size - float((counts.astype(float) ** 2).sum()) / size
            pure = np.count_nonzero(counts) <= 1
        else:
            ys = y[idx]
            pure = bool(np.all(ys == ys[0]))
            impurity = float(((ys - ys.mean()) ** 2).sum())
        if pure or size <= min_leaf or size < 2 * min_leaf:
            continue
        split = _best_split(X, y, idx, mode, min_leaf, n_classes, impurity)
        if split is None:
            continue
        f, thr = split
        go_left = X[idx, f] <= thr
        tree.feature[node] = f
        tree.threshold[node] = thr
        depth = tree.depth[node] + 1
        left = new_node(idx[go_left], depth)
        right = new_node(idx[~go_left], depth)
        tree.left[node] = left
        tree.right[node] = right
        stack.append(right)
        stack.append(left)

    for leaf in tree.leaves():
        tree.leaf_of[tree.members[leaf]] = leaf
    return tree


def tree_locate(tree: CartTree, i) -> tuple[int, int]:
    """(leaf id, leaf depth) for training row ``i`` or for a feature vector."""
    if np.ndim(i) == 0:
        leaf = int(tree.leaf_of[int(i)])
    else:
        leaf = tree.route(np.asarray(i, dtype=float))
    return leaf, tree.depth[leaf]


# ---------------------------------------------------------------------------
# Least squares and correlation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OlsFit:
    coef: np.ndarray  # intercept first
    fitted: np.ndarray
    residuals: np.ndarray

    @property
    def intercept(self) -> float:
        return float(self.coef[0])

    @property
    def slopes(self) -> np.ndarray:
        return self.coef[1:]


def _solve_normal_equations(X, y, alpha=0.0, jitter=1e-10):
    """Least-squares coefficients (intercept first) from the normal equations.

    Gram entries are exact-rounded sums, so the solution does not depend on
    row order. Rank-deficient Gram matrices get ``jitter`` added to the
    diagonal. ``alpha`` is a ridge penalty that leaves the intercept alone.
    """
    n, m = X.shape
    A = np.column_stack([np.ones(n), X])
    cols = [A[:, a] for a in range(m + 1)]
    gram = np.empty((m + 1, m + 1))
    for a in range(m + 1):
        for b in range(a, m + 1):
            gram[a, b] = gram[b, a] = fsum_dot(cols[a], cols[b])
    rhs = np.array([fsum_dot(c, y) for c in cols])
    if np.linalg.matrix_rank(gram) < m + 1:
        gram[np.diag_indices(m + 1)] += jitter
    gram[np.diag_indices(m + 1)[0][1:], np.diag_indices(m + 1)[1][1:]] += alpha
    return np.linalg.solve(gram, rhs)


def _linear_predict(X, coef):
    out = np.full(X.shape[0], coef[0])
    for f in range(X.shape[1]):
        out = out + X[:, f] * coef[f + 1]
    return out


def fit_ols(view, responses) -> OlsFit:
    """Multiple linear regression with intercept, via the normal equations.

    Singular (collinear) designs are made solvable with a 1e-10 jitter on the
    Gram diagonal.
    """
    X = _features(view)
    if X.ndim == 1:
        X = X[:, None]
    y = np.asarray(responses, dtype=float)
    n, m = X.shape
    if n <= m + 1:
        raise ParameterError(f"underdetermined least squares: n={n} <= m+1={m + 1}")
    coef = _solve_normal_equations(X, y)
    fitted = _linear_predict(X, coef)
    return OlsFit(coef, fitted, y - fitted)


def simple_linear_fit(column, responses) -> np.ndarray:
    """Residuals of a straight-line fit of ``responses`` on one feature."""
    return fit_ols(np.asarray(column, dtype=float)[:, None], responses).residuals


def spearman(a, b) -> float:
    """Spearman rank correlation (average ranks); 0 if either input is constant."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ParameterError("spearman needs vectors of equal length")
    if a.size < 2:
        raise ParameterError("spearman needs at least 2 values")
    if np.all(a == a[0]) or np.all(b == b[0]):
        return 0.0
    ra = rankdata(a)
    rb = rankdata(b)
    ra = ra - math.fsum(ra.tolist()) / ra.size
    rb = rb - math.fsum(rb.tolist()) / rb.size
    r = fsum_dot(ra, rb) / math.sqrt(fsum_dot(ra, ra) * fsum_dot(rb, rb))
    return float(min(1.0, max(-1.0, r)))


# ---------------------------------------------------------------------------
# Neighborhood predictions
# ---------------------------------------------------------------------------

def loo_knn_regress(dm, responses, i: int, k: int) -> float:
    """Mean response of the ``k`` nearest neighbors of ``i``, excluding ``i``."""
    y = np.asarray(responses, dtype=float)
    nb = knn(dm, i, k)
    return math.fsum(y[nb].tolist()) / len(nb)


def _cross_distances(A, B):
    d2 = np.zeros((A.shape[0], B.shape[0]))
    for f in range(A.shape[1]):
        d2 += (A[:, f][:, None] - B[:, f][None, :]) ** 2
    return np.sqrt(d2)


# ---------------------------------------------------------------------------
# Estimators
# ---------------------------------------------------------------------------

class _ClassifierBase(ClassifierMixin, BaseEstimator):
    def _encode(self, X, y):
        X, y = check_X_y(X, y)
        self.classes_, codes = np.unique(y, return_inverse=True)
        self.n_features_in_ = X.shape[1]
        return X, codes

    def predict(self, X):
        proba = self.predict_proba(X)
        return self.classes_[np.argmax(proba, axis=1)]


class GaussianNaiveBayes(_ClassifierBase):
    """Gaussian naive Bayes with Laplace-smoothed class priors.

    Parameters
    ----------
    var_floor : float, default=1e-9
        Lower bound for every per-class feature variance.
    laplace : float, default=1.0
        Pseudo-count added to each class when estimating priors.
    """

    def __init__(self, var_floor=1e-9, laplace=1.0):
        self.var_floor = var_floor
        self.laplace = laplace

    def fit(self, X, y):
        X, codes = self._encode(X, y)
        n_classes = len(self.classes_)
        m = X.shape[1]
        self.theta_ = np.empty((n_classes, m))
        self.var_ = np.empty((n_classes, m))
        counts = np.bincount(codes, minlength=n_classes)
        for c in range(n_classes):
            rows = X[codes == c]
            for f in range(m):
                col = rows[:, f]
                mu = math.fsum(col.tolist()) / len(col)
                self.theta_[c, f] = mu
                self.var_[c, f] = max(math.fsum(((col - mu) ** 2).tolist()) / len(col), self.var_floor)
        self.class_prior_ = (counts + self.laplace) / (len(codes) + self.laplace * n_classes)
        return self

    def predict_log_joint(self, X):
        check_is_fitted(self, "theta_")
        X = check_array(X)
        jll = np.tile(np.log(self.class_prior_), (X.shape[0], 1))
        for c in range(len(self.classes_)):
            for f in range(X.shape[1]):
                var = self.var_[c, f]
                jll[:, c] += -0.5 * np.log(2.0 * np.pi * var) - (X[:, f] - self.theta_[c, f]) ** 2 / (2.0 * var)
        return jll

    def predict_proba(self, X):
        jll = self.predict_log_joint(X)
        jll = jll - jll.max(axis=1, keepdims=True)
        p = np.exp(jll)
        return p / p.sum(axis=1, keepdims=True)


def class_posteriors(view, labels) -> np.ndarray:
    """Naive-Bayes posterior of every class for every training instance."""
    X = _features(view)
    labels = np.asarray(labels)
    if len(np.unique(labels)) < 2:
        raise ValidationError("class likelihoods need at least 2 classes")
    model = GaussianNaiveBayes().fit(X, labels)
    return model.predict_proba(X)


def class_likelihoods(view, labels, i: int) -> np.ndarray:
    """Posterior class probabilities of instance ``i`` (classes sorted)."""
    return class_posteriors(view, labels)[i]


class KNeighborsLearner(_ClassifierBase):
    """k-nearest-neighbor classifier; probabilities are neighbor class fractions."""

    def __init__(self, n_neighbors=5):
        self.n_neighbors = n_neighbors

    def fit(self, X, y):
        X, codes = self._encode(X, y)
        self.X_ = X
        self.codes_ = codes
        return self

    def predict_proba(self, X):
        check_is_fitted(self, "X_")
        X = check_array(X)
        k = min(self.n_neighbors, self.X_.shape[0])
        d = _cross_distances(X, self.X_)
        nb = np.argsort(d, axis=1, kind="stable")[:, :k]
        proba = np.zeros((X.shape[0], len(self.classes_)))
        for c in range(len(self.classes_)):
            proba[:, c] = (self.codes_[nb] == c).sum(axis=1) / k
        return proba


class CartClassifier(_ClassifierBase):
    """CART with Gini splits; probabilities are leaf class frequencies."""

    def __init__(self, min_leaf=2):
        self.min_leaf = min_leaf

    def fit(self, X, y):
        X, codes = self._encode(X, y)
        self.tree_ = fit_cart(X, codes, GINI, self.min_leaf, n_classes=len(self.classes_))
        return self

    def predict_proba(self, X):
        check_is_fitted(self, "tree_")
        return _tree_proba(self.tree_, check_array(X))


def _tree_proba(tree, X):
    leaves = tree.apply(X)
    counts = np.array([tree.value[leaf] for leaf in leaves], dtype=float)
    return counts / counts.sum(axis=1, keepdims=True)


class LogisticRegressionGD(_ClassifierBase):
    """One-vs-rest logistic regression trained by full-batch gradient descent.

    The per-class sigmoid outputs are renormalized to sum to one.
    """

    def __init__(self, epochs=500, learning_rate=0.1):
        self.epochs = epochs
        self.learning_rate = learning_rate

    def fit(self, X, y):
        X, codes = self._encode(X, y)
        n, m = X.shape
        A = np.column_stack([np.ones(n), X])
        W = np.zeros((len(self.classes_), m + 1))
        T = (codes[:, None] == np.arange(len(self.classes_))[None, :]).astype(float)
        for _ in range(self.epochs):
            P = _sigmoid(A @ W.T)
            W -= self.learning_rate * ((P - T).T @ A) / n
        self.coef_ = W
        return self

    def predict_proba(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X)
        A = np.column_stack([np.ones(X.shape[0]), X])
        P = _sigmoid(A @ self.coef_.T)
        return P / P.sum(axis=1, keepdims=True)


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


class BaggedCartClassifier(_ClassifierBase):
    """Bootstrap-aggregated CART classifiers (averaged leaf frequencies)."""

    def __init__(self, n_estimators=20, min_leaf=2, random_state=None):
        self.n_estimators = n_estimators
        self.min_leaf = min_leaf
        self.random_state = random_state

    def fit(self, X, y):
        X, codes = self._encode(X, y)
        rng = check_random_state(self.random_state)
        n = X.shape[0]
        self.trees_ = []
        for _ in range(self.n_estimators):
            rows = rng.randint(0, n, n)
            self.trees_.append(fit_cart(X[rows], codes[rows], GINI, self.min_leaf,
                                        n_classes=len(self.classes_)))
        return self

    def predict_proba(self, X):
        check_is_fitted(self, "trees_")
        X = check_array(X)
        return sum(_tree_proba(t, X) for t in self.trees_) / len(self.trees_)


class LeastSquaresRegressor(RegressorMixin, BaseEstimator):
    """Linear regression via normal equations; ``alpha > 0`` gives ridge."""

    def __init__(self, alpha=0.0):
        self.alpha = alpha

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        self.n_features_in_ = X.shape[1]
        self.coef_ = _solve_normal_equations(X, y.astype(float), alpha=self.alpha)
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        return _linear_predict(check_array(X), self.coef_)


class KNeighborsRegressorLearner(RegressorMixin, BaseEstimator):
    def __init__(self, n_neighbors=5):
        self.n_neighbors = n_neighbors

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        self.n_features_in_ = X.shape[1]
        self.X_, self.y_ = X, y.astype(float)
        return self

    def predict(self, X):
        check_is_fitted(self, "X_")
        X = check_array(X)
        k = min(self.n_neighbors, self.X_.shape[0])
        nb = np.argsort(_cross_distances(X, self.X_), axis=1, kind="stable")[:, :k]
        return self.y_[nb].mean(axis=1)


class CartRegressor(RegressorMixin, BaseEstimator):
    def __init__(self, min_leaf=5):
        self.min_leaf = min_leaf

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        self.n_features_in_ = X.shape[1]
        self.tree_ = fit_cart(X, y.astype(float), VARIANCE, self.min_leaf)
        return self

    def predict(self, X):
        check_is_fitted(self, "tree_")
        return _tree_mean(self.tree_, check_array(X))


def _tree_mean(tree, X):
    return np.array([tree.value[leaf] for leaf in tree.apply(X)], dtype=float)


class BaggedCartRegressor(RegressorMixin, BaseEstimator):
    def __init__(self, n_estimators=20, min_leaf=5, random_state=None):
        self.n_estimators = n_estimators
        self.min_leaf = min_leaf
        self.random_state = random_state

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        self.n_features_in_ = X.shape[1]
        rng = check_random_state(self.random_state)
        n = X.shape[0]
        self.trees_ = []
        for _ in range(self.n_estimators):
            rows = rng.randint(0, n, n)
            self.trees_.append(fit_cart(X[rows], y[rows].astype(float), VARIANCE, self.min_leaf))
        return self

    def predict(self, X):
        check_is_fitted(self, "trees_")
        X = check_array(X)
        return sum(_tree_mean(t, X) for t in self.trees_) / len(self.trees_)


def default_pool(kind: str, seed: int = 0) -> list:
    """The built-in learner pool as ``(name, estimator)`` pairs.

    Only the bagged trees consume randomness; their seed is derived from
    ``seed`` and the learner's position in the pool.
    """
    def derived(idx):
        return int(np.random.SeedSequence([seed, idx]).generate_state(1)[0])

    if kind == CLASSIFICATION:
        return [
            ("gaussian_nb", GaussianNaiveBayes()),
            ("knn", KNeighborsLearner(n_neighbors=5)),
            ("cart", CartClassifier(min_leaf=2)),
            ("logistic", LogisticRegressionGD(epochs=500, learning_rate=0.1)),
            ("bagged_cart", BaggedCartClassifier(n_estimators=20, min_leaf=2, random_state=derived(4))),
        ]
    if kind == REGRESSION:
        return [
            ("ols", LeastSquaresRegressor(alpha=0.0)),
            ("ridge", LeastSquaresRegressor(alpha=1e-2)),
            ("knn", KNeighborsRegressorLearner(n_neighbors=5)),
            ("cart", CartRegressor(min_leaf=5)),
            ("bagged_cart", BaggedCartRegressor(n_estimators=20, min_leaf=5, random_state=derived(4))),
        ]
    raise ParameterError(f"unknown kind {kind!r}")
