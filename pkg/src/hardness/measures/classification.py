"""Per-instance hardness measures for classification data.

Each function returns a vector with one value per instance, in [0, 1],
where larger means harder.
"""

from __future__ import annotations

import warnings

import numpy as np

from ..core import CLASSIFICATION_MEASURES, HardnessProfile, ValidationError, scale
from ..geometry import build_mst, epsilon_graph, knn_matrix, local_sets, pairwise_distances
from ..models import GINI, class_posteriors, fit_cart


def _singleton_mask(labels):
    counts = np.bincount(labels)
    single = counts[labels] == 1
    if single.any():
        warnings.warn(f"{int(single.sum())} instance(s) belong to singleton classes; "
                      "local-set measures report 1.0 for them", RuntimeWarning, stacklevel=3)
    return single


def kdn(dm, labels, k: int = 5) -> np.ndarray:
    """Fraction of the k nearest neighbors carrying a different label.

    ``k`` is capped at n - 1 so tiny datasets stay computable.
    """
    labels = np.asarray(labels)
    k_eff = min(k, dm.shape[0] - 1)
    nb = knn_matrix(dm, k_eff)
    return (labels[nb] != labels[:, None]).sum(axis=1) / k_eff


def dcp(tree, labels) -> np.ndarray:
    """One minus the share of the instance's leaf that carries its label."""
    labels = np.asarray(labels)
    out = np.empty(len(labels))
    for i, y in enumerate(labels):
        counts = tree.value[tree.leaf_of[i]]
        out[i] = 1.0 - counts[y] / counts.sum()
    return out


def tree_depth(tree) -> np.ndarray:
    """Depth of each instance's leaf over the deepest leaf (0 for a stump-less tree)."""
    depth = np.array([tree.depth[leaf] for leaf in tree.leaf_of], dtype=float)
    top = tree.max_depth
    return depth / top if top > 0 else np.zeros_like(depth)


def cld(posteriors, labels) -> np.ndarray:
    """Class likelihood difference, mapped to [0, 1].

    ``(1 - (p(own class) - max p(other class))) / 2``.
    """
    P = np.asarray(posteriors, dtype=float)
    labels = np.asarray(labels)
    rows = np.arange(len(labels))
    own = P[rows, labels]
    others = P.copy()
    others[rows, labels] = -np.inf
    return (1.0 - (own - others.max(axis=1))) / 2.0


def cb(labels) -> np.ndarray:
    labels = np.asarray(labels)
    counts = np.bincount(labels)
    return 1.0 - counts[labels] / len(labels)


def f1_frac(X, labels) -> np.ndarray:
    """Fraction of features whose value falls inside a class-overlap interval.

    For feature f the overlap of the instance's class with class c is
    ``[max(min_own, min_c), min(max_own, max_c)]`` (inclusive, used only when
    nonempty).
    """
    X = np.asarray(getattr(X, "features", X), dtype=float)
    labels = np.asarray(labels)
    classes = np.unique(labels)
    if len(classes) < 2:
        raise ValidationError("F1 needs at least 2 classes")
    lo = np.array([X[labels == c].min(axis=0) for c in classes])
    hi = np.array([X[labels == c].max(axis=0) for c in classes])
    pos = np.searchsorted(classes, labels)
    n, m = X.shape
    overlapped = np.zeros((n, m), dtype=bool)
    for a in range(len(classes)):
        rows = pos == a
        for b in range(len(classes)):
            if a == b:
                continue
            start = np.maximum(lo[a], lo[b])
            stop = np.minimum(hi[a], hi[b])
            inside = (start <= stop) & (X[rows] >= start) & (X[rows] <= stop)
            overlapped[rows] |= inside
    return overlapped.sum(axis=1) / m


def n1(mst, labels) -> np.ndarray:
    """Fraction of MST neighbors with a different label."""
    labels = np.asarray(labels)
    out = np.empty(len(labels))
    for i, nb in enumerate(mst.neighbors):
        nb = np.asarray(nb, dtype=np.intp)
        out[i] = np.count_nonzero(labels[nb] != labels[i]) / len(nb)
    return out


def _nearest_friend(dm, labels):
    labels = np.asarray(labels)
    d = np.where(labels[:, None] == labels[None, :], dm, np.inf)
    np.fill_diagonal(d, np.inf)
    return d.min(axis=1)


def n2(ls, dm, labels) -> np.ndarray:
    """Intra/extra class distance ratio, bounded as a / (a + b).

    ``a`` is the distance to the nearest same-class instance and ``b`` the
    nearest-enemy distance. a = b = 0 gives 0.5; singleton classes give 1.
    """
    labels = np.asarray(labels)
    single = _singleton_mask(labels)
    a = _nearest_friend(dm, labels)
    b = ls.enemy_distance
    out = np.full(len(labels), 0.5)
    nz = ((a + b) > 0) & ~single
    out[nz] = a[nz] / (a[nz] + b[nz])
    out[single] = 1.0
    return out


def lsc(ls, labels) -> np.ndarray:
    """One minus local-set size relative to the rest of the instance's class."""
    labels = np.asarray(labels)
    single = _singleton_mask(labels)
    class_size = np.bincount(labels)[labels]
    out = np.ones(len(labels))
    ok = ~single
    out[ok] = 1.0 - ls.sizes()[ok] / (class_size[ok] - 1)
    return out


def lsr(ls, dm, labels) -> np.ndarray:
    """One minus the nearest-enemy radius over the farthest same-class distance.

    The ratio is clipped at 1; a zero-distance enemy scores 1.
    """
    labels = np.asarray(labels)
    single = _singleton_mask(labels)
    same = labels[:, None] == labels[None, :]
    np.fill_diagonal(same, False)
    far = np.where(same, dm, -np.inf).max(axis=1)
    radius = ls.enemy_distance
    out = np.ones(len(labels))
    for i in range(len(labels)):
        if single[i] or radius[i] == 0:
            continue
        ratio = 1.0 if far[i] <= 0 else min(1.0, radius[i] / far[i])
        out[i] = 1.0 - ratio
    return out


def usefulness(ls) -> np.ndarray:
    """One minus the fraction of other instances whose local set contains this one."""
    counts = ls.usage_counts()
    return 1.0 - counts / (len(counts) - 1)


def density(egraph) -> np.ndarray:
    """One minus the vertex degree over n - 1."""
    deg = egraph.degree
    return 1.0 - deg / (len(deg) - 1)


def classification_profile(ds, k: int = 5, min_leaf_dcp: int = 5, de_quantile: float = 0.15,
                           measures=None) -> HardnessProfile:
    """All classification measures for a dataset, sharing geometry.

    Parameters
    ----------
    ds : Dataset or ScaledView
        Features are min-max scaled before any distance is taken.
    k : int, default=5
        Neighborhood size for kDN.
    min_leaf_dcp : int, default=5
        Minimum leaf size of the tree whose leaves act as disjuncts for DCP.
    de_quantile : float, default=0.15
        Distance quantile that sets the epsilon of the density graph.
    measures : sequence of str, optional
        Subset of measure names to keep (all by default).
    """
    view = scale(ds)
    labels = np.asarray(view.target, dtype=np.intp)
    n = view.n
    if n < 4:
        raise ValidationError(f"need at least 4 instances, got {n}")
    if len(np.unique(labels)) < 2:
        raise ValidationError("classification measures need at least 2 classes")
    wanted = tuple(measures) if measures else CLASSIFICATION_MEASURES
    unknown = set(wanted) - set(CLASSIFICATION_MEASURES)
    if unknown:
        raise ValidationError(f"unknown classification measures: {sorted(unknown)}")

    dm = pairwise_distances(view.features)
    cache = {}

    def localsets():
        if "ls" not in cache:
            cache["ls"] = local_sets(dm, labels)
        return cache["ls"]

    n_classes = int(labels.max()) + 1
    compute = {
        "kDN": lambda: kdn(dm, labels, k),
        "DCP": lambda: dcp(fit_cart(view.features, labels, GINI, min_leaf_dcp, n_classes), labels),
        "TD": lambda: tree_depth(fit_cart(view.features, labels, GINI, 1, n_classes)),
        "CLD": lambda: cld(class_posteriors(view.features, labels), labels),
        "CB": lambda: cb(labels),
        "F1": lambda: f1_frac(view.features, labels),
        "N1": lambda: n1(build_mst(dm), labels),
        "N2": lambda: n2(localsets(), dm, labels),
        "LSC": lambda: lsc(localsets(), labels),
        "LSR": lambda: lsr(localsets(), dm, labels),
        "U": lambda: usefulness(localsets()),
        "De": lambda: density(epsilon_graph(dm, de_quantile, same_class_only=True, labels=labels)),
    }
    # several local-set measures raise the same warning; pass each on once
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        cols = [compute[name]() for name in wanted]
    seen = set()
    for w in caught:
        if str(w.message) not in seen:
            seen.add(str(w.message))
            warnings.warn(w.message, stacklevel=2)
    meta = {"k": k, "min_leaf_dcp": min_leaf_dcp, "de_quantile": de_quantile}
    return HardnessProfile(wanted, np.column_stack(cols), meta=meta)
