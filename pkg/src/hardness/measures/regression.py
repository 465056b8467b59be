"""Per-instance hardness measures for regression data.

All measures read min-max scaled features and responses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..core import REGRESSION_MEASURES, HardnessProfile, ValidationError, scale
from ..geometry import build_mst, epsilon_graph, pairwise_distances
from ..models import VARIANCE, _linear_predict, _solve_normal_equations, fit_cart, fit_ols, loo_knn_regress, spearman
from .classification import density, tree_depth

CFE_RESIDUAL_TOLERANCE = 0.1


@dataclass
class CfeTrace:
    """Record of the feature-elimination rounds behind CFE.

    ``removal_round[i]`` is the 1-based round in which instance ``i`` was
    removed, or 0 if it survived every round.
    """

    features: list = field(default_factory=list)
    correlations: list = field(default_factory=list)
    removed: list = field(default_factory=list)
    removal_round: np.ndarray = None

    @property
    def rounds(self) -> int:
        return len(self.features)

    @property
    def survivors(self) -> np.ndarray:
        return np.flatnonzero(self.removal_round == 0)

    def to_dict(self) -> dict:
        return {
            "rounds": [
                {"feature": int(f), "spearman": float(r), "removed": [int(i) for i in rem]}
                for f, r, rem in zip(self.features, self.correlations, self.removed)
            ],
            "survivors": [int(i) for i in self.survivors],
        }


def _line_residuals(x, y):
    # tiny remainders (n <= 2) are interpolated exactly instead of rejected
    coef = _solve_normal_equations(x[:, None], y)
    return y - _linear_predict(x[:, None], coef)


def cfe(X, y, tolerance: float = CFE_RESIDUAL_TOLERANCE):
    """Collective feature efficiency and the trace of its elimination rounds.

    Each round picks the unused feature with the largest absolute Spearman
    correlation to the remaining responses (lowest index on ties), fits a line
    on it and removes instances with ``|residual| <= tolerance``. It stops when
    features or instances run out, or when the chosen correlation is zero and
    nothing was removed (such a round is not counted). Removed instances score
    ``(round - 1) / rounds`` and survivors score 1.
    """
    X = np.asarray(getattr(X, "features", X), dtype=float)
    y = np.asarray(y, dtype=float)
    n, m = X.shape
    remaining = np.arange(n)
    unused = list(range(m))
    trace = CfeTrace(removal_round=np.zeros(n, dtype=int))
    while unused and remaining.size:
        if remaining.size >= 2:
            rhos = [abs(spearman(X[remaining, f], y[remaining])) for f in unused]
        else:
            rhos = [0.0] * len(unused)
        pick = int(np.argmax(rhos))
        f, rho = unused[pick], rhos[pick]
        res = _line_residuals(X[remaining, f], y[remaining])
        gone = remaining[np.abs(res) <= tolerance]
        if rho == 0.0 and gone.size == 0:
            break
        unused.pop(pick)
        trace.features.append(f)
        trace.correlations.append(rho)
        trace.removed.append(gone)
        trace.removal_round[gone] = trace.rounds
        remaining = np.setdiff1d(remaining, gone)
    values = np.ones(n)
    removed = trace.removal_round > 0
    if trace.rounds:
        values[removed] = (trace.removal_round[removed] - 1) / trace.rounds
    return values, trace


def le(olsfit) -> np.ndarray:
    """Absolute residual of a multiple linear regression."""
    return np.abs(olsfit.residuals)


def s1(mst, y) -> np.ndarray:
    """Mean absolute response difference to MST neighbors."""
    y = np.asarray(y, dtype=float)
    out = np.empty(len(y))
    for i, nb in enumerate(mst.neighbors):
        out[i] = math.fsum(np.abs(y[list(nb)] - y[i]).tolist()) / len(nb)
    return out


def s2(dm, y, diameter: float = 1.0) -> np.ndarray:
    """Mean input-space distance to the neighbors in response order.

    Instances are sorted by response (ties by index); interior positions have
    two neighbors whose distances are averaged, the ends have one. Distances
    are divided by ``diameter``; profiles pass sqrt(m), the diagonal of the
    scaled unit cube, so values stay in [0, 1].
    """
    y = np.asarray(y, dtype=float)
    n = len(y)
    order = np.argsort(y, kind="stable")
    out = np.empty(n)
    for p, i in enumerate(order):
        ds = []
        if p > 0:
            ds.append(dm[i, order[p - 1]])
        if p < n - 1:
            ds.append(dm[i, order[p + 1]])
        out[i] = ds[0] if len(ds) == 1 else (ds[0] + ds[1]) / 2.0
    return out / diameter


def s3(dm, y, k: int = 5) -> np.ndarray:
    """Leave-one-out squared error of a k-nearest-neighbor regressor."""
    y = np.asarray(y, dtype=float)
    k_eff = min(k, len(y) - 1)
    return np.array([(y[i] - loo_knn_regress(dm, y, i, k_eff)) ** 2 for i in range(len(y))])


def hb(y, bins: int = 10) -> np.ndarray:
    """One minus the share of instances whose scaled response shares the bin.

    Bins split [0, 1] evenly; the last bin is closed on the right.
    """
    y = np.asarray(y, dtype=float)
    idx = np.clip(np.floor(y * bins).astype(int), 0, bins - 1)
    counts = np.bincount(idx, minlength=bins)
    return 1.0 - counts[idx] / len(y)


def regression_profile(ds, k: int = 5, hb_bins: int = 10, de_quantile: float = 0.15,
                       min_leaf_td: int = 5, measures=None, return_trace: bool = False):
    """All regression measures for a dataset, sharing geometry.

    With ``return_trace`` the CFE elimination trace is returned alongside the
    profile.
    """
    view = scale(ds)
    n = view.n
    if n < 4:
        raise ValidationError(f"need at least 4 instances, got {n}")
    wanted = tuple(measures) if measures else REGRESSION_MEASURES
    unknown = set(wanted) - set(REGRESSION_MEASURES)
    if unknown:
        raise ValidationError(f"unknown regression measures: {sorted(unknown)}")
    X, y = view.features, np.asarray(view.target, dtype=float)
    dm = pairwise_distances(X)
    cfe_values, trace = cfe(X, y)

    def ols():
        if n <= X.shape[1] + 1:
            raise ValidationError("LE needs more instances than features + 1")
        return fit_ols(X, y)

    compute = {
        "CFE": lambda: cfe_values,
        "LE": lambda: le(ols()),
        "S1": lambda: s1(build_mst(dm), y),
        "S2": lambda: s2(dm, y, math.sqrt(view.features.shape[1])),
        "S3": lambda: s3(dm, y, k),
        "HB": lambda: hb(y, hb_bins),
        "TD": lambda: tree_depth(fit_cart(X, y, VARIANCE, min_leaf_td)),
        "De": lambda: density(epsilon_graph(dm, de_quantile, same_class_only=False)),
    }
    cols = [compute[name]() for name in wanted]
    meta = {"k": k, "hb_bins": hb_bins, "de_quantile": de_quantile, "min_leaf_td": min_leaf_td}
    profile = HardnessProfile(wanted, np.column_stack(cols), meta=meta)
    return (profile, trace) if return_trace else profile
