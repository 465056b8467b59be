"""Exact neighborhood geometry over scaled feature space.

Everything here works on a dense Euclidean distance matrix. Ties are broken
by ascending instance index so that all outputs are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ParameterError, ValidationError


def pairwise_distances(X) -> np.ndarray:
    """Symmetric matrix of Euclidean distances between the rows of ``X``.

    Squared differences are accumulated feature by feature, so every entry is
    computed with the same arithmetic regardless of its position in the
    matrix (row order never changes a distance, bit for bit).
    """
    X = np.asarray(getattr(X, "features", X), dtype=float)
    n = X.shape[0]
    if n < 2:
        raise ParameterError("need at least 2 instances for distances")
    d2 = np.zeros((n, n))
    for f in range(X.shape[1]):
        col = X[:, f]
        d2 += (col[:, None] - col[None, :]) ** 2
    dm = np.sqrt(d2)
    np.fill_diagonal(dm, 0.0)
    dm.setflags(write=False)
    return dm


def _check_k(n, k):
    if not 1 <= k <= n - 1:
        raise ParameterError(f"k must be in [1, {n - 1}], got {k}")


def knn_matrix(dm, k: int) -> np.ndarray:
    """Row ``i`` holds the ``k`` nearest neighbors of ``i`` (itself excluded)."""
    n = dm.shape[0]
    _check_k(n, k)
    d = np.array(dm, dtype=float)
    np.fill_diagonal(d, np.inf)
    # stable sort keeps ascending index among equal distances
    order = np.argsort(d, axis=1, kind="stable")
    return order[:, :k]


def knn(dm, i: int, k: int) -> np.ndarray:
    """Indices of the ``k`` nearest neighbors of instance ``i``."""
    n = dm.shape[0]
    _check_k(n, k)
    d = np.array(dm[i], dtype=float)
    d[i] = np.inf
    return np.argsort(d, kind="stable")[:k]


@dataclass(frozen=True)
class MstAdjacency:
    edges: tuple  # (i, j, weight) with i < j, in insertion order
    neighbors: tuple  # per vertex, sorted tuple of adjacent vertices

    @property
    def total_weight(self) -> float:
        return float(sum(w for _, _, w in self.edges))

    def degree(self) -> np.ndarray:
        return np.array([len(nb) for nb in self.neighbors])

    def to_csv_rows(self):
        return [(i, j, w) for i, j, w in self.edges]


class _DisjointSet:
    def __init__(self, n):
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, a):
        root = a
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[a] != root:
            self.parent[a], a = root, self.parent[a]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        return True


def build_mst(dm) -> MstAdjacency:
    """Kruskal's algorithm over the complete graph of ``dm``.

    Candidate edges are ordered by (weight, i, j), so among equal weights the
    lexicographically smallest pair wins.
    """
    n = dm.shape[0]
    if n < 2:
        raise ParameterError("need at least 2 instances for a spanning tree")
    iu, ju = np.triu_indices(n, k=1)
    w = np.asarray(dm)[iu, ju]
    order = np.lexsort((ju, iu, w))
    ds = _DisjointSet(n)
    edges = []
    adj = [[] for _ in range(n)]
    for e in order:
        a, b = int(iu[e]), int(ju[e])
        if ds.union(a, b):
            edges.append((a, b, float(w[e])))
            adj[a].append(b)
            adj[b].append(a)
            if len(edges) == n - 1:
                break
    return MstAdjacency(tuple(edges), tuple(tuple(sorted(nb)) for nb in adj))


@dataclass(frozen=True)
class LocalSetInfo:
    enemy: np.ndarray  # nearest-enemy index per instance
    enemy_distance: np.ndarray
    members: tuple  # LS(i) as sorted index arrays

    def sizes(self) -> np.ndarray:
        return np.array([len(ls) for ls in self.members])

    def usage_counts(self) -> np.ndarray:
        """How many local sets contain each instance."""
        n = len(self.members)
        counts = np.zeros(n, dtype=int)
        for ls in self.members:
            counts[ls] += 1
        return counts


def local_sets(dm, labels) -> LocalSetInfo:
    """Nearest enemies and local sets (points strictly closer than the enemy)."""
    labels = np.asarray(labels)
    if len(np.unique(labels)) < 2:
        raise ValidationError("local sets need at least 2 classes")
    dm = np.asarray(dm)
    n = dm.shape[0]
    enemy = np.empty(n, dtype=np.intp)
    dne = np.empty(n)
    members = []
    for i in range(n):
        d_enemy = np.where(labels != labels[i], dm[i], np.inf)
        j = int(np.argmin(d_enemy))  # first occurrence = lowest index
        enemy[i] = j
        dne[i] = dm[i, j]
        inside = dm[i] < dne[i]
        inside[i] = False
        members.append(np.flatnonzero(inside))
    return LocalSetInfo(enemy, dne, tuple(members))


@dataclass(frozen=True)
class EpsilonGraph:
    epsilon: float
    same_class_only: bool
    adjacency: np.ndarray  # boolean n x n, no self loops

    @property
    def degree(self) -> np.ndarray:
        return self.adjacency.sum(axis=1)

    @property
    def n_edges(self) -> int:
        return int(self.adjacency.sum()) // 2


def epsilon_graph(dm, quantile: float = 0.15, same_class_only: bool = False,
                  labels=None) -> EpsilonGraph:
    """Connect pairs at distance <= epsilon.

    Epsilon is the linearly interpolated ``quantile`` of all n(n-1)/2
    off-diagonal distances. With ``same_class_only`` only pairs sharing a
    label are connected (the threshold itself still uses all pairs).
    """
    if not 0 < quantile < 1:
        raise ParameterError(f"quantile must lie in (0, 1), got {quantile}")
    if same_class_only and labels is None:
        raise ParameterError("same_class_only requires labels")
    dm = np.asarray(dm)
    n = dm.shape[0]
    iu = np.triu_indices(n, k=1)
    eps = float(np.quantile(dm[iu], quantile, method="linear"))
    adj = dm <= eps
    if same_class_only:
        labels = np.asarray(labels)
        adj &= labels[:, None] == labels[None, :]
    np.fill_diagonal(adj, False)
    return EpsilonGraph(eps, same_class_only, adj)
