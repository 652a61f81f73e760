"""Hand-crafted structural features and a ridge-regression baseline."""
from __future__ import annotations

from collections import Counter
from dataclasses import astuple, dataclass, fields
import math
from pathlib import Path
from typing import Sequence

import numpy as np

from . import _kernels
from .graph import Graph, bfs_distances, degree_vector

EXACT_QUAD_LIMIT = 300
QUAD_SAMPLES = 100_000
QUAD_NAMES = ("quad_star", "quad_path", "quad_paw", "quad_cycle", "quad_diamond", "quad_clique")


@dataclass(frozen=True)
class FeatureVector:
    n_nodes: float
    n_edges: float
    closed_triangles: float
    open_triangles: float
    quad_star: float
    quad_path: float
    quad_paw: float
    quad_cycle: float
    quad_diamond: float
    quad_clique: float
    avg_degree: float
    avg_shortest_path: float
    edge_density: float
    n_leaf_nodes: float
    n_leaf_edges: float
    avg_closeness: float
    clustering_coefficient: float
    diameter: float
    n_communities: float

    def to_array(self) -> np.ndarray:
        return np.array(astuple(self), dtype=np.float64)


FEATURE_NAMES = tuple(f.name for f in fields(FeatureVector))


def count_triangles(g: Graph) -> int:
    """Each triangle counted once at its smallest edge ``(u, v)`` with third node ``w > v``."""
    nbr = [set(a) for a in g.neighbors]
    total = 0
    for u, v in g.edges:
        total += sum(1 for w in nbr[u] & nbr[v] if w > v)
    return total


def _csr(g: Graph):
    indptr = np.zeros(g.n + 1, dtype=np.int64)
    indptr[1:] = np.cumsum([len(a) for a in g.neighbors])
    indices = np.fromiter((v for a in g.neighbors for v in a), dtype=np.int64, count=int(indptr[-1]))
    return indptr, indices


def _classify4(sub: np.ndarray) -> int:
    # sub: 4x4 0/1 adjacency of a connected subset
    deg = sub.sum(axis=1)
    m = int(deg.sum()) // 2
    if m == 3:
        return 0 if deg.max() == 3 else 1
    if m == 4:
        return 2 if deg.max() == 3 else 3
    return 4 if m == 5 else 5


def _connected4(sub: np.ndarray) -> bool:
    seen = {0}
    stack = [0]
    while stack:
        u = stack.pop()
        for v in np.nonzero(sub[u])[0]:
            if v not in seen:
                seen.add(int(v))
                stack.append(int(v))
    return len(seen) == 4


def quad_counts(g: Graph, seed: int = 0, n_samples: int = QUAD_SAMPLES) -> tuple[np.ndarray, bool]:
    """Induced counts of connected 4-node subgraphs (see ``QUAD_NAMES``).

    Exact for ``n <= EXACT_QUAD_LIMIT``; above that the counts are estimated
    from uniformly sampled 4-subsets. Returns ``(counts, exact)``.
    """
    if g.n < 4:
        return np.zeros(6), True
    if g.n <= EXACT_QUAD_LIMIT:
        adj = g.adjacency_matrix().astype(np.uint8)
        indptr, indices = _csr(g)
        return _kernels.quad_census(adj, indptr, indices).astype(np.float64), True
    rng = np.random.default_rng(seed)
    nbr = [set(a) for a in g.neighbors]
    hits = np.zeros(6)
    for _ in range(n_samples):
        s = rng.choice(g.n, size=4, replace=False)
        sub = np.array([[1 if b in nbr[a] else 0 for b in s] for a in s], dtype=np.int64)
        if _connected4(sub):
            hits[_classify4(sub)] += 1
    return hits / n_samples * math.comb(g.n, 4), False


def _component_distances(g: Graph):
    """Yield ``(component_nodes, distance_sums, eccentricities)`` per component."""
    seen = np.zeros(g.n, dtype=bool)
    for s in range(g.n):
        if seen[s]:
            continue
        comp = sorted(bfs_distances(g, s))
        seen[comp] = True
        sums, eccs = [], []
        for u in comp:
            dist = bfs_distances(g, u)
            sums.append(sum(dist.values()))
            eccs.append(max(dist.values()))
        yield comp, sums, eccs


def label_propagation(g: Graph, max_rounds: int = 100) -> list[int]:
    """Synchronous label propagation; each node votes over itself and its
    neighbours, ties go to the smallest label."""
    labels = list(range(g.n))
    nbrs = g.neighbors
    for _ in range(max_rounds):
        new = []
        for u in range(g.n):
            votes = Counter(labels[v] for v in nbrs[u])
            votes[labels[u]] += 1
            top = max(votes.values())
            new.append(min(lab for lab, c in votes.items() if c == top))
        if new == labels:
            break
        labels = new
    return labels


def extract_features(g: Graph, seed: int = 0) -> FeatureVector:
    if g.n < 1:
        raise ValueError("graph must have at least one node")
    n, m = g.n, g.n_edges
    deg = degree_vector(g)
    tri = count_triangles(g)
    wedges = int((deg * (deg - 1) // 2).sum())
    quads, _ = quad_counts(g, seed=seed)

    weighted_asp = 0.0
    weight = 0
    closeness = 0.0
    diameter = 0
    for comp, sums, eccs in _component_distances(g):
        size = len(comp)
        diameter = max(diameter, max(eccs))
        if size < 2:
            continue
        pairs = size * (size - 1)
        weighted_asp += size * (sum(sums) / pairs)
        weight += size
        closeness += sum((size - 1) / s for s in sums)
    nbr = [set(a) for a in g.neighbors]
    local = []
    for u in range(n):
        d = deg[u]
        if d < 2:
            local.append(0.0)
            continue
        links = sum(len(nbr[v] & nbr[u]) for v in nbr[u]) / 2
        local.append(links / (d * (d - 1) / 2))
    leaf = deg == 1
    leaf_edges = sum(1 for u, v in g.edges if leaf[u] or leaf[v])
    return FeatureVector(
        n_nodes=n,
        n_edges=m,
        closed_triangles=tri,
        open_triangles=wedges - 3 * tri,
        **dict(zip(QUAD_NAMES, (float(q) for q in quads))),
        avg_degree=2.0 * m / n,
        avg_shortest_path=weighted_asp / weight if weight else 0.0,
        edge_density=2.0 * m / (n * (n - 1)) if n > 1 else 0.0,
        n_leaf_nodes=int(leaf.sum()),
        n_leaf_edges=leaf_edges,
        avg_closeness=closeness / n,
        clustering_coefficient=float(np.mean(local)),
        diameter=diameter,
        n_communities=len(set(label_propagation(g))),
    )


def write_feature_csv(path: str | Path, origins: Sequence[int], feats: Sequence[FeatureVector]) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(("origin",) + FEATURE_NAMES) + "\n")
        for o, f in zip(origins, feats):
            fh.write(",".join([str(o)] + [repr(float(x)) for x in astuple(f)]) + "\n")


def read_feature_csv(path: str | Path) -> tuple[list[int], np.ndarray]:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if tuple(header[1:]) != FEATURE_NAMES:
            raise ValueError(f"{path}: unexpected feature header")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    origins = [int(r[0]) for r in rows]
    X = np.array([[float(x) for x in r[1:]] for r in rows]).reshape(len(rows), len(FEATURE_NAMES))
    return origins, X


class SingularSystemError(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class RidgeModel:
    """Linear model on standardized features with an unpenalized intercept."""

    weights: np.ndarray
    intercept: float
    l2: float
    means: np.ndarray
    sds: np.ndarray

    @property
    def coef_raw(self) -> np.ndarray:
        return self.weights / self.sds

    @property
    def intercept_raw(self) -> float:
        return float(self.intercept - self.coef_raw @ self.means)

    def to_dict(self) -> dict:
        return {"weights": self.weights.tolist(), "intercept": self.intercept, "l2": self.l2,
                "means": self.means.tolist(), "sds": self.sds.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "RidgeModel":
        return cls(np.array(d["weights"], dtype=np.float64), float(d["intercept"]), float(d["l2"]),
                   np.array(d["means"], dtype=np.float64), np.array(d["sds"], dtype=np.float64))


def _ridge_system(X, y, eps: float):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 1 or X.shape[0] != len(y):
        raise ValueError("X must be (n_samples, n_features) matching y")
    means = X.mean(axis=0)
    sds = np.maximum(X.std(axis=0), eps)
    Z = (X - means) / sds
    ybar = float(y.mean())
    return Z, Z.T @ Z, Z.T @ (y - ybar), ybar, means, sds


def _ridge_solve(system, l2: float) -> RidgeModel:
    Z, gram, b, ybar, means, sds = system
    if l2 < 0:
        raise ValueError("l2 must be non-negative")
    if l2 == 0 and np.linalg.matrix_rank(Z) < Z.shape[1]:
        raise SingularSystemError("normal equations are singular; use l2 > 0")
    A = gram.copy()
    A[np.diag_indices_from(A)] += l2
    return RidgeModel(np.linalg.solve(A, b), ybar, float(l2), means, sds)


def ridge_fit(X, y, l2: float, eps: float = 1e-8) -> RidgeModel:
    """Closed-form ridge regression ``(Z^T Z + l2 I) w = Z^T (y - mean(y))``.

    ``Z`` is ``X`` standardized by its column means and sds (floored at
    ``eps``). With ``l2 == 0`` a rank-deficient system raises
    :class:`SingularSystemError`.
    """
    return _ridge_solve(_ridge_system(X, y, eps), l2)


def ridge_predict(model: RidgeModel, X) -> np.ndarray | float:
    X = np.asarray(X, dtype=np.float64)
    out = ((X - model.means) / model.sds) @ model.weights + model.intercept
    return float(out) if X.ndim == 1 else out


L2_GRID = tuple(10.0 ** -k for k in range(8))


def ridge_select(X_train, y_train, X_val, y_val, grid=L2_GRID) -> tuple[RidgeModel, list[tuple[float, float]]]:
    """Fit one model per ``l2`` in ``grid`` and keep the best on validation MSE.

    Ties keep the earlier (larger) coefficient.
    """
    system = _ridge_system(X_train, y_train, 1e-8)
    best, trace = None, []
    for l2 in grid:
        model = _ridge_solve(system, l2)
        val = float(np.mean((ridge_predict(model, X_val) - np.asarray(y_val)) ** 2))
        trace.append((l2, val))
        if best is None or val < best[1]:
            best = (model, val)
    return best[0], trace
