"""Undirected simple graphs built from temporal edge lists.

Graphs are immutable. Node ids are dense integers ``0..n-1``; the optional
``node_labels`` tuple maps each dense id back to the id it had in the source
edge list.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property
import math
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np


class EmptySnapshotError(ValueError):
    """Raised when no edge survives the snapshot-time filter."""


class TemporalEdge(NamedTuple):
    src: int
    dst: int
    timestamp: float


def _canonical(pairs: Iterable[tuple[int, int]]) -> tuple[tuple[int, int], ...]:
    out = set()
    for u, v in pairs:
        u, v = int(u), int(v)
        if u == v:
            continue
        out.add((u, v) if u < v else (v, u))
    return tuple(sorted(out))


@dataclass(frozen=True)
class Graph:
    """Binary undirected graph without self-loops or multi-edges.

    Use :meth:`from_pairs` to build one from arbitrary pairs; the plain
    constructor expects edges already canonical (``u < v``, sorted, unique).
    """

    n: int
    edges: tuple[tuple[int, int], ...]
    node_labels: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("node count must be non-negative")
        prev = None
        for e in self.edges:
            u, v = e
            if not (0 <= u < v < self.n):
                raise ValueError(f"edge {e} is not canonical for n={self.n}")
            if prev is not None and e <= prev:
                raise ValueError("edges must be sorted and unique")
            prev = e
        if self.node_labels is not None and len(self.node_labels) != self.n:
            raise ValueError("node_labels length must equal n")

    @classmethod
    def from_pairs(cls, n: int, pairs: Iterable[tuple[int, int]],
                   node_labels: Sequence[int] | None = None) -> "Graph":
        labels = tuple(int(x) for x in node_labels) if node_labels is not None else None
        return cls(int(n), _canonical(pairs), labels)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def neighbors(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return tuple(tuple(sorted(a)) for a in adj)

    def adjacency_matrix(self) -> np.ndarray:
        w = np.zeros((self.n, self.n))
        if self.edges:
            idx = np.asarray(self.edges)
            w[idx[:, 0], idx[:, 1]] = 1.0
            w[idx[:, 1], idx[:, 0]] = 1.0
        return w

    def edge_array(self) -> np.ndarray:
        return np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)


def from_edge_list(records: Iterable[TemporalEdge], snapshot_time: float) -> Graph:
    """Snapshot of all edges with ``timestamp <= snapshot_time``.

    Direction is dropped (an edge exists if either direction was recorded),
    self-loops are removed and nodes are re-indexed densely in sorted order of
    their original ids.
    """
    kept = [(int(r[0]), int(r[1])) for r in records
            if r[2] <= snapshot_time and int(r[0]) != int(r[1])]
    if not kept:
        raise EmptySnapshotError(f"no edges at or before time {snapshot_time}")
    ids = sorted({x for e in kept for x in e})
    index = {x: i for i, x in enumerate(ids)}
    return Graph.from_pairs(len(ids), ((index[u], index[v]) for u, v in kept), ids)


def degree_vector(g: Graph) -> np.ndarray:
    deg = np.zeros(g.n, dtype=np.int64)
    if g.edges:
        np.add.at(deg, g.edge_array().ravel(), 1)
    return deg


def bfs_distances(g: Graph, source: int, limit: int | None = None) -> dict[int, int]:
    """Hop distances from ``source``, optionally stopping at depth ``limit``."""
    dist = {source: 0}
    queue = deque([source])
    nbrs = g.neighbors
    while queue:
        u = queue.popleft()
        du = dist[u]
        if limit is not None and du >= limit:
            continue
        for v in nbrs[u]:
            if v not in dist:
                dist[v] = du + 1
                queue.append(v)
    return dist


def induced_subgraph(g: Graph, nodes: Iterable[int]) -> Graph:
    """Subgraph induced by ``nodes``, re-indexed in ascending order of old id."""
    keep = sorted(set(int(x) for x in nodes))
    index = {x: i for i, x in enumerate(keep)}
    pairs = [(index[u], index[v]) for u, v in g.edges if u in index and v in index]
    base = g.node_labels
    labels = [base[x] for x in keep] if base is not None else keep
    return Graph.from_pairs(len(keep), pairs, labels)


def k_hop_ego_net(g: Graph, center: int, k: int | None) -> Graph:
    """Induced subgraph on every node within ``k`` hops of ``center``.

    The center is included. ``k=None`` returns the whole connected component.
    """
    if not 0 <= center < g.n:
        raise IndexError(f"center {center} out of range for n={g.n}")
    if k is not None and k < 1:
        raise ValueError("k must be a positive integer")
    return induced_subgraph(g, bfs_distances(g, center, k))


def permute(g: Graph, perm: Sequence[int]) -> Graph:
    """Relabel node ``i`` as ``perm[i]``."""
    perm = [int(p) for p in perm]
    if len(perm) != g.n or sorted(perm) != list(range(g.n)):
        raise ValueError("perm must be a bijection on 0..n-1")
    labels = None
    if g.node_labels is not None:
        inv = [0] * g.n
        for i, p in enumerate(perm):
            inv[p] = i
        labels = [g.node_labels[inv[j]] for j in range(g.n)]
    return Graph.from_pairs(g.n, ((perm[u], perm[v]) for u, v in g.edges), labels)


def inverse_permutation(perm: Sequence[int]) -> list[int]:
    inv = [0] * len(perm)
    for i, p in enumerate(perm):
        inv[int(p)] = i
    return inv


def read_edge_list(path: str | Path) -> list[TemporalEdge]:
    """Parse ``src dst timestamp`` lines (tab or space separated, ``#`` comments)."""
    out = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected 3 fields, got {len(parts)}")
            src, dst, ts = int(parts[0]), int(parts[1]), float(parts[2])
            if src < 0 or dst < 0:
                raise ValueError(f"{path}:{lineno}: negative node id")
            if not math.isfinite(ts):
                raise ValueError(f"{path}:{lineno}: non-finite timestamp")
            out.append(TemporalEdge(src, dst, ts))
    return out


def _fmt_time(t: float) -> str:
    return str(int(t)) if float(t).is_integer() else repr(float(t))


def write_edge_list(path: str | Path, records: Iterable[TemporalEdge],
                    header: str | None = None) -> None:
    with open(path, "w") as fh:
        if header:
            for line in header.splitlines():
                fh.write(f"# {line}\n")
        for src, dst, ts in records:
            fh.write(f"{src}\t{dst}\t{_fmt_time(ts)}\n")
