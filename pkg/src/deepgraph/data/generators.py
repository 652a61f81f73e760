"""Seeded synthetic temporal graphs.

Timestamps are integers stored as floats. For preferential attachment a
node's arrival index is the timestamp of the edges it brings; for ER and WS
each edge's timestamp is its insertion index.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..graph import TemporalEdge


@dataclass
class TemporalEdgeList:
    edges: list[TemporalEdge]
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        ts = [e.timestamp for e in self.edges]
        if any(b < a for a, b in zip(ts, ts[1:])):
            raise ValueError("timestamps must be non-decreasing")

    def __len__(self):
        return len(self.edges)

    def __iter__(self):
        return iter(self.edges)

    @property
    def max_time(self) -> float:
        return self.edges[-1].timestamp if self.edges else 0.0

    def node_ids(self) -> list[int]:
        return sorted({x for e in self.edges for x in (e.src, e.dst)})


def generate_preferential_attachment(n_nodes: int, edges_per_node: int, seed: int) -> TemporalEdgeList:
    """Barabasi-Albert growth: node ``t`` links to ``edges_per_node`` distinct
    earlier nodes chosen proportionally to degree (all earlier nodes while
    there are too few)."""
    m = int(edges_per_node)
    if m < 1 or n_nodes <= m:
        raise ValueError("need edges_per_node >= 1 and n_nodes > edges_per_node")
    rng = np.random.default_rng(seed)
    repeated: list[int] = []
    edges = []
    for t in range(1, n_nodes):
        if t <= m:
            targets = list(range(t))
        else:
            chosen: set[int] = set()
            while len(chosen) < m:
                chosen.add(repeated[int(rng.integers(len(repeated)))])
            targets = sorted(chosen)
        for u in targets:
            edges.append(TemporalEdge(t, u, float(t)))
            repeated.extend((t, u))
    return TemporalEdgeList(edges, {"generator": "ba", "n_nodes": n_nodes,
                                    "edges_per_node": m, "seed": seed})


def generate_er(n: int, p: float, seed: int) -> TemporalEdgeList:
    """G(n, p) with edges inserted in lexicographic pair order."""
    if n < 2 or not 0.0 <= p <= 1.0:
        raise ValueError("need n >= 2 and 0 <= p <= 1")
    rng = np.random.default_rng(seed)
    iu, iv = np.triu_indices(n, 1)
    keep = rng.random(len(iu)) < p
    edges = [TemporalEdge(int(u), int(v), float(t))
             for t, (u, v) in enumerate(zip(iu[keep], iv[keep]))]
    return TemporalEdgeList(edges, {"generator": "er", "n": n, "p": p, "seed": seed})


def generate_ws(n: int, k: int, beta: float, seed: int) -> TemporalEdgeList:
    """Watts-Strogatz small world: ring lattice of even degree ``k``, each
    lattice edge rewired with probability ``beta`` to a uniform new endpoint."""
    if k < 2 or k % 2 or k >= n or not 0.0 <= beta <= 1.0:
        raise ValueError("need even 2 <= k < n and 0 <= beta <= 1")
    rng = np.random.default_rng(seed)
    order = [(u, (u + j) % n) for j in range(1, k // 2 + 1) for u in range(n)]
    present = {frozenset(e) for e in order}
    final = []
    for u, v in order:
        if rng.random() < beta:
            options = [w for w in range(n) if w != u and frozenset((u, w)) not in present]
            if options:
                w = options[int(rng.integers(len(options)))]
                present.discard(frozenset((u, v)))
                present.add(frozenset((u, w)))
                v = w
        final.append((u, v))
    edges = [TemporalEdge(u, v, float(t)) for t, (u, v) in enumerate(final)]
    return TemporalEdgeList(edges, {"generator": "ws", "n": n, "k": k, "beta": beta, "seed": seed})


GENERATORS = {"ba", "er", "ws"}


def generate(kind: str, seed: int, **params) -> TemporalEdgeList:
    if kind == "ba":
        return generate_preferential_attachment(params["n_nodes"], params["edges_per_node"], seed)
    if kind == "er":
        return generate_er(params["n_nodes"], params["p"], seed)
    if kind == "ws":
        return generate_ws(params["n_nodes"], params["k"], params["beta"], seed)
    raise ValueError(f"unknown generator {kind!r}")
