"""Supervised instances: ego-net snapshots labelled with future growth."""
from __future__ import annotations

import csv
from dataclasses import dataclass
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ..graph import Graph, bfs_distances, degree_vector, from_edge_list, k_hop_ego_net, EmptySnapshotError

TARGETS = ("degree", "size")


@dataclass(frozen=True)
class LabeledInstance:
    graph: Graph
    raw_growth: float
    scaled_label: float
    graph_time: float
    growth_time: float
    origin: int

    def __post_init__(self):
        if not self.growth_time > self.graph_time:
            raise ValueError("growth_time must be later than graph_time")
        if self.raw_growth < 0:
            raise ValueError("raw_growth must be non-negative")
        if self.scaled_label != scale_label(self.raw_growth):
            raise ValueError("scaled_label must equal log2(raw_growth + 1)")


def scale_label(raw: float) -> float:
    return math.log2(raw + 1.0)


def _snapshot_index(g: Graph) -> dict[int, int]:
    return {lab: i for i, lab in enumerate(g.node_labels)}


def build_instances(el: Iterable, graph_time: float, growth_time: float, k_hop: int | None = 1,
                    target: str = "degree", origins: Iterable[int] | None = None) -> list[LabeledInstance]:
    """One instance per node present at ``graph_time`` (sorted by node id).

    ``target="degree"`` measures new neighbours of the ego; ``target="size"``
    measures growth in the number of nodes of its ``k_hop`` neighbourhood.
    Growth is floored at zero. ``origins`` restricts the egos considered.
    """
    if target not in TARGETS:
        raise ValueError(f"target must be one of {TARGETS}")
    if not growth_time > graph_time:
        raise ValueError("growth_time must be later than graph_time")
    records = list(el)
    try:
        g0 = from_edge_list(records, graph_time)
    except EmptySnapshotError:
        return []
    g1 = from_edge_list(records, growth_time)
    idx1 = _snapshot_index(g1)
    keep = None if origins is None else set(origins)
    deg0 = degree_vector(g0) if target == "degree" else None
    deg1 = degree_vector(g1) if target == "degree" else None
    out = []
    for i0, label in enumerate(g0.node_labels):
        if keep is not None and label not in keep:
            continue
        ego = k_hop_ego_net(g0, i0, k_hop)
        i1 = idx1[label]
        if target == "degree":
            raw = int(deg1[i1]) - int(deg0[i0])
        else:
            raw = len(bfs_distances(g1, i1, k_hop)) - ego.n
        raw = float(max(raw, 0))
        out.append(LabeledInstance(ego, raw, scale_label(raw), float(graph_time), float(growth_time), int(label)))
    return out


def instances_from_labels(el: Iterable, rows: Sequence[tuple[int, float, float, float]],
                          k_hop: int | None = 1) -> list[LabeledInstance]:
    """Instances for externally supplied labels ``(origin, graph_time, growth_time, raw_growth)``.

    Rows whose origin is absent at its graph time are skipped.
    """
    records = list(el)
    snaps: dict[float, tuple[Graph, dict]] = {}
    out = []
    for origin, t, t2, raw in rows:
        if t not in snaps:
            try:
                g = from_edge_list(records, t)
                snaps[t] = (g, _snapshot_index(g))
            except EmptySnapshotError:
                snaps[t] = (None, {})
        g, idx = snaps[t]
        if origin not in idx:
            continue
        raw = float(max(raw, 0.0))
        out.append(LabeledInstance(k_hop_ego_net(g, idx[origin], k_hop), raw, scale_label(raw),
                                   float(t), float(t2), int(origin)))
    return out


LABEL_HEADER = ("origin_id", "graph_time", "growth_time", "raw_growth")


def read_label_file(path: str | Path) -> list[tuple[int, float, float, float]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(h.strip() for h in next(reader))
        if header != LABEL_HEADER:
            raise ValueError(f"{path}: expected header {','.join(LABEL_HEADER)}")
        rows = []
        for line in reader:
            if not line:
                continue
            o, t, t2, y = (s.strip() for s in line)
            rows.append((int(o), float(t), float(t2), float(y)))
    return rows


INSTANCE_HEADER = ("origin", "graph_time", "growth_time", "raw_growth", "scaled_label", "n_nodes", "n_edges")


def write_instance_csv(path: str | Path, instances: Sequence[LabeledInstance]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(INSTANCE_HEADER) + "\n")
        for x in instances:
            fh.write(f"{x.origin},{x.graph_time!r},{x.growth_time!r},{x.raw_growth!r},"
                     f"{x.scaled_label!r},{x.graph.n},{x.graph.n_edges}\n")


def read_instance_csv(path: str | Path) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != INSTANCE_HEADER:
            raise ValueError(f"{path}: unexpected instance header")
        return [{"origin": int(r["origin"]), "graph_time": float(r["graph_time"]),
                 "growth_time": float(r["growth_time"]), "raw_growth": float(r["raw_growth"]),
                 "scaled_label": float(r["scaled_label"])} for r in reader]


def labels_of(instances: Sequence[LabeledInstance]) -> np.ndarray:
    return np.array([x.scaled_label for x in instances], dtype=np.float64)
