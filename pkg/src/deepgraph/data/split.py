"""Origin-disjoint temporal splits and zero-growth downsampling."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .instances import LabeledInstance, build_instances

SPLITS = ("train", "val", "test")


class SplitOrderError(ValueError):
    pass


@dataclass(frozen=True)
class SplitSpec:
    """Fractions of origins per split plus the ``(graph_time, growth_time)`` of each split.

    Graph times and growth times must both increase strictly from train to
    val to test, and every growth time must exceed its graph time.
    """

    graph_times: tuple[float, float, float]
    growth_times: tuple[float, float, float]
    fractions: tuple[float, float, float] = (0.8, 0.05, 0.15)
    seed: int = 0

    def __post_init__(self):
        if len(self.fractions) != 3 or any(f < 0 for f in self.fractions):
            raise ValueError("need three non-negative fractions")
        if abs(sum(self.fractions) - 1.0) > 1e-9:
            raise ValueError("split fractions must sum to 1")
        t, t2 = self.graph_times, self.growth_times
        if len(t) != 3 or len(t2) != 3:
            raise ValueError("need one graph time and one growth time per split")
        if not (t[0] < t[1] < t[2]):
            raise SplitOrderError(f"graph times must increase train < val < test, got {t}")
        if not (t2[0] < t2[1] < t2[2]):
            raise SplitOrderError(f"growth times must increase train < val < test, got {t2}")
        if any(b <= a for a, b in zip(t, t2)):
            raise SplitOrderError("each growth time must exceed its graph time")

    def to_dict(self) -> dict:
        return {"graph_times": list(self.graph_times), "growth_times": list(self.growth_times),
                "fractions": list(self.fractions), "seed": self.seed}

    @classmethod
    def from_dict(cls, d: dict) -> "SplitSpec":
        return cls(tuple(d["graph_times"]), tuple(d["growth_times"]), tuple(d.get("fractions", (0.8, 0.05, 0.15))),
                   int(d.get("seed", 0)))


def assign_origins(origins: Iterable[int], fractions: Sequence[float], seed: int) -> dict[str, list[int]]:
    """Seeded assignment of each distinct origin to exactly one split."""
    uniq = sorted(set(origins))
    u = np.random.default_rng(seed).random(len(uniq))
    edges = np.cumsum(fractions)[:-1]
    which = np.searchsorted(edges, u, side="right")
    return {name: [o for o, w in zip(uniq, which) if w == i] for i, name in enumerate(SPLITS)}


def temporal_split(el, spec: SplitSpec, k_hop: int | None = 1, target: str = "degree",
                   origins: Iterable[int] | None = None) -> dict[str, list[LabeledInstance]]:
    """Build train/val/test instances at their own times from disjoint origin sets.

    ``origins`` defaults to every node id appearing in ``el``. The result is
    checked by :func:`verify_split` before it is returned.
    """
    records = list(el)
    if origins is None:
        origins = {x for e in records for x in (e.src, e.dst)}
    groups = assign_origins(origins, spec.fractions, spec.seed)
    out = {}
    for i, name in enumerate(SPLITS):
        out[name] = build_instances(records, spec.graph_times[i], spec.growth_times[i], k_hop, target,
                                    origins=groups[name])
    verify_split(out)
    return out


def verify_split(splits: dict[str, Sequence[LabeledInstance]]) -> None:
    """Raise :class:`SplitOrderError` unless times are ordered across splits and origins are disjoint."""
    seen: dict[int, str] = {}
    prev = None
    for name in SPLITS:
        insts = splits.get(name, ())
        for x in insts:
            if not x.growth_time > x.graph_time:
                raise SplitOrderError(f"{name}: growth_time <= graph_time for origin {x.origin}")
            if seen.setdefault(x.origin, name) != name:
                raise SplitOrderError(f"origin {x.origin} appears in {seen[x.origin]} and {name}")
        if not insts:
            continue
        t = [x.graph_time for x in insts]
        t2 = [x.growth_time for x in insts]
        if prev is not None:
            pname, pt, pt2 = prev
            if not min(t) > pt:
                raise SplitOrderError(f"min graph_time of {name} must exceed max of {pname}")
            if not min(t2) > pt2:
                raise SplitOrderError(f"min growth_time of {name} must exceed max of {pname}")
        prev = (name, max(t), max(t2))


def downsample_zero_growth(instances: Sequence[LabeledInstance], fraction: float = 0.5,
                           seed: int = 0) -> list[LabeledInstance]:
    """Drop each zero-growth instance independently with probability ``fraction``."""
    if not 0.0 <= fraction <= 1.0:
        raise ValueError("fraction must lie in [0, 1]")
    u = np.random.default_rng(seed).random(len(instances))
    return [x for x, r in zip(instances, u) if x.raw_growth != 0 or r >= fraction]
