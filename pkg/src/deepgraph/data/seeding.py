"""Per-stage seeds derived from one root seed.

Stage ``i`` of ``STAGES`` receives the ``i``-th child of
``SeedSequence(root)``, so adding a stage at the end never changes the seeds
of existing stages.
"""
from __future__ import annotations

import numpy as np

STAGES = ("generate", "split", "downsample", "features", "train")


def stage_seed(root: int, stage: str) -> int:
    if stage not in STAGES:
        raise ValueError(f"unknown stage {stage!r}")
    child = np.random.SeedSequence(int(root)).spawn(len(STAGES))[STAGES.index(stage)]
    return int(child.generate_state(1, dtype=np.uint32)[0])
