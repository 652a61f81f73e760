from __future__ import annotations

import numpy as np


def mse(predictions, truths) -> float:
    """Mean squared error of two equal-length vectors."""
    p = np.asarray(predictions, dtype=np.float64).ravel()
    t = np.asarray(truths, dtype=np.float64).ravel()
    if len(p) != len(t):
        raise ValueError(f"length mismatch: {len(p)} predictions vs {len(t)} truths")
    if len(p) == 0:
        raise ValueError("need at least one prediction")
    d = p - t
    return float(np.dot(d, d) / len(d))
