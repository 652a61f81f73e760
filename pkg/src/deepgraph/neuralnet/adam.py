from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import _kernels


@dataclass
class AdamState:
    """First/second moment estimates per parameter, updated in place."""

    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)

    @classmethod
    def create(cls, params: dict[str, np.ndarray], learning_rate: float, **kw) -> "AdamState":
        return cls(learning_rate=learning_rate,
                   m={k: np.zeros_like(p) for k, p in params.items()},
                   v={k: np.zeros_like(p) for k, p in params.items()}, **kw)


def adam_step(state: AdamState, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]):
    """One bias-corrected Adam update; mutates and returns ``(params, state)``."""
    state.step += 1
    t = state.step
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1 ** t
    c2 = 1.0 - b2 ** t
    for k, p in params.items():
        g = grads[k]
        if g.shape != p.shape:
            raise ValueError(f"{k}: gradient shape {g.shape} != parameter shape {p.shape}")
        if not p.flags.c_contiguous:
            raise ValueError(f"{k}: parameters must be C-contiguous")
        _kernels.adam_update(p.reshape(-1), np.ascontiguousarray(g, dtype=np.float64).reshape(-1),
                             state.m[k].reshape(-1), state.v[k].reshape(-1),
                             state.learning_rate, b1, b2, state.eps, c1, c2)
    return params, state
