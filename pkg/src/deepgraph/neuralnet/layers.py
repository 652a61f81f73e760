"""Multiresolution 1-D convolution (MrConv).

An MrConv layer slides filters of several window sizes down the rows of its
input. Each filter of size ``m`` sees ``m`` consecutive rows flattened
row-major into one vector, so an ``(n, k)`` input gives ``n - m + 1``
outputs per filter. Outputs of all sizes are stacked row-wise, giving a
``(sum_m (n - m + 1), d)`` feature map for ``d`` filters per size.

Everything here is batched over a leading axis.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


@dataclass
class MrConvLayer:
    """One MrConv layer: ``weights[s]`` has shape ``(m_s * k, d)``."""

    filter_sizes: tuple[int, ...]
    weights: list[np.ndarray] = field(default_factory=list)
    biases: list[np.ndarray] = field(default_factory=list)

    @property
    def n_filters(self) -> int:
        return self.weights[0].shape[1]


def output_rows(n_rows: int, filter_sizes) -> int:
    return sum(n_rows - m + 1 for m in filter_sizes)


def _windows(x: np.ndarray, m: int) -> np.ndarray:
    # (B, n, k) -> (B*(n-m+1), m*k), window rows concatenated in order
    B, n, k = x.shape
    win = sliding_window_view(x, m, axis=1)  # (B, P, k, m)
    return np.ascontiguousarray(win.transpose(0, 1, 3, 2)).reshape(B * (n - m + 1), m * k)


def _offset_weights(weights, filter_sizes, k: int) -> list[np.ndarray]:
    """Regroup weights by window offset: entry ``j`` stacks, column-wise, the
    ``(k, d)`` block that every filter with ``m > j`` applies to row ``j`` of
    its window."""
    return [np.concatenate([W[j * k:(j + 1) * k] for m, W in zip(filter_sizes, weights) if m > j], axis=1)
            for j in range(max(filter_sizes))]


def mrconv_forward_batch(x: np.ndarray, weights, biases, filter_sizes):
    """Forward pass on a batch ``x`` of shape ``(B, n, k)``.

    Returns the ``tanh`` feature maps ``(B, rows, d)`` and a cache for
    :func:`mrconv_backward_batch`. Instead of materializing windows, row
    ``j`` of every window is handled by one product ``x @ W_j`` whose
    shifted slices are summed.
    """
    if x.ndim != 3:
        raise ValueError("expected a (batch, rows, cols) array")
    B, n, k = x.shape
    if max(filter_sizes) > n:
        raise ValueError(f"input has {n} rows, too short for filter size {max(filter_sizes)}")
    d = weights[0].shape[1]
    x2 = x.reshape(B * n, k)
    Y = [(x2 @ Wj).reshape(B, n, -1) for Wj in _offset_weights(weights, filter_sizes, k)]
    out = np.empty((B, output_rows(n, filter_sizes), d))
    start = 0
    for s, (m, b) in enumerate(zip(filter_sizes, biases)):
        P = n - m + 1
        view = out[:, start:start + P, :]
        np.add(Y[0][:, 0:P, s * d:(s + 1) * d], b, out=view)
        for j in range(1, m):
            c = sum(1 for mm in filter_sizes[:s] if mm > j) * d
            view += Y[j][:, j:j + P, c:c + d]
        start += P
    np.tanh(out, out=out)
    return out, (x.shape, x2, out)


def mrconv_backward_batch(dout: np.ndarray, cache, weights, filter_sizes, need_dx: bool = True):
    """Gradients ``(dx, dweights, dbiases)`` given ``dL/d(output)``.

    ``dx`` is ``None`` when ``need_dx`` is false (first layer of a column).
    """
    (B, n, k), x2, out = cache
    d = weights[0].shape[1]
    dpre_all = dout * (1.0 - out * out)
    widths = [sum(1 for m in filter_sizes if m > j) * d for j in range(max(filter_sizes))]
    dY = [np.zeros((B, n, w)) for w in widths]
    dbs = []
    start = 0
    for s, m in enumerate(filter_sizes):
        P = n - m + 1
        dp = dpre_all[:, start:start + P, :]
        start += P
        dbs.append(dp.sum(axis=(0, 1)))
        for j in range(m):
            c = sum(1 for mm in filter_sizes[:s] if mm > j) * d
            dY[j][:, j:j + P, c:c + d] = dp
    dWj = [x2.T @ g.reshape(B * n, -1) for g in dY]
    dWs = []
    for s, m in enumerate(filter_sizes):
        blocks = []
        for j in range(m):
            c = sum(1 for mm in filter_sizes[:s] if mm > j) * d
            blocks.append(dWj[j][:, c:c + d])
        dWs.append(np.concatenate(blocks, axis=0))
    dx = None
    if need_dx:
        Wj = _offset_weights(weights, filter_sizes, k)
        dx = sum(g.reshape(B * n, -1) @ W.T for g, W in zip(dY, Wj)).reshape(B, n, k)
    return dx, dWs, dbs


def mrconv_forward_im2col(x: np.ndarray, weights, biases, filter_sizes) -> np.ndarray:
    """Reference forward pass that materializes every window (slow, for testing)."""
    B, n, _ = x.shape
    outs = []
    for m, W, b in zip(filter_sizes, weights, biases):
        outs.append(np.tanh(_windows(x, m) @ W + b).reshape(B, n - m + 1, -1))
    return np.concatenate(outs, axis=1)


def mrconv_forward(x: np.ndarray, layer: MrConvLayer) -> np.ndarray:
    """Single-input convenience wrapper: ``(n, k) -> (rows, d)``."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("expected a 2-D input matrix")
    out, _ = mrconv_forward_batch(x[None], layer.weights, layer.biases, layer.filter_sizes)
    return out[0]
