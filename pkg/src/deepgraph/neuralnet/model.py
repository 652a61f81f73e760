"""Multicolumn multiresolution convolutional regressor.

Two columns read the same normalized descriptor: the ``bins`` column
convolves along histogram bins (rows = bins), the ``time`` column along
diffusion steps (it sees the transpose). Column feature maps are flattened
row-major, concatenated in column order, and fed through TanH dense layers
with inverted dropout and a final linear unit.

Leaving out columns gives the simpler variants: no columns is an MLP on the
flattened descriptor, a single ``bins`` column with one filter size is a
plain CNN.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
import math

import numpy as np

from .layers import mrconv_backward_batch, mrconv_forward_batch, output_rows

COLUMNS = ("bins", "time")


@dataclass(frozen=True)
class Architecture:
    n_bins: int = 64
    n_steps: int = 64
    columns: tuple[str, ...] = COLUMNS
    filter_sizes: tuple[int, ...] = (2, 4, 6)
    conv_filters: tuple[int, ...] = (32, 16)
    dense_sizes: tuple[int, ...] = (256, 256)
    dropout: float = 0.5

    def __post_init__(self):
        for c in self.columns:
            if c not in COLUMNS:
                raise ValueError(f"unknown column {c!r}")
        if len(set(self.columns)) != len(self.columns):
            raise ValueError("duplicate column")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must be in [0, 1)")
        if any(m < 1 for m in self.filter_sizes) or any(d < 1 for d in self.conv_filters):
            raise ValueError("filter sizes and counts must be positive")
        if self.columns and not self.filter_sizes:
            raise ValueError("conv columns need at least one filter size")
        for c in self.columns:
            rows = self.n_bins if c == "bins" else self.n_steps
            for _ in self.conv_filters:
                if max(self.filter_sizes) > rows:
                    raise ValueError(f"column {c!r}: filter size {max(self.filter_sizes)} exceeds {rows} rows")
                rows = output_rows(rows, self.filter_sizes)

    def to_dict(self) -> dict:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self).items()}

    @classmethod
    def from_dict(cls, d: dict) -> "Architecture":
        return cls(**{k: tuple(v) if isinstance(v, list) else v for k, v in d.items()})

    def column_shapes(self, column: str) -> list[tuple[int, int]]:
        """(rows, cols) of the input to each conv layer plus the final map."""
        rows, cols = (self.n_bins, self.n_steps) if column == "bins" else (self.n_steps, self.n_bins)
        shapes = [(rows, cols)]
        for d in self.conv_filters:
            rows, cols = output_rows(rows, self.filter_sizes), d
            shapes.append((rows, cols))
        return shapes

    @property
    def n_features(self) -> int:
        if not self.columns:
            return self.n_bins * self.n_steps
        return sum(r * c for r, c in (self.column_shapes(col)[-1] for col in self.columns))

    def param_shapes(self) -> dict[str, tuple[int, ...]]:
        shapes: dict[str, tuple[int, ...]] = {}
        for col in self.columns:
            layer_in = self.column_shapes(col)
            for li, d in enumerate(self.conv_filters):
                k = layer_in[li][1]
                for m in self.filter_sizes:
                    shapes[f"{col}.conv{li}.m{m}.W"] = (m * k, d)
                    shapes[f"{col}.conv{li}.m{m}.b"] = (d,)
        width = self.n_features
        for i, h in enumerate(self.dense_sizes, 1):
            shapes[f"dense{i}.W"] = (width, h)
            shapes[f"dense{i}.b"] = (h,)
            width = h
        shapes["out.W"] = (width, 1)
        shapes["out.b"] = (1,)
        return shapes


def is_weight(name: str) -> bool:
    return name.endswith(".W")


class McMrConvModel:
    """Parameters live in ``self.params``, an insertion-ordered dict."""

    def __init__(self, arch: Architecture, params: dict[str, np.ndarray]):
        expected = arch.param_shapes()
        if list(params) != list(expected):
            raise ValueError("parameter names/order do not match the architecture")
        for name, shape in expected.items():
            if params[name].shape != shape:
                raise ValueError(f"{name}: shape {params[name].shape} != {shape}")
        self.arch = arch
        self.params = params

    @classmethod
    def init(cls, arch: Architecture, rng: np.random.Generator, paper_init: bool = False) -> "McMrConvModel":
        """Gaussian weights with sd ``1/sqrt(fan_in)`` (or 1 with ``paper_init``), zero biases."""
        params = {}
        for name, shape in arch.param_shapes().items():
            if is_weight(name):
                sd = 1.0 if paper_init else 1.0 / math.sqrt(shape[0])
                params[name] = rng.normal(0.0, sd, size=shape)
            else:
                params[name] = np.zeros(shape)
        return cls(arch, params)

    @classmethod
    def zeros(cls, arch: Architecture) -> "McMrConvModel":
        return cls(arch, {k: np.zeros(s) for k, s in arch.param_shapes().items()})

    def copy(self) -> "McMrConvModel":
        return McMrConvModel(self.arch, {k: v.copy() for k, v in self.params.items()})

    def n_parameters(self) -> int:
        return sum(v.size for v in self.params.values())

    # -- forward / backward -------------------------------------------------

    def _conv(self, col, li):
        p = self.params
        ms = self.arch.filter_sizes
        return ([p[f"{col}.conv{li}.m{m}.W"] for m in ms], [p[f"{col}.conv{li}.m{m}.b"] for m in ms])

    def forward(self, X: np.ndarray, train: bool = False, rng: np.random.Generator | None = None,
                masks: list[np.ndarray] | None = None):
        """Predictions ``(B,)`` and the activation cache.

        In train mode dropout masks are taken from ``masks`` if given, else
        drawn from ``rng``; eval mode is deterministic.
        """
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 2:
            X = X[None]
        a = self.arch
        if X.shape[1:] != (a.n_bins, a.n_steps):
            raise ValueError(f"descriptor shape {X.shape[1:]} != {(a.n_bins, a.n_steps)}")
        B = X.shape[0]
        cache = {"B": B, "conv": {}}
        feats = []
        for col in a.columns:
            h = X if col == "bins" else np.ascontiguousarray(X.transpose(0, 2, 1))
            layer_caches = []
            for li in range(len(a.conv_filters)):
                Ws, bs = self._conv(col, li)
                h, c = mrconv_forward_batch(h, Ws, bs, a.filter_sizes)
                layer_caches.append(c)
            cache["conv"][col] = (layer_caches, h.shape)
            feats.append(h.reshape(B, -1))
        F = np.concatenate(feats, axis=1) if feats else X.reshape(B, -1)
        cache["F"] = F
        p = self.params
        hidden, used_masks = [], []
        h = F
        for i in range(1, len(a.dense_sizes) + 1):
            act = np.tanh(h @ p[f"dense{i}.W"] + p[f"dense{i}.b"])
            if train and a.dropout > 0:
                if masks is not None:
                    mask = masks[i - 1]
                else:
                    keep = rng.random(act.shape) >= a.dropout
                    mask = keep / (1.0 - a.dropout)
                used_masks.append(mask)
                h = act * mask
            else:
                used_masks.append(None)
                h = act
            hidden.append((act, h))
        y = (h @ p["out.W"] + p["out.b"])[:, 0]
        cache["hidden"] = hidden
        cache["masks"] = used_masks
        return y, cache

    def backward(self, cache, dy: np.ndarray) -> dict[str, np.ndarray]:
        """Parameter gradients given ``dL/dy`` of shape ``(B,)``."""
        a = self.arch
        p = self.params
        grads: dict[str, np.ndarray] = {}
        hidden = cache["hidden"]
        F = cache["F"]
        g = dy[:, None]
        last = hidden[-1][1] if hidden else F
        grads["out.W"] = last.T @ g
        grads["out.b"] = g.sum(axis=0)
        g = g @ p["out.W"].T
        for i in range(len(a.dense_sizes), 0, -1):
            act, _ = hidden[i - 1]
            mask = cache["masks"][i - 1]
            if mask is not None:
                g = g * mask
            g = g * (1.0 - act * act)
            below = hidden[i - 2][1] if i > 1 else F
            grads[f"dense{i}.W"] = below.T @ g
            grads[f"dense{i}.b"] = g.sum(axis=0)
            g = g @ p[f"dense{i}.W"].T
        offset = 0
        for col in a.columns:
            layer_caches, shape = cache["conv"][col]
            size = shape[1] * shape[2]
            gc = g[:, offset:offset + size].reshape(shape)
            offset += size
            for li in range(len(a.conv_filters) - 1, -1, -1):
                Ws, _ = self._conv(col, li)
                gc, dWs, dbs = mrconv_backward_batch(gc, layer_caches[li], Ws, a.filter_sizes, need_dx=li > 0)
                for m, dW, db in zip(a.filter_sizes, dWs, dbs):
                    grads[f"{col}.conv{li}.m{m}.W"] = dW
                    grads[f"{col}.conv{li}.m{m}.b"] = db
        return {k: grads[k] for k in p}

    # -- loss -----------------------------------------------------------------

    def l2_penalty(self, l2: float) -> float:
        return l2 * sum(float(np.vdot(v, v)) for k, v in self.params.items() if is_weight(k))

    def loss(self, X, y, l2: float = 0.0, train: bool = False, rng=None, masks=None) -> float:
        y = np.asarray(y, dtype=np.float64)
        if y.size == 0:
            raise ValueError("empty batch")
        pred, _ = self.forward(X, train=train, rng=rng, masks=masks)
        return float(np.mean((pred - y) ** 2)) + self.l2_penalty(l2)

    def loss_and_grad(self, X, y, l2: float = 0.0, train: bool = True, rng=None, masks=None):
        """Returns ``(total_loss, data_mse, grads, cache)``."""
        y = np.asarray(y, dtype=np.float64)
        pred, cache = self.forward(X, train=train, rng=rng, masks=masks)
        resid = pred - y
        mse = float(np.mean(resid * resid))
        grads = self.backward(cache, 2.0 * resid / len(y))
        if l2:
            for k in grads:
                if is_weight(k):
                    grads[k] += 2.0 * l2 * self.params[k]
        return mse + self.l2_penalty(l2), mse, grads, cache

    def predict(self, X: np.ndarray, batch_size: int = 256) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 2:
            X = X[None]
        out = [self.forward(X[i:i + batch_size])[0] for i in range(0, len(X), batch_size)]
        return np.concatenate(out) if out else np.zeros(0)


def model_forward(descriptor: np.ndarray, model: McMrConvModel, mode: str = "eval",
                  rng: np.random.Generator | None = None):
    """Scalar prediction for one descriptor plus its activation cache."""
    if mode not in ("train", "eval"):
        raise ValueError("mode must be 'train' or 'eval'")
    y, cache = model.forward(descriptor, train=mode == "train", rng=rng)
    return float(y[0]), cache
