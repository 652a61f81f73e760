from __future__ import annotations

from dataclasses import dataclass, field
import logging
import math

import numpy as np

from ..errors import TrainingDivergedError
from .adam import AdamState, adam_step
from .model import Architecture, McMrConvModel

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.005
    l2: float = 1e-5
    batch_size: int = 64
    max_epochs: int = 500
    patience: int = 20
    seed: int = 0
    paper_init: bool = False

    def __post_init__(self):
        if self.learning_rate <= 0 or self.l2 < 0:
            raise ValueError("learning_rate must be positive and l2 non-negative")
        if self.batch_size < 1 or self.max_epochs < 1 or self.patience < 1:
            raise ValueError("batch_size, max_epochs and patience must be positive")


@dataclass
class TrainResult:
    model: McMrConvModel
    history: list[tuple[int, float, float]] = field(default_factory=list)
    best_epoch: int = 0
    best_val_mse: float = math.inf


def _check_finite(value, model, epoch, batch):
    if not math.isfinite(value):
        worst = max(float(np.max(np.abs(p))) if np.all(np.isfinite(p)) else math.inf
                    for p in model.params.values())
        raise TrainingDivergedError(
            f"non-finite loss at epoch {epoch}, batch {batch} (max |param| = {worst:.3g}); "
            "try a smaller learning rate")


def train(train_X, train_y, val_X, val_y, arch: Architecture, config: TrainConfig,
          model: McMrConvModel | None = None) -> TrainResult:
    """Mini-batch Adam with per-epoch validation and early stopping.

    The returned model carries the parameters of the epoch with the lowest
    validation MSE. Runs are bit-reproducible for a fixed ``config.seed``.
    """
    train_X = np.asarray(train_X, dtype=np.float64)
    train_y = np.asarray(train_y, dtype=np.float64)
    val_X = np.asarray(val_X, dtype=np.float64)
    val_y = np.asarray(val_y, dtype=np.float64)
    if len(train_X) == 0 or len(val_X) == 0:
        raise ValueError("training and validation sets must be non-empty")
    init_rng, shuffle_rng, drop_rng = (np.random.default_rng(s)
                                       for s in np.random.SeedSequence(config.seed).spawn(3))
    if model is None:
        model = McMrConvModel.init(arch, init_rng, paper_init=config.paper_init)
    state = AdamState.create(model.params, config.learning_rate)
    result = TrainResult(model.copy())
    n = len(train_X)
    bad = 0
    for epoch in range(1, config.max_epochs + 1):
        order = shuffle_rng.permutation(n)
        total = 0.0
        for bi, start in enumerate(range(0, n, config.batch_size)):
            idx = order[start:start + config.batch_size]
            loss, mse, grads, _ = model.loss_and_grad(train_X[idx], train_y[idx], config.l2,
                                                      train=True, rng=drop_rng)
            _check_finite(loss, model, epoch, bi)
            adam_step(state, model.params, grads)
            total += mse * len(idx)
        train_mse = total / n
        val_mse = float(np.mean((model.predict(val_X) - val_y) ** 2))
        _check_finite(val_mse, model, epoch, -1)
        result.history.append((epoch, train_mse, val_mse))
        log.info("epoch %d train_mse %.5f val_mse %.5f", epoch, train_mse, val_mse)
        if val_mse < result.best_val_mse:
            result.best_val_mse = val_mse
            result.best_epoch = epoch
            result.model = model.copy()
            bad = 0
        else:
            bad += 1
            if bad >= config.patience:
                break
    return result


@dataclass
class GradientReport:
    max_rel_error: float
    per_group: dict[str, float]

    def passed(self, tolerance: float) -> bool:
        return self.max_rel_error < tolerance


def numeric_gradient(f, x: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Central differences of scalar ``f()`` with respect to array ``x`` (perturbed in place)."""
    g = np.zeros_like(x)
    flat = x.reshape(-1)
    gf = g.reshape(-1)
    for i in range(flat.size):
        old = flat[i]
        flat[i] = old + h
        fp = f()
        flat[i] = old - h
        fm = f()
        flat[i] = old
        gf[i] = (fp - fm) / (2.0 * h)
    return g


def check_gradients(arch: Architecture, seed: int = 0, l2: float = 1e-3, batch: int = 3,
                    h: float = 1e-5, train_mode: bool = True) -> GradientReport:
    """Compare backprop against central differences on every parameter.

    The error for a parameter group is ``max|analytic - numeric|`` divided by
    the larger of the two gradients' max-norms; dropout masks are frozen so
    the loss is a deterministic function of the parameters.
    """
    rng = np.random.default_rng(seed)
    model = McMrConvModel.init(arch, rng)
    for k, v in model.params.items():
        if not k.endswith(".W"):
            v += rng.normal(0.0, 0.1, size=v.shape)
    X = rng.normal(size=(batch, arch.n_bins, arch.n_steps))
    y = rng.normal(size=batch)
    masks = None
    if train_mode and arch.dropout > 0:
        masks = [(rng.random((batch, s)) >= arch.dropout) / (1.0 - arch.dropout) for s in arch.dense_sizes]
    _, _, grads, _ = model.loss_and_grad(X, y, l2, train=train_mode, masks=masks)
    per_group = {}
    for name, p in model.params.items():
        num = numeric_gradient(lambda: model.loss(X, y, l2, train=train_mode, masks=masks), p, h)
        scale = max(np.max(np.abs(num)), np.max(np.abs(grads[name])), 1e-12)
        per_group[name] = float(np.max(np.abs(num - grads[name])) / scale)
    return GradientReport(max(per_group.values()), per_group)
