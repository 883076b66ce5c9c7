"""MAE loss, mini-batch training loop, and finite-difference checks."""

from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionMismatch, DivergedLoss, EmptyTraining
from .optim import AdamState, adam_step


def mae_loss(pred, target):
    """Mean absolute error and its subgradient wrt pred (sign(0) = 0)."""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise DimensionMismatch(f"{pred.shape} vs {target.shape}")
    diff = pred - target
    loss = float(np.mean(np.abs(diff)))
    grad = np.sign(diff) / diff.size
    return loss, grad


@dataclass
class TrainHistory:
    train_loss: list = field(default_factory=list)
    val_mae: list = field(default_factory=list)
    best_epoch: int = -1
    best_val_mae: float = float("inf")


def evaluate_mae(model, x, y):
    loss, _ = mae_loss(model.predict(x), y)
    return loss


def train(model, x_train, y_train, x_val=None, y_val=None, early_stopping=True):
    """Mini-batch Adam on MAE with seeded shuffling and dropout masks.

    With early stopping and validation data, the parameters from the
    best-validation-MAE epoch are restored at the end; otherwise the
    final parameters stand. Returns a TrainHistory.
    """
    x_train = np.asarray(x_train, dtype=np.float64)
    y_train = np.asarray(y_train, dtype=np.float64)
    if len(x_train) == 0:
        raise EmptyTraining("no training samples")

    cfg = model.config
    rng = np.random.default_rng(cfg.seed)
    state = AdamState(learning_rate=cfg.learning_rate)
    history = TrainHistory()
    best = None

    n = len(x_train)
    batch = min(cfg.batch_size, n)
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        losses = []
        for start in range(0, n, batch):
            idx = order[start:start + batch]
            model.zero_grad()
            pred = model.forward(x_train[idx], train=True, rng=rng)
            loss, dpred = mae_loss(pred, y_train[idx])
            if not np.isfinite(loss):
                raise DivergedLoss(f"training loss became {loss} at epoch {epoch}")
            model.backward(dpred)
            adam_step(model.params(), model.grads(), state)
            losses.append(loss)
        history.train_loss.append(float(np.mean(losses)))

        if x_val is not None and len(x_val):
            val = evaluate_mae(model, x_val, y_val)
            history.val_mae.append(val)
            if val < history.best_val_mae:
                history.best_val_mae = val
                history.best_epoch = epoch
                if early_stopping:
                    best = model.snapshot()

    if best is not None:
        model.set_params(best)
    return history


def gradient_check(model, x, y, eps=1e-5, param_limit=None, rng=None):
    """Max relative error between analytic and central-difference grads.

    Dropout is off (inference-path forward with gradients). Targets are
    nudged away from the |.| kink so the finite difference is valid. If
    param_limit is set, at most that many randomly chosen coordinates
    are checked per parameter array.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).copy()
    if rng is None:
        rng = np.random.default_rng(0)

    pred = model.forward(x)
    near_kink = np.abs(pred - y) < 1e-7
    y[near_kink] += 1e-3

    model.zero_grad()
    pred = model.forward(x)
    _, dpred = mae_loss(pred, y)
    model.backward(dpred)
    analytic = {k: g.copy() for k, g in model.grads().items()}

    def loss_at():
        loss, _ = mae_loss(model.forward(x), y)
        return loss

    worst = 0.0
    params = model.params()
    for name, p in params.items():
        flat = p.reshape(-1)
        coords = np.arange(flat.size)
        if param_limit is not None and flat.size > param_limit:
            coords = rng.choice(flat.size, size=param_limit, replace=False)
        a_flat = analytic[name].reshape(-1)
        for j in coords:
            orig = flat[j]
            flat[j] = orig + eps
            up = loss_at()
            flat[j] = orig - eps
            down = loss_at()
            flat[j] = orig
            numeric = (up - down) / (2.0 * eps)
            denom = max(abs(numeric), abs(a_flat[j]))
            if denom < 1e-7:  # both effectively zero: float noise, not error
                continue
            worst = max(worst, abs(numeric - a_flat[j]) / denom)
    return worst
