"""Compact CNN in plain numpy: three conv/ReLU/max-pool stages, two dense layers, softmax.

Tensors are NHWC.  Convolutions are 3x3, stride 1, zero "same" padding, done
as im2col matrix products.  The forward pass pads every matrix product to a
multiple of 64 rows so that a sample's output does not depend on which batch
it travels in.
"""

from __future__ import annotations

import copy
import logging
import math
from dataclasses import asdict, dataclass

import numpy as np

log = logging.getLogger(__name__)

_ROW_BLOCK = 64


class TrainingDiverged(RuntimeError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 32
    learning_rate: float = 0.001
    max_epochs: int = 50
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    patience: int = 10
    lr_decay: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.batch_size < 1 or self.max_epochs < 1 or self.patience < 1:
            raise ValueError("batch_size, max_epochs and patience must be positive")
        if self.learning_rate < 0 or not 0 < self.lr_decay <= 1:
            raise ValueError("learning_rate must be >= 0 and lr_decay in (0, 1]")
        if self.patience >= self.max_epochs:
            raise ValueError("patience must be smaller than max_epochs")


def _mm(a, b):
    m = a.shape[0]
    pad = (-m) % _ROW_BLOCK
    if pad:
        a = np.concatenate([a, np.zeros((pad, a.shape[1]), a.dtype)])
    return (a @ b)[:m]


def _im2col(x):
    b, h, w, c = x.shape
    xp = np.zeros((b, h + 2, w + 2, c), x.dtype)
    xp[:, 1:-1, 1:-1] = x
    cols = np.empty((b, h, w, 3, 3, c), x.dtype)
    for i in range(3):
        for j in range(3):
            cols[:, :, :, i, j] = xp[:, i : i + h, j : j + w]
    return cols.reshape(b * h * w, 9 * c)


def _col2im(dcols, shape):
    b, h, w, c = shape
    dcols = dcols.reshape(b, h, w, 3, 3, c)
    dxp = np.zeros((b, h + 2, w + 2, c), dcols.dtype)
    for i in range(3):
        for j in range(3):
            dxp[:, i : i + h, j : j + w] += dcols[:, :, :, i, j]
    return dxp[:, 1:-1, 1:-1]


def _pool(x):
    b, h, w, c = x.shape
    r = x.reshape(b, h // 2, 2, w // 2, 2, c).transpose(0, 1, 3, 5, 2, 4).reshape(b, h // 2, w // 2, c, 4)
    idx = r.argmax(axis=-1)
    return np.take_along_axis(r, idx[..., None], -1)[..., 0], idx


def _unpool(dout, idx, shape):
    b, h, w, c = shape
    d = np.zeros(idx.shape + (4,), dout.dtype)
    np.put_along_axis(d, idx[..., None], dout[..., None], -1)
    return d.reshape(b, h // 2, w // 2, c, 2, 2).transpose(0, 1, 4, 2, 5, 3).reshape(shape)


def softmax(z):
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


class CompactCNN:
    """conv3x3(8)-pool, conv3x3(16)-pool, conv3x3(32)-pool, dense(128), dense(n_classes)."""

    kind = "cnn"

    def __init__(self, input_shape=(64, 64), channels=(8, 16, 32), hidden=128, n_classes=9,
                 seed=0, dtype=np.float32):
        h, w = input_shape
        scale = 2 ** len(channels)
        if h % scale or w % scale:
            raise ValueError(f"input size must be divisible by {scale}")
        self.input_shape = (int(h), int(w))
        self.channels = tuple(int(c) for c in channels)
        self.hidden = int(hidden)
        self.n_classes = int(n_classes)
        self.dtype = np.dtype(dtype)
        rng = np.random.default_rng(seed)
        self.params = {}
        cin = 1
        for i, cout in enumerate(self.channels, 1):
            self.params[f"conv{i}.w"] = self._uniform(rng, (3, 3, cin, cout), 9 * cin)
            self.params[f"conv{i}.b"] = np.zeros(cout, self.dtype)
            cin = cout
        flat = (h // scale) * (w // scale) * cin
        self.params["fc1.w"] = self._uniform(rng, (flat, self.hidden), flat)
        self.params["fc1.b"] = np.zeros(self.hidden, self.dtype)
        self.params["fc2.w"] = self._uniform(rng, (self.hidden, self.n_classes), self.hidden)
        self.params["fc2.b"] = np.zeros(self.n_classes, self.dtype)

    def _uniform(self, rng, shape, fan_in):
        limit = math.sqrt(6.0 / fan_in)
        return rng.uniform(-limit, limit, shape).astype(self.dtype)

    def config(self) -> dict:
        return {"input_shape": list(self.input_shape), "channels": list(self.channels),
                "hidden": self.hidden, "n_classes": self.n_classes, "dtype": self.dtype.name}

    def _input(self, images):
        x = np.asarray(images)
        if x.ndim == 2:
            x = x[None]
        if x.ndim == 3:
            x = x[..., None]
        if x.shape[1:] != self.input_shape + (1,):
            raise ValueError(f"expected images of shape {self.input_shape}, got {x.shape[1:3]}")
        if x.dtype == np.uint8:
            x = x / 255.0
        return x.astype(self.dtype, copy=False)

    def _forward(self, x, keep=False):
        p = self.params
        caches = []
        for i in range(1, len(self.channels) + 1):
            wmat = p[f"conv{i}.w"].reshape(-1, p[f"conv{i}.w"].shape[-1])
            cols = _im2col(x)
            z = (_mm(cols, wmat) + p[f"conv{i}.b"]).reshape(x.shape[:3] + (wmat.shape[1],))
            a = np.maximum(z, 0)
            pooled, idx = _pool(a)
            if keep:
                caches.append((x.shape, cols, z, idx))
            x = pooled
        flat = x.reshape(x.shape[0], -1)
        z1 = _mm(flat, p["fc1.w"]) + p["fc1.b"]
        a1 = np.maximum(z1, 0)
        logits = _mm(a1, p["fc2.w"]) + p["fc2.b"]
        if keep:
            return logits, (caches, x.shape, flat, z1, a1)
        return logits

    def logits(self, images):
        return self._forward(self._input(images))

    def predict_proba(self, images, batch_size=256):
        x = self._input(images)
        out = [softmax(self._forward(x[i : i + batch_size])) for i in range(0, x.shape[0], batch_size)]
        return np.concatenate(out) if out else np.zeros((0, self.n_classes), self.dtype)

    def predict(self, images):
        return self.predict_proba(images).argmax(axis=1)

    def loss_and_gradients(self, images, labels):
        """Mean cross-entropy over the batch and its exact gradient for every parameter."""
        loss, grads, _ = self._backward(images, labels)
        return loss, grads

    def _backward(self, images, labels):
        x = self._input(images)
        y = np.asarray(labels, dtype=int)
        b = x.shape[0]
        logits, (caches, pooled_shape, flat, z1, a1) = self._forward(x, keep=True)
        probs = softmax(logits)
        loss = float(-np.mean(np.log(np.maximum(probs[np.arange(b), y], np.finfo(probs.dtype).tiny))))

        p = self.params
        g = {}
        dlogits = probs.copy()
        dlogits[np.arange(b), y] -= 1
        dlogits /= b
        g["fc2.w"] = a1.T @ dlogits
        g["fc2.b"] = dlogits.sum(axis=0)
        dz1 = (dlogits @ p["fc2.w"].T) * (z1 > 0)
        g["fc1.w"] = flat.T @ dz1
        g["fc1.b"] = dz1.sum(axis=0)
        dx = (dz1 @ p["fc1.w"].T).reshape(pooled_shape)
        for i in range(len(self.channels), 0, -1):
            in_shape, cols, z, idx = caches[i - 1]
            dz = _unpool(dx, idx, z.shape) * (z > 0)
            dz = dz.reshape(-1, z.shape[-1])
            w = p[f"conv{i}.w"]
            g[f"conv{i}.w"] = (cols.T @ dz).reshape(w.shape)
            g[f"conv{i}.b"] = dz.sum(axis=0)
            if i > 1:
                dx = _col2im(dz @ w.reshape(-1, w.shape[-1]).T, in_shape)
        return loss, {k: g[k].astype(self.dtype, copy=False) for k in p}, probs

    def copy(self):
        return copy.deepcopy(self)


def cnn_forward(model: CompactCNN, images) -> np.ndarray:
    return model.predict_proba(images)


def cnn_gradients(model: CompactCNN, images, labels) -> dict:
    return model.loss_and_gradients(images, labels)[1]


def _batched_loss(model, x, y, batch_size=256):
    total, correct = 0.0, 0
    for i in range(0, x.shape[0], batch_size):
        probs = model.predict_proba(x[i : i + batch_size])
        yy = y[i : i + batch_size]
        total += -np.log(np.maximum(probs[np.arange(yy.size), yy], 1e-30)).astype(float).sum()
        correct += int((probs.argmax(axis=1) == yy).sum())
    return total / x.shape[0], correct / x.shape[0]


def cnn_train(model: CompactCNN, train_images, train_labels, val_images, val_labels,
              cfg: TrainConfig = TrainConfig()):
    """Mini-batch Adam on mean cross-entropy with lr decay on plateau and early stopping.

    Returns ``(model, history)``; the model carries the weights of the epoch with
    the lowest validation loss.
    """
    x = model._input(train_images)
    y = np.asarray(train_labels, dtype=int)
    xv = model._input(val_images)
    yv = np.asarray(val_labels, dtype=int)
    if x.shape[0] == 0 or xv.shape[0] == 0:
        raise ValueError("training and validation sets must be non-empty")

    rng = np.random.default_rng(cfg.seed)
    m = {k: np.zeros_like(v) for k, v in model.params.items()}
    v = {k: np.zeros_like(v) for k, v in model.params.items()}
    step = 0
    lr = cfg.learning_rate
    best_loss, best_params = math.inf, copy.deepcopy(model.params)
    stop_wait = lr_wait = 0
    decay_after = max(cfg.patience // 2, 1)
    history = []

    for epoch in range(1, cfg.max_epochs + 1):
        order = rng.permutation(x.shape[0])
        loss_sum = 0.0
        correct = 0
        for start in range(0, order.size, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            loss, grads, probs = model._backward(x[idx], y[idx])
            if not math.isfinite(loss):
                raise TrainingDiverged(f"loss became {loss} at epoch {epoch}, step {step + 1}")
            step += 1
            c1 = 1 - cfg.beta1**step
            c2 = 1 - cfg.beta2**step
            for k, p in model.params.items():
                m[k] = cfg.beta1 * m[k] + (1 - cfg.beta1) * grads[k]
                v[k] = cfg.beta2 * v[k] + (1 - cfg.beta2) * grads[k] ** 2
                p -= (lr * (m[k] / c1) / (np.sqrt(v[k] / c2) + cfg.eps)).astype(p.dtype)
            loss_sum += loss * idx.size
            correct += int((probs.argmax(axis=1) == y[idx]).sum())
        train_loss = loss_sum / x.shape[0]
        train_acc = correct / x.shape[0]
        val_loss, val_acc = _batched_loss(model, xv, yv)
        history.append({"epoch": epoch, "lr": lr, "train_loss": train_loss, "train_acc": train_acc,
                        "val_loss": val_loss, "val_acc": val_acc})
        log.info("epoch %d lr %.2e train_loss %.4f train_acc %.3f val_loss %.4f val_acc %.3f",
                 epoch, lr, train_loss, train_acc, val_loss, val_acc)
        if not math.isfinite(val_loss):
            raise TrainingDiverged(f"validation loss became {val_loss} at epoch {epoch}")
        if val_loss < best_loss:
            best_loss, best_params = val_loss, copy.deepcopy(model.params)
            stop_wait = lr_wait = 0
            continue
        stop_wait += 1
        lr_wait += 1
        if stop_wait >= cfg.patience:
            break
        if lr_wait >= decay_after:
            lr *= cfg.lr_decay
            lr_wait = 0
    model.params = best_params
    return model, history


def train_config_dict(cfg: TrainConfig) -> dict:
    return asdict(cfg)
