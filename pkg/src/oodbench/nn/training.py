"""Classifier and autoencoder training loops."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..errors import DivergenceError, ParameterError, ShapeError
from .network import Network, cross_entropy, dense_autoencoder, lenet, mlp
from .optim import make_optimizer

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    optimizer: str = "adam"
    lr: float = 1e-3
    epochs: int = 10
    batch_size: int = 64
    seed: int = 0


def _batches(n, batch_size, rng):
    order = rng.permutation(n)
    for start in range(0, n, batch_size):
        yield order[start : start + batch_size]


def _check_finite(loss, epoch):
    if not np.isfinite(loss):
        raise DivergenceError(epoch, float(loss))


def default_classifier(input_shape, num_classes, seed):
    if len(input_shape) == 3:
        return lenet(input_shape, num_classes, seed=seed)
    return mlp(int(np.prod(input_shape)), (16,), num_classes, seed=seed)


def accuracy(net: Network, x, y, batch_size=256) -> float:
    if len(x) == 0:
        return 0.0
    correct = 0
    for start in range(0, len(x), batch_size):
        logits = net.predict_logits(x[start : start + batch_size])
        correct += int((logits.argmax(axis=1) == y[start : start + batch_size]).sum())
    return correct / len(x)


def train_classifier(x, y, cfg: TrainConfig = TrainConfig(), net: Network | None = None, num_classes=None):
    """Fit a classifier with mini-batch cross-entropy.

    Returns ``(network, train_accuracy)``. ``net`` gives the architecture and
    starting weights (it is copied, never modified); when omitted a LeNet-style
    net (images) or a one-hidden-layer MLP (flat inputs) is built from ``cfg.seed``.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if num_classes is None:
        num_classes = int(y.max()) + 1 if net is None else net.num_classes
    if len(np.unique(y)) < 2:
        raise ParameterError("classifier training needs at least two classes")
    if y.min() < 0 or y.max() >= num_classes:
        raise ParameterError(f"labels must lie in [0, {num_classes})")
    if net is None:
        net = default_classifier(x.shape[1:], num_classes, cfg.seed)
    else:
        net = net.copy()
    if x.shape[1:] != net.input_shape:
        raise ShapeError(f"training data shape {x.shape[1:]} != network input {net.input_shape}")

    opt = make_optimizer(cfg.optimizer, cfg.lr)
    rng = np.random.default_rng(cfg.seed)
    for epoch in range(cfg.epochs):
        total = 0.0
        for idx in _batches(len(x), cfg.batch_size, rng):
            logits, _, caches = net.run(x[idx], keep_cache=True)
            loss, dlogits = cross_entropy(logits, y[idx])
            _check_finite(loss, epoch)
            _, grads = net.backward(dlogits, caches)
            for i, layer in enumerate(net.layers):
                if layer.params:
                    opt.step({(i, k): v for k, v in layer.params.items()}, grads)
            total += loss * len(idx)
        log.debug("epoch %d loss %.6f", epoch, total / len(x))
    acc = accuracy(net, x, y)
    return net.freeze(), acc


@dataclass
class Autoencoder:
    network: Network
    class_id: int
    train_loss_mean: float

    def reconstruct(self, x):
        x = np.asarray(x, dtype=np.float64)
        return self.network.predict_logits(x[None])[0]


def _per_instance_mse(net, x, batch_size=256):
    out = []
    for start in range(0, len(x), batch_size):
        xb = x[start : start + batch_size]
        rec = net.predict_logits(xb)
        out.append(((rec - xb) ** 2).reshape(len(xb), -1).mean(axis=1))
    return np.concatenate(out) if out else np.zeros(0)


def train_autoencoder(
    class_data,
    cfg: TrainConfig = TrainConfig(epochs=200, batch_size=32),
    class_id: int = 0,
    labels=None,
    hidden=(64, 16),
) -> Autoencoder:
    """Train one autoencoder on the instances of a single class (MSE loss).

    ``train_loss_mean`` is the mean per-instance reconstruction error of the
    final model over ``class_data``.
    """
    x = np.asarray(class_data, dtype=np.float64)
    if len(x) == 0:
        raise ParameterError("autoencoder needs at least one training instance")
    if labels is not None and len(np.unique(labels)) > 1:
        raise ParameterError("autoencoder training data must come from a single class")
    net = dense_autoencoder(x.shape[1:], hidden=tuple(hidden), seed=cfg.seed)
    opt = make_optimizer(cfg.optimizer, cfg.lr)
    rng = np.random.default_rng(cfg.seed)
    for epoch in range(cfg.epochs):
        for idx in _batches(len(x), cfg.batch_size, rng):
            xb = x[idx]
            rec, _, caches = net.run(xb, keep_cache=True)
            diff = rec - xb
            loss = float((diff**2).mean())
            _check_finite(loss, epoch)
            _, grads = net.backward(2.0 * diff / diff.size, caches)
            for i, layer in enumerate(net.layers):
                if layer.params:
                    opt.step({(i, k): v for k, v in layer.params.items()}, grads)
    net.freeze()
    mean_loss = float(_per_instance_mse(net, x).mean())
    return Autoencoder(net, int(class_id), mean_loss)


def reconstruction_loss(ae: Autoencoder, x) -> float:
    """Mean squared error between ``x`` and its reconstruction."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != ae.network.input_shape:
        raise ShapeError(f"expected input shape {ae.network.input_shape}, got {x.shape}")
    rec = ae.reconstruct(x)
    return float(((rec - x) ** 2).mean())
