"""Sequential networks, forward traces and input gradients."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ParameterError, ShapeError
from .layers import Conv2D, Dense, Flatten, Layer, MaxPool2D, ReLU, Reshape, Sigmoid


class Network:
    """An ordered stack of layers with a fixed input shape.

    ``capture_points`` holds layer indices whose outputs are recorded by
    :func:`forward`. Parameters become read-only once :meth:`freeze` is called;
    training functions always work on a fresh copy.
    """

    def __init__(self, layers: list[Layer], input_shape, capture_points=()):
        self.layers = list(layers)
        self.input_shape = tuple(int(s) for s in input_shape)
        self.capture_points = tuple(sorted(int(i) for i in capture_points))
        shape = self.input_shape
        self.shapes = [shape]
        for layer in self.layers:
            shape = layer.output_shape(shape)
            self.shapes.append(shape)
        for i in self.capture_points:
            if not 0 <= i < len(self.layers):
                raise ParameterError(f"capture point {i} outside layer range")

    @property
    def output_shape(self):
        return self.shapes[-1]

    @property
    def num_classes(self) -> int:
        return int(np.prod(self.output_shape))

    def n_params(self) -> int:
        return sum(layer.n_params() for layer in self.layers)

    def init_params(self, seed: int):
        rng = np.random.default_rng(seed)
        for layer in self.layers:
            layer.init_params(rng)
        return self

    def parameters(self):
        """Yield ``(layer_index, name, array)`` in a stable order."""
        for i, layer in enumerate(self.layers):
            for name in sorted(layer.params):
                yield i, name, layer.params[name]

    def freeze(self):
        for _, _, p in self.parameters():
            p.setflags(write=False)
        return self

    def copy(self) -> Network:
        from .layers import layer_from_description

        layers = []
        for layer in self.layers:
            clone = layer_from_description(layer.describe())
            clone.params = {k: np.array(v, copy=True) for k, v in layer.params.items()}
            layers.append(clone)
        return Network(layers, self.input_shape, self.capture_points)

    def describe(self) -> dict:
        return {
            "input_shape": list(self.input_shape),
            "capture_points": list(self.capture_points),
            "layers": [layer.describe() for layer in self.layers],
        }

    # -- batched passes -------------------------------------------------

    def check_batch(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.shape[1:] != self.input_shape:
            raise ShapeError(f"expected input shape {self.input_shape}, got {x.shape[1:]}")
        return x

    def run(self, x, keep_cache=False):
        """Forward a batch. Returns ``(output, captured, caches)``."""
        x = self.check_batch(x)
        captured = {}
        caches = [] if keep_cache else None
        for i, layer in enumerate(self.layers):
            x, cache = layer.forward(x)
            if keep_cache:
                caches.append(cache)
            if i in self.capture_points:
                captured[i] = x
        return x, captured, caches

    def predict_logits(self, x):
        return self.run(x)[0]

    def backward(self, dout, caches):
        """Backpropagate ``dout``; returns ``(dx, grads)`` with grads keyed by (layer, name)."""
        grads = {}
        for i in range(len(self.layers) - 1, -1, -1):
            dout, g = self.layers[i].backward(dout, caches[i])
            for name, arr in g.items():
                grads[(i, name)] = arr
        return dout, grads


@dataclass
class ForwardTrace:
    logits: np.ndarray
    captured: dict = field(default_factory=dict)
    prediction: int = 0
    confidence: float = 0.0

    @property
    def probabilities(self):
        return softmax_temperature(self.logits, 1.0)


def softmax_temperature(logits, T: float = 1.0):
    """Softmax of ``logits / T`` along the last axis, computed with max subtraction."""
    if not T > 0:
        raise ParameterError(f"temperature must be positive, got {T}")
    z = np.asarray(logits, dtype=np.float64) / T
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def log_softmax_temperature(logits, T: float = 1.0):
    if not T > 0:
        raise ParameterError(f"temperature must be positive, got {T}")
    z = np.asarray(logits, dtype=np.float64) / T
    z = z - z.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


def forward(net: Network, x) -> ForwardTrace:
    """Classify a single instance and record the captured activations."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != net.input_shape:
        raise ShapeError(f"expected input shape {net.input_shape}, got {x.shape}")
    out, captured, _ = net.run(x[None])
    logits = out[0]
    probs = softmax_temperature(logits, 1.0)
    pred = int(np.argmax(logits))
    return ForwardTrace(
        logits=logits,
        captured={i: a[0] for i, a in captured.items()},
        prediction=pred,
        confidence=float(probs[pred]),
    )


def input_gradient(net: Network, x, target=None, temperature: float = 1.0):
    """Gradient of ``-log softmax(logits / T)[target]`` with respect to ``x``.

    ``target=None`` uses the predicted class. With ``T=1`` this is the usual
    cross-entropy gradient used by FGSM; ODIN uses the same routine at large T.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape != net.input_shape:
        raise ShapeError(f"expected input shape {net.input_shape}, got {x.shape}")
    out, _, caches = net.run(x[None], keep_cache=True)
    logits = out[0]
    t = int(np.argmax(logits)) if target is None else int(target)
    dlogits = softmax_temperature(logits, temperature)
    dlogits[t] -= 1.0
    dlogits /= temperature
    dx, _ = net.backward(dlogits[None], caches)
    return dx[0]


def cross_entropy(logits, targets):
    """Mean cross-entropy of a batch and its gradient with respect to the logits."""
    logp = log_softmax_temperature(logits, 1.0)
    n = logits.shape[0]
    loss = -logp[np.arange(n), targets].mean()
    grad = np.exp(logp)
    grad[np.arange(n), targets] -= 1.0
    return loss, grad / n


# -- architectures -------------------------------------------------------


def lenet(input_shape, num_classes: int, hidden: int = 128, seed: int = 0) -> Network:
    """LeNet-style classifier; the ReLU after the ``hidden``-wide dense layer is captured."""
    c, h, w = input_shape
    layers = [Conv2D(c, 6, 5), ReLU(), MaxPool2D(2), Conv2D(6, 16, 5), ReLU(), MaxPool2D(2), Flatten()]
    shape = tuple(input_shape)
    for layer in layers:
        shape = layer.output_shape(shape)
    layers += [Dense(shape[0], hidden), ReLU(), Dense(hidden, num_classes)]
    net = Network(layers, input_shape, capture_points=(len(layers) - 2,))
    return net.init_params(seed)


def mlp(input_dim: int, hidden, num_classes: int, seed: int = 0) -> Network:
    """Dense classifier on flat inputs; the last hidden ReLU is captured."""
    layers: list[Layer] = []
    width = int(input_dim)
    for h in hidden:
        layers += [Dense(width, h), ReLU()]
        width = h
    layers.append(Dense(width, num_classes))
    capture = (len(layers) - 2,) if hidden else ()
    return Network(layers, (input_dim,), capture_points=capture).init_params(seed)


def small_convnet(input_shape, num_classes: int, channels: int = 2, hidden: int = 8, seed: int = 0):
    """Tiny conv net (well under 1k parameters for small images), used for gradient checks."""
    c, h, w = input_shape
    layers = [Conv2D(c, channels, 3), ReLU(), MaxPool2D(2), Flatten()]
    shape = tuple(input_shape)
    for layer in layers:
        shape = layer.output_shape(shape)
    layers += [Dense(shape[0], hidden), ReLU(), Dense(hidden, num_classes)]
    return Network(layers, input_shape, capture_points=(len(layers) - 2,)).init_params(seed)


def dense_autoencoder(input_shape, hidden=(64, 16), seed: int = 0) -> Network:
    """Fully connected autoencoder with a sigmoid output so reconstructions stay in [0, 1]."""
    d = int(np.prod(input_shape))
    layers: list[Layer] = [Flatten()]
    width = d
    for h in hidden:
        layers += [Dense(width, h), ReLU()]
        width = h
    for h in reversed(hidden[:-1]):
        layers += [Dense(width, h), ReLU()]
        width = h
    layers += [Dense(width, d), Sigmoid(), Reshape(input_shape)]
    return Network(layers, input_shape).init_params(seed)
