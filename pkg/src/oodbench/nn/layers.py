"""Layer implementations operating on batched float64 arrays.

Every layer exposes ``forward(x) -> (out, cache)`` and
``backward(dout, cache) -> (dx, grads)``; ``grads`` maps parameter names to
arrays shaped like ``params``. Inputs always carry a leading batch axis.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import ShapeError


def glorot_uniform(rng, shape, fan_in, fan_out):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


class Layer:
    kind = "layer"
    params: dict[str, np.ndarray]

    def __init__(self):
        self.params = {}

    def output_shape(self, input_shape):
        return tuple(input_shape)

    def describe(self) -> dict:
        return {"type": self.kind}

    def init_params(self, rng):
        pass

    def n_params(self):
        return sum(p.size for p in self.params.values())


class Dense(Layer):
    kind = "dense"

    def __init__(self, in_features: int, out_features: int):
        super().__init__()
        self.in_features = int(in_features)
        self.out_features = int(out_features)
        self.params = {
            "W": np.zeros((self.in_features, self.out_features)),
            "b": np.zeros(self.out_features),
        }

    def init_params(self, rng):
        self.params["W"] = glorot_uniform(
            rng, (self.in_features, self.out_features), self.in_features, self.out_features
        )
        self.params["b"] = np.zeros(self.out_features)

    def output_shape(self, input_shape):
        if tuple(input_shape) != (self.in_features,):
            raise ShapeError(f"dense layer expects ({self.in_features},), got {tuple(input_shape)}")
        return (self.out_features,)

    def describe(self):
        return {"type": self.kind, "in": self.in_features, "out": self.out_features}

    def forward(self, x):
        return x @ self.params["W"] + self.params["b"], x

    def backward(self, dout, x):
        grads = {"W": x.T @ dout, "b": dout.sum(axis=0)}
        return dout @ self.params["W"].T, grads


class Conv2D(Layer):
    """Valid (unpadded) 2D convolution, weights shaped (out, in, k, k)."""

    kind = "conv2d"

    def __init__(self, in_channels: int, out_channels: int, kernel: int, stride: int = 1):
        super().__init__()
        self.in_channels = int(in_channels)
        self.out_channels = int(out_channels)
        self.kernel = int(kernel)
        self.stride = int(stride)
        k = self.kernel
        self.params = {
            "W": np.zeros((self.out_channels, self.in_channels, k, k)),
            "b": np.zeros(self.out_channels),
        }

    def init_params(self, rng):
        k2 = self.kernel * self.kernel
        self.params["W"] = glorot_uniform(
            rng, self.params["W"].shape, self.in_channels * k2, self.out_channels * k2
        )
        self.params["b"] = np.zeros(self.out_channels)

    def output_shape(self, input_shape):
        if len(input_shape) != 3 or input_shape[0] != self.in_channels:
            raise ShapeError(f"conv2d expects ({self.in_channels}, H, W), got {tuple(input_shape)}")
        _, h, w = input_shape
        if h < self.kernel or w < self.kernel:
            raise ShapeError(f"input {h}x{w} smaller than kernel {self.kernel}")
        return (
            self.out_channels,
            (h - self.kernel) // self.stride + 1,
            (w - self.kernel) // self.stride + 1,
        )

    def describe(self):
        return {
            "type": self.kind,
            "in": self.in_channels,
            "out": self.out_channels,
            "kernel": self.kernel,
            "stride": self.stride,
        }

    def _columns(self, x):
        k, s = self.kernel, self.stride
        # (N, C, Ho, Wo, k, k) -> (N, Ho, Wo, C*k*k)
        win = sliding_window_view(x, (k, k), axis=(2, 3))[:, :, ::s, ::s]
        n, c, ho, wo = win.shape[:4]
        cols = win.transpose(0, 2, 3, 1, 4, 5).reshape(n, ho, wo, c * k * k)
        return cols

    def forward(self, x):
        cols = self._columns(x)
        wmat = self.params["W"].reshape(self.out_channels, -1)
        out = cols @ wmat.T + self.params["b"]
        return out.transpose(0, 3, 1, 2), (x.shape, cols)

    def backward(self, dout, cache):
        x_shape, cols = cache
        n, c, h, w = x_shape
        k, s = self.kernel, self.stride
        d = dout.transpose(0, 2, 3, 1)  # (N, Ho, Wo, out)
        ho, wo = d.shape[1], d.shape[2]
        wmat = self.params["W"].reshape(self.out_channels, -1)
        grads = {
            "W": (d.reshape(-1, self.out_channels).T @ cols.reshape(-1, cols.shape[-1])).reshape(
                self.params["W"].shape
            ),
            "b": d.sum(axis=(0, 1, 2)),
        }
        dcols = (d @ wmat).reshape(n, ho, wo, c, k, k)
        dx = np.zeros(x_shape)
        for i in range(k):
            for j in range(k):
                dx[:, :, i : i + s * ho : s, j : j + s * wo : s] += dcols[:, :, :, :, i, j].transpose(
                    0, 3, 1, 2
                )
        return dx, grads


class MaxPool2D(Layer):
    """Non-overlapping max pooling; trailing rows/cols that do not fill a window are dropped."""

    kind = "maxpool2d"

    def __init__(self, size: int = 2):
        super().__init__()
        self.size = int(size)

    def output_shape(self, input_shape):
        if len(input_shape) != 3:
            raise ShapeError(f"maxpool2d expects (C, H, W), got {tuple(input_shape)}")
        c, h, w = input_shape
        return (c, h // self.size, w // self.size)

    def describe(self):
        return {"type": self.kind, "size": self.size}

    def forward(self, x):
        p = self.size
        n, c, h, w = x.shape
        ho, wo = h // p, w // p
        blocks = (
            x[:, :, : ho * p, : wo * p]
            .reshape(n, c, ho, p, wo, p)
            .transpose(0, 1, 2, 4, 3, 5)
            .reshape(n, c, ho, wo, p * p)
        )
        # first maximal element wins ties, so the gradient is routed to one input only
        idx = blocks.argmax(axis=-1)
        out = np.take_along_axis(blocks, idx[..., None], axis=-1)[..., 0]
        return out, (x.shape, idx)

    def backward(self, dout, cache):
        x_shape, idx = cache
        p = self.size
        n, c, h, w = x_shape
        ho, wo = dout.shape[2], dout.shape[3]
        blocks = np.zeros((n, c, ho, wo, p * p))
        np.put_along_axis(blocks, idx[..., None], dout[..., None], axis=-1)
        dx = np.zeros(x_shape)
        dx[:, :, : ho * p, : wo * p] = (
            blocks.reshape(n, c, ho, wo, p, p).transpose(0, 1, 2, 4, 3, 5).reshape(n, c, ho * p, wo * p)
        )
        return dx, {}


class Flatten(Layer):
    kind = "flatten"

    def output_shape(self, input_shape):
        return (int(np.prod(input_shape)),)

    def forward(self, x):
        return x.reshape(x.shape[0], -1), x.shape

    def backward(self, dout, shape):
        return dout.reshape(shape), {}


class ReLU(Layer):
    kind = "relu"

    def forward(self, x):
        # np.maximum keeps NaN, so a diverging run stays visible downstream
        return np.maximum(x, 0.0), x > 0

    def backward(self, dout, mask):
        return np.where(mask, dout, 0.0), {}


class Sigmoid(Layer):
    kind = "sigmoid"

    def forward(self, x):
        # split by sign so exp never overflows
        out = np.empty_like(x)
        pos = x >= 0
        out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
        ex = np.exp(x[~pos])
        out[~pos] = ex / (1.0 + ex)
        return out, out

    def backward(self, dout, out):
        return dout * out * (1.0 - out), {}


class Reshape(Layer):
    kind = "reshape"

    def __init__(self, shape):
        super().__init__()
        self.shape = tuple(int(s) for s in shape)

    def output_shape(self, input_shape):
        if int(np.prod(input_shape)) != int(np.prod(self.shape)):
            raise ShapeError(f"cannot reshape {tuple(input_shape)} to {self.shape}")
        return self.shape

    def describe(self):
        return {"type": self.kind, "shape": list(self.shape)}

    def forward(self, x):
        return x.reshape((x.shape[0],) + self.shape), x.shape

    def backward(self, dout, shape):
        return dout.reshape(shape), {}


def layer_from_description(desc: dict) -> Layer:
    kind = desc["type"]
    if kind == "dense":
        return Dense(desc["in"], desc["out"])
    if kind == "conv2d":
        return Conv2D(desc["in"], desc["out"], desc["kernel"], desc.get("stride", 1))
    if kind == "maxpool2d":
        return MaxPool2D(desc["size"])
    if kind == "flatten":
        return Flatten()
    if kind == "relu":
        return ReLU()
    if kind == "sigmoid":
        return Sigmoid()
    if kind == "reshape":
        return Reshape(desc["shape"])
    raise ValueError(f"unknown layer type {kind!r}")
