"""First-order optimizers updating parameter arrays in place."""

from __future__ import annotations

import numpy as np

from ..errors import ParameterError

ADAM_DEFAULTS = {"beta1": 0.9, "beta2": 0.999, "eps": 1e-8}
RMSPROP_DEFAULTS = {"rho": 0.9, "eps": 1e-8}


class SGD:
    def __init__(self, lr=0.01):
        self.lr = lr

    def step(self, params, grads):
        for key, p in params.items():
            p -= self.lr * grads[key]


class Adam:
    def __init__(self, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m: dict = {}
        self.v: dict = {}
        self.t = 0

    def step(self, params, grads):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        c1 = 1.0 - b1**self.t
        c2 = 1.0 - b2**self.t
        for key, p in params.items():
            g = grads[key]
            m = self.m.get(key)
            if m is None:
                m = self.m[key] = np.zeros_like(p)
                self.v[key] = np.zeros_like(p)
            v = self.v[key]
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


class RMSProp:
    def __init__(self, lr=1e-3, rho=0.9, eps=1e-8):
        self.lr, self.rho, self.eps = lr, rho, eps
        self.sq: dict = {}

    def step(self, params, grads):
        for key, p in params.items():
            g = grads[key]
            s = self.sq.get(key)
            if s is None:
                s = self.sq[key] = np.zeros_like(p)
            s *= self.rho
            s += (1.0 - self.rho) * g * g
            p -= self.lr * g / (np.sqrt(s) + self.eps)


def make_optimizer(kind: str, lr: float):
    kind = kind.lower()
    if kind == "sgd":
        return SGD(lr)
    if kind == "adam":
        return Adam(lr, **ADAM_DEFAULTS)
    if kind == "rmsprop":
        return RMSProp(lr, **RMSPROP_DEFAULTS)
    raise ParameterError(f"unknown optimizer {kind!r} (expected sgd, adam or rmsprop)")
