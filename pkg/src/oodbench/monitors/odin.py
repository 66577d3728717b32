"""ODIN: temperature scaling plus a signed input perturbation, thresholded on confidence."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ParameterError
from ..nn import forward, input_gradient, softmax_temperature

DEFAULT_TEMPERATURE = 1000.0


@dataclass(frozen=True)
class OdinState:
    temperature: float
    epsilon: float
    delta: float

    def __post_init__(self):
        if not self.temperature > 0:
            raise ParameterError("temperature must be positive")
        if self.epsilon < 0:
            raise ParameterError("perturbation magnitude must be >= 0")


def odin_confidence(net, x, temperature=DEFAULT_TEMPERATURE, epsilon=0.0, trace=None) -> float:
    """Max temperature-scaled softmax after nudging ``x`` toward the predicted class."""
    x = np.asarray(x, dtype=np.float64)
    if trace is None:
        trace = forward(net, x)
    if epsilon > 0:
        grad = input_gradient(net, x, target=trace.prediction, temperature=temperature)
        x = np.clip(x - epsilon * np.sign(grad), 0.0, 1.0)
        logits = forward(net, x).logits
    else:
        logits = trace.logits
    return float(softmax_temperature(logits, temperature).max())


def fit_odin(net, x, temperature=DEFAULT_TEMPERATURE, epsilon=0.0014, delta=None) -> OdinState:
    """Calibrate the threshold to the lowest confidence seen on ``x`` (unless ``delta`` is given)."""
    if delta is None:
        delta = min(odin_confidence(net, xi, temperature, epsilon) for xi in x)
    return OdinState(float(temperature), float(epsilon), float(delta))


def odin_detect(state: OdinState, net, x, trace=None) -> bool:
    # strict: a confidence equal to the threshold is accepted
    return odin_confidence(net, x, state.temperature, state.epsilon, trace) < state.delta
