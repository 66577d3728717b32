from __future__ import annotations

import numpy as np

from ..errors import ParameterError
from ..nn import input_gradient

FGSM_EPSILON = 0.01


def fgsm(net, x, y_true, epsilon=FGSM_EPSILON):
    """Fast gradient sign attack: one signed step up the cross-entropy at ``y_true``."""
    if epsilon < 0:
        raise ParameterError(f"epsilon must be non-negative, got {epsilon}")
    x = np.asarray(x, dtype=np.float64)
    if epsilon == 0:
        return x.copy()
    grad = input_gradient(net, x, target=y_true, temperature=1.0)
    return np.clip(x + epsilon * np.sign(grad), 0.0, 1.0)
