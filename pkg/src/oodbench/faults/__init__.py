from .adversarial import FGSM_EPSILON, fgsm
from .templates import CATEGORY, TRANSFORMS, FaultTemplate, apply_template
from .transforms import (
    anomaly,
    blur,
    brightness,
    contrast,
    fog,
    gaussian_noise,
    geometric_photometric,
    rotate,
    snow,
    weather,
)

__all__ = [
    "CATEGORY",
    "FGSM_EPSILON",
    "TRANSFORMS",
    "FaultTemplate",
    "anomaly",
    "apply_template",
    "blur",
    "brightness",
    "contrast",
    "fgsm",
    "fog",
    "gaussian_noise",
    "geometric_photometric",
    "rotate",
    "snow",
    "weather",
]
