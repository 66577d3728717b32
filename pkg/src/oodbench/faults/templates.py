"""Fault templates: declarative rules that turn ID instances into OOD instances."""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field

import numpy as np

from ..datasets.instances import ID, OOD, LabeledInstance, novelty_instances
from ..errors import OODBenchError, ParameterError
from . import transforms as T
from .adversarial import FGSM_EPSILON, fgsm

# transform name -> (kind, needs severity, needs seed)
TRANSFORMS = {
    "gaussian_noise": ("noise", True, True),
    "gaussian_blur": ("blur", True, False),
    "zoom_blur": ("blur", True, False),
    "glass_blur": ("blur", True, True),
    "snow": ("weather", True, True),
    "fog": ("weather", True, True),
    "rotate": ("geometric", False, False),
    "brightness": ("photometric", False, False),
    "contrast": ("photometric", False, False),
    "pixel_trap": ("anomaly", True, True),
    "row_add_logic": ("anomaly", True, False),
    "shifted_pixel": ("anomaly", True, True),
    "fgsm": ("adversarial", False, False),
    "novelty": ("novelty", False, False),
}

# the five OOD categories
CATEGORY = {
    "noise": "noise",
    "blur": "noise",
    "weather": "distributional_shift",
    "geometric": "distributional_shift",
    "photometric": "distributional_shift",
    "anomaly": "anomaly",
    "adversarial": "adversarial",
    "novelty": "novelty",
}

_PARAM_KEY = {"rotate": "angle", "brightness": "delta", "contrast": "factor"}


@dataclass(frozen=True)
class FaultTemplate:
    kind: str
    name: str
    severity: int | None = None
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.name not in TRANSFORMS:
            raise ParameterError(f"unknown fault transform {self.name!r}")
        kind, has_severity, _ = TRANSFORMS[self.name]
        if self.kind != kind:
            raise ParameterError(f"transform {self.name!r} belongs to kind {kind!r}, not {self.kind!r}")
        if has_severity:
            T.check_severity(self.severity)
        elif self.severity is not None:
            raise ParameterError(f"transform {self.name!r} takes no severity")
        if self.name in _PARAM_KEY and _PARAM_KEY[self.name] not in self.params:
            raise ParameterError(f"transform {self.name!r} needs parameter {_PARAM_KEY[self.name]!r}")
        if self.name == "fgsm" and self.params.get("epsilon", FGSM_EPSILON) < 0:
            raise ParameterError("fgsm epsilon must be non-negative")

    @property
    def category(self) -> str:
        return CATEGORY[self.kind]

    @property
    def variation(self) -> str:
        if self.severity is not None:
            return f"{self.name}-{self.severity}"
        if self.name in _PARAM_KEY:
            return f"{self.name}-{self.params[_PARAM_KEY[self.name]]:g}"
        if self.name == "novelty":
            return f"novelty:{self.params.get('source', 'foreign')}"
        return self.name

    def resolved_params(self) -> dict:
        """Every constant the transform uses, for the manifest."""
        p = dict(self.params)
        s = self.severity
        if self.name == "gaussian_noise":
            p["sigma"] = T.NOISE_SIGMA[s]
        elif self.name == "gaussian_blur":
            p["sigma"] = T.GAUSSIAN_BLUR_SIGMA[s]
        elif self.name == "zoom_blur":
            p["max_zoom"] = 1.0 + T.ZOOM_STEP * s
        elif self.name == "glass_blur":
            p["sigma"], p["radius"], p["passes"] = T.GLASS[s]
        elif self.name == "snow":
            p["density"], p["motion_length"] = T.SNOW[s]
        elif self.name == "fog":
            p["weight"] = T.FOG_WEIGHT[s]
            p["roughness"] = T.FOG_ROUGHNESS
        elif self.name == "pixel_trap":
            p["fraction"] = T.PIXEL_TRAP_FRACTION[s]
        elif self.name == "row_add_logic":
            p["row_offset"] = T.ROW_ADD_OFFSET[s]
        elif self.name == "shifted_pixel":
            p["max_shift"] = T.SHIFT_MAX[s]
        elif self.name == "fgsm":
            p.setdefault("epsilon", FGSM_EPSILON)
        if s is not None:
            p["severity"] = s
        return p

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "name": self.name,
            "category": self.category,
            "severity": self.severity,
            "params": self.resolved_params(),
            "seed": int(self.seed),
            "variation": self.variation,
        }


def instance_seed(template_seed: int, instance_id: str) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(template_seed), zlib.crc32(instance_id.encode("utf-8"))])


def transform_image(template: FaultTemplate, image, seed, net=None, label=None):
    name, s = template.name, template.severity
    if name == "gaussian_noise":
        return T.gaussian_noise(image, s, seed)
    if name == "gaussian_blur":
        return T.gaussian_blur(image, s)
    if name == "zoom_blur":
        return T.zoom_blur(image, s)
    if name == "glass_blur":
        return T.glass_blur(image, s, seed)
    if name == "snow":
        return T.snow(image, s, seed)
    if name == "fog":
        return T.fog(image, s, seed)
    if name in _PARAM_KEY:
        return T.geometric_photometric(image, name, template.params[_PARAM_KEY[name]])
    if name in ("pixel_trap", "row_add_logic", "shifted_pixel"):
        return T.anomaly(image, name, s, seed)
    if name == "fgsm":
        if net is None:
            raise ParameterError("fgsm template needs a trained network")
        return fgsm(net, image, label, template.params.get("epsilon", FGSM_EPSILON))
    raise ParameterError(f"transform {name!r} cannot be applied per image")


def apply_template(instances, template: FaultTemplate, net=None, foreign=None):
    """Turn ``instances`` into OOD instances tagged with ``template.variation``.

    Labels are preserved. For ``novelty`` templates the ID instances are ignored
    and ``foreign=(images, labels, num_id_classes)`` supplies the new classes.
    """
    if template.kind == "novelty":
        if foreign is None:
            raise ParameterError("novelty template needs a foreign dataset")
        images, labels, num_id_classes = foreign
        return novelty_instances(images, labels, num_id_classes, template.params.get("source", "foreign"))
    out = []
    tag = template.variation
    for inst in instances:
        if inst.origin != ID:
            raise ParameterError(f"{inst.id}: fault templates apply to ID instances only")
        try:
            img = transform_image(template, inst.image, instance_seed(template.seed, inst.id), net, inst.label)
        except OODBenchError as exc:
            raise type(exc)(f"{inst.id}: {exc}") from exc
        out.append(LabeledInstance(f"{inst.id}~{tag}", img, inst.label, origin=OOD, variation=tag))
    return out
