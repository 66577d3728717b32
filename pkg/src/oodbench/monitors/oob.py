"""Outside-of-the-box monitor: per-class boxes over reduced hidden-layer activations."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from ..errors import ParameterError
from ..nn import forward
from .clustering import elbow_k, kmeans
from .reduction import REDUCERS, fit_reducer

PAD = 1e-9


@dataclass(frozen=True)
class OOBConfig:
    gamma: float = 0.0
    # 0 means a single box per class; "elbow" picks k per class by elbow analysis
    clusters: int | str = 0
    reducer: str = "simple"
    n_neighbors: int = 10
    max_clusters: int = 20
    seed: int = 0


@dataclass
class ClassBoxes:
    reducer: object
    # (n_clusters, 2, 2): [cluster, axis, lo/hi]
    boxes: np.ndarray
    n_points: int = 0


@dataclass
class BoxAbstraction:
    layer: int
    gamma: float
    config: OOBConfig
    classes: dict = field(default_factory=dict)

    def boxes_for(self, cls):
        entry = self.classes.get(int(cls))
        return None if entry is None else entry.boxes


def enlarge(lo, hi, gamma):
    """Scale ``[lo, hi]`` about its centre by ``1 + gamma``; never shrinks the interval."""
    if hi - lo <= 0:
        lo, hi = lo - PAD, hi + PAD
    if gamma == 0:
        return lo, hi
    centre = (lo + hi) / 2.0
    half = (hi - lo) / 2.0 * (1.0 + gamma)
    return min(lo, centre - half), max(hi, centre + half)


def build_boxes(points2d, assignments, n_clusters, gamma):
    boxes = np.zeros((n_clusters, 2, 2))
    for j in range(n_clusters):
        members = points2d[assignments == j]
        for axis in range(2):
            lo, hi = enlarge(members[:, axis].min(), members[:, axis].max(), gamma)
            boxes[j, axis] = (lo, hi)
    return boxes


def inside_any(point, boxes) -> bool:
    """Closed-box membership: points on a face or corner count as inside."""
    if boxes is None or len(boxes) == 0:
        return False
    lo = boxes[:, :, 0]
    hi = boxes[:, :, 1]
    return bool(np.any(np.all((point >= lo) & (point <= hi), axis=1)))


def collect_activations(net, x, y, layer=None):
    """Monitored-layer activations of correctly classified instances, grouped by class."""
    layer = net.capture_points[-1] if layer is None else layer
    groups: dict = {}
    for xi, yi in zip(x, y):
        trace = forward(net, xi)
        if trace.prediction == int(yi):
            groups.setdefault(int(yi), []).append(trace.captured[layer])
    return layer, {c: np.array(v) for c, v in groups.items()}


def fit_boxes(activations_by_class, cfg: OOBConfig, layer: int, num_classes: int) -> BoxAbstraction:
    if cfg.gamma < 0:
        raise ParameterError(f"gamma must be >= 0, got {cfg.gamma}")
    if cfg.reducer not in REDUCERS:
        raise ParameterError(f"unknown reducer {cfg.reducer!r}")
    abstraction = BoxAbstraction(layer, float(cfg.gamma), cfg)
    for cls in range(num_classes):
        acts = activations_by_class.get(cls)
        if acts is None or len(acts) == 0:
            warnings.warn(f"class {cls} has no correctly classified training instances; it will always be flagged")
            continue
        if cfg.clusters == "elbow":
            k = elbow_k(acts, range(1, min(cfg.max_clusters, len(acts)) + 1), seed=cfg.seed) if len(acts) >= 3 else 1
        else:
            k = max(int(cfg.clusters), 1)
            if k > len(acts):
                warnings.warn(f"class {cls}: {len(acts)} points for {k} clusters; using {len(acts)}")
                k = len(acts)
        assign = np.zeros(len(acts), dtype=np.int64) if k == 1 else kmeans(acts, k, seed=cfg.seed).assignments
        if len(acts) >= 2:
            reducer = fit_reducer(cfg.reducer, acts, cfg.n_neighbors)
        else:
            reducer = REDUCERS["simple"]()
        points2d = np.array([reducer.project(a) for a in acts])
        abstraction.classes[cls] = ClassBoxes(reducer, build_boxes(points2d, assign, k, cfg.gamma), len(acts))
    return abstraction


def fit_oob(net, x, y, cfg: OOBConfig = OOBConfig()) -> BoxAbstraction:
    layer, groups = collect_activations(net, x, y)
    return fit_boxes(groups, cfg, layer, net.num_classes)


def oob_detect(abstraction: BoxAbstraction, trace) -> bool:
    """True when the activation falls outside every box of the predicted class."""
    entry = abstraction.classes.get(int(trace.prediction))
    if entry is None:
        return True
    point = entry.reducer.project(trace.captured[abstraction.layer])
    return not inside_any(point, entry.boxes)
