"""Labeled instances, the stratified ID split and benchmark assembly."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from ..errors import IntegrityError, ParameterError

ID = "ID"
OOD = "OOD"


@dataclass(frozen=True)
class LabeledInstance:
    id: str
    image: np.ndarray
    label: int
    origin: str = ID
    variation: str = "none"
    novelty: bool = False

    def __post_init__(self):
        if self.origin not in (ID, OOD):
            raise IntegrityError(f"{self.id}: origin must be ID or OOD, got {self.origin!r}")
        if self.novelty and self.origin != OOD:
            raise IntegrityError(f"{self.id}: novelty instance must have origin OOD")
        if (self.variation == "none") != (self.origin == ID):
            raise IntegrityError(f"{self.id}: variation 'none' is reserved for ID instances")


@dataclass
class BenchmarkDataset:
    name: str
    instances: list
    stream_seed: int
    manifest: dict = field(default_factory=dict)

    @property
    def id_fraction(self) -> float:
        if not self.instances:
            return 0.0
        return sum(inst.origin == ID for inst in self.instances) / len(self.instances)

    @property
    def is_control(self) -> bool:
        return all(inst.origin == ID for inst in self.instances)

    def __len__(self):
        return len(self.instances)


def from_arrays(images, labels, prefix: str):
    """Wrap an image batch as ID instances with ids ``<prefix>-000000`` ..."""
    return [
        LabeledInstance(f"{prefix}-{i:06d}", np.asarray(img, dtype=np.float64), int(lab))
        for i, (img, lab) in enumerate(zip(images, labels))
    ]


def as_arrays(instances):
    if not instances:
        return np.zeros((0,)), np.zeros(0, dtype=np.int64)
    return np.stack([inst.image for inst in instances]), np.array([inst.label for inst in instances], dtype=np.int64)


def split_id(instances, train_fraction: float = 0.8, seed: int = 0):
    """Stratified split into ``(train, holdout)``, each in original order.

    Per class, ``round(n * (1 - train_fraction))`` instances (at least one, and
    at most ``n - 1``) go to the holdout. Classes with fewer than two instances
    go entirely to train with a warning.
    """
    if not instances:
        raise ParameterError("cannot split an empty dataset")
    if not 0.0 < train_fraction < 1.0:
        raise ParameterError(f"train_fraction must be in (0, 1), got {train_fraction}")
    rng = np.random.default_rng(seed)
    labels = np.array([inst.label for inst in instances])
    holdout_idx = []
    for cls in np.unique(labels):
        members = np.flatnonzero(labels == cls)
        if len(members) < 2:
            warnings.warn(f"class {cls} has {len(members)} instance(s); kept in train only", UserWarning)
            continue
        n_hold = int(round(len(members) * (1.0 - train_fraction)))
        n_hold = min(max(n_hold, 1), len(members) - 1)
        holdout_idx.extend(rng.permutation(members)[:n_hold].tolist())
    hold = set(holdout_idx)
    train = [inst for i, inst in enumerate(instances) if i not in hold]
    holdout = [inst for i, inst in enumerate(instances) if i in hold]
    return train, holdout


def novelty_instances(images, labels, num_id_classes: int, source: str):
    """Foreign-dataset images as novelty OOD instances; labels are offset past the ID range."""
    return [
        LabeledInstance(
            f"novelty:{source}-{i:06d}",
            np.asarray(img, dtype=np.float64),
            int(lab) + int(num_id_classes),
            origin=OOD,
            variation=f"novelty:{source}",
            novelty=True,
        )
        for i, (img, lab) in enumerate(zip(images, labels))
    ]


def assemble_benchmark(id_holdout, ood_instances, seed: int, name: str = "benchmark", manifest=None):
    """Concatenate ID and OOD instances and shuffle them into a stream order."""
    for inst in id_holdout:
        if inst.origin != ID:
            raise IntegrityError(f"{inst.id}: expected an ID instance, got origin {inst.origin}")
    for inst in ood_instances:
        if inst.origin != OOD:
            raise IntegrityError(f"{inst.id}: expected an OOD instance, got origin {inst.origin}")
    pool = list(id_holdout) + list(ood_instances)
    ids = [inst.id for inst in pool]
    if len(set(ids)) != len(ids):
        raise IntegrityError("duplicate instance ids in benchmark")
    order = np.random.default_rng(seed).permutation(len(pool))
    manifest = dict(manifest or {})
    manifest.setdefault("name", name)
    manifest["counts"] = {"id": len(id_holdout), "ood": len(ood_instances)}
    manifest["stream_seed"] = int(seed)
    manifest["control"] = not ood_instances
    return BenchmarkDataset(name, [pool[i] for i in order], int(seed), manifest)
