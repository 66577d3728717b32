"""The "OODS" benchmark container and its JSON manifest sidecar."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .. import _binio
from ..errors import FormatError
from .instances import BenchmarkDataset, LabeledInstance

MAGIC = b"OODS"

MANIFEST_SCHEMA = {
    "type": "object",
    "required": ["name", "sources", "fault_template", "counts"],
    "properties": {
        "name": {"type": "string"},
        "sources": {"type": "array", "items": {"type": "string"}},
        "fault_template": {
            "type": ["object", "null"],
            "required": ["kind", "params", "seed"],
            "properties": {
                "kind": {"type": "string"},
                "params": {"type": "object"},
                "seed": {"type": "integer"},
            },
        },
        "counts": {
            "type": "object",
            "required": ["id", "ood"],
            "properties": {"id": {"type": "integer"}, "ood": {"type": "integer"}},
        },
    },
}


def quantize(images):
    return np.clip(np.rint(np.asarray(images) * 255.0), 0, 255).astype(np.uint8)


def encode_instances(instances, header: dict | None = None) -> bytes:
    if not instances:
        shape = []
        pixels = np.zeros((0,), dtype=np.uint8)
    else:
        shape = list(instances[0].image.shape)
        if any(list(inst.image.shape) != shape for inst in instances):
            raise ValueError("all instances in a container must share one image shape")
        pixels = quantize(np.stack([inst.image for inst in instances]))
    head = dict(header or {})
    head["image_shape"] = shape
    head["instances"] = [
        [inst.id, int(inst.label), inst.origin, inst.variation, bool(inst.novelty)] for inst in instances
    ]
    return _binio.encode(MAGIC, head, [("pixels", pixels)])


def decode_instances(data: bytes):
    header, arrays = _binio.decode(data, MAGIC)
    rows = header.pop("instances")
    pixels = arrays["pixels"]
    if len(rows) and pixels.shape[0] != len(rows):
        raise FormatError("instance table and pixel payload disagree", 0)
    images = pixels.astype(np.float64) / 255.0
    instances = [
        LabeledInstance(iid, images[i], int(label), origin, variation, bool(novelty))
        for i, (iid, label, origin, variation, novelty) in enumerate(rows)
    ]
    return header, instances


def write_container(path, benchmark: BenchmarkDataset) -> int:
    header = {
        "name": benchmark.name,
        "stream_seed": benchmark.stream_seed,
        "id_fraction": benchmark.id_fraction,
        "manifest": benchmark.manifest,
    }
    data = encode_instances(benchmark.instances, header)
    Path(path).write_bytes(data)
    return len(data)


def read_container(path) -> BenchmarkDataset:
    header, instances = decode_instances(Path(path).read_bytes())
    return BenchmarkDataset(header["name"], instances, header["stream_seed"], header.get("manifest", {}))


def write_manifest(path, manifest: dict):
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def read_manifest(path) -> dict:
    return json.loads(Path(path).read_text())
