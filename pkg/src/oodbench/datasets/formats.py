"""Readers (and fixture writers) for IDX and CIFAR-10 binary files."""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..errors import FormatError

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801
CIFAR_RECORD = 1 + 3 * 32 * 32


def parse_idx(data: bytes):
    """Parse an IDX payload. Images come back as float64 in [0, 1], labels as int64."""
    if len(data) < 4:
        raise FormatError("missing IDX magic", len(data))
    (magic,) = struct.unpack_from(">I", data, 0)
    if magic == IDX_IMAGES_MAGIC:
        ndim = 3
    elif magic == IDX_LABELS_MAGIC:
        ndim = 1
    else:
        raise FormatError(f"bad IDX magic 0x{magic:08x}", 0)
    header = 4 + 4 * ndim
    if len(data) < header:
        raise FormatError("truncated IDX header", len(data))
    dims = struct.unpack_from(f">{ndim}I", data, 4)
    count = int(np.prod(dims, dtype=np.int64))
    if len(data) < header + count:
        raise FormatError(
            f"truncated IDX payload: need {count} bytes, have {len(data) - header}", len(data)
        )
    if len(data) > header + count:
        raise FormatError("trailing bytes after IDX payload", header + count)
    raw = np.frombuffer(data, dtype=np.uint8, count=count, offset=header).reshape(dims)
    if ndim == 1:
        return raw.astype(np.int64)
    return raw.astype(np.float64) / 255.0


def read_idx(path):
    """Read one IDX file (images ``(N, H, W)`` in [0, 1] or labels ``(N,)``)."""
    return parse_idx(Path(path).read_bytes())


def read_idx_pair(images_path, labels_path):
    """Read an IDX images/labels pair as ``(images (N, 1, H, W), labels)``."""
    images = read_idx(images_path)
    labels = read_idx(labels_path)
    if images.ndim != 3 or labels.ndim != 1:
        raise FormatError("expected an images file and a labels file", 0)
    if len(images) != len(labels):
        raise FormatError(f"{len(images)} images but {len(labels)} labels", 4)
    return images[:, None, :, :], labels


def encode_idx_images(images_u8) -> bytes:
    arr = np.asarray(images_u8, dtype=np.uint8)
    return struct.pack(">4I", IDX_IMAGES_MAGIC, *arr.shape) + arr.tobytes()


def encode_idx_labels(labels) -> bytes:
    arr = np.asarray(labels, dtype=np.uint8)
    return struct.pack(">2I", IDX_LABELS_MAGIC, len(arr)) + arr.tobytes()


def parse_cifar10(data: bytes):
    if len(data) % CIFAR_RECORD:
        raise FormatError(
            f"size {len(data)} is not a multiple of the {CIFAR_RECORD}-byte record", len(data) - len(data) % CIFAR_RECORD
        )
    n = len(data) // CIFAR_RECORD
    if n == 0:
        return np.zeros((0, 3, 32, 32)), np.zeros(0, dtype=np.int64)
    rec = np.frombuffer(data, dtype=np.uint8).reshape(n, CIFAR_RECORD)
    labels = rec[:, 0].astype(np.int64)
    images = rec[:, 1:].reshape(n, 3, 32, 32).astype(np.float64) / 255.0
    return images, labels


def read_cifar10_binary(path):
    """Read a CIFAR-10 ``data_batch_*.bin`` file as ``(images (N, 3, 32, 32), labels)``."""
    return parse_cifar10(Path(path).read_bytes())


def encode_cifar10(images_u8, labels) -> bytes:
    images_u8 = np.asarray(images_u8, dtype=np.uint8).reshape(len(labels), -1)
    lab = np.asarray(labels, dtype=np.uint8)[:, None]
    return np.concatenate([lab, images_u8], axis=1).tobytes()
