"""Versioned binary containers shared by checkpoints, monitors and benchmarks.

Layout::

    magic      4 bytes  (e.g. b"OODB")
    version    u16 little-endian
    header_len u32 little-endian
    header     UTF-8 JSON, sorted keys; its "arrays" entry lists (name, dtype, shape)
    payload    the listed arrays back to back, little-endian, C order
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .errors import FormatError

FORMAT_VERSION = 1
_PREFIX = struct.Struct("<4sHI")
_DTYPES = {"f8": "<f8", "u1": "u1", "i8": "<i8"}


def dumps_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def encode(magic: bytes, header: dict, arrays) -> bytes:
    table = []
    blobs = []
    for name, arr in arrays:
        arr = np.asarray(arr)
        code = {"f": "f8", "u": "u1", "i": "i8"}[arr.dtype.kind]
        if code == "u1" and arr.dtype != np.uint8:
            raise ValueError(f"array {name!r}: only uint8 unsigned payloads are supported")
        table.append({"name": name, "dtype": code, "shape": list(arr.shape)})
        blobs.append(np.ascontiguousarray(arr, dtype=_DTYPES[code]).tobytes())
    head = dict(header)
    head["arrays"] = table
    raw = dumps_json(head).encode("utf-8")
    return _PREFIX.pack(magic, FORMAT_VERSION, len(raw)) + raw + b"".join(blobs)


def decode(data: bytes, magic: bytes):
    """Inverse of :func:`encode`; returns ``(header, {name: array})``."""
    if len(data) < _PREFIX.size:
        raise FormatError("file shorter than container prefix", len(data))
    got, version, hlen = _PREFIX.unpack_from(data, 0)
    if got != magic:
        raise FormatError(f"bad magic {got!r}, expected {magic!r}", 0)
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported container version {version}", 4)
    start = _PREFIX.size
    if len(data) < start + hlen:
        raise FormatError("truncated header", len(data))
    try:
        header = json.loads(data[start : start + hlen].decode("utf-8"))
    except ValueError as exc:
        raise FormatError(f"unreadable header: {exc}", start) from None
    offset = start + hlen
    arrays = {}
    for entry in header.pop("arrays"):
        dt = np.dtype(_DTYPES[entry["dtype"]])
        shape = tuple(entry["shape"])
        nbytes = int(np.prod(shape, dtype=np.int64)) * dt.itemsize
        if offset + nbytes > len(data):
            raise FormatError(f"truncated payload for array {entry['name']!r}", len(data))
        arrays[entry["name"]] = np.frombuffer(data, dtype=dt, count=nbytes // dt.itemsize, offset=offset).reshape(
            shape
        )
        offset += nbytes
    if offset != len(data):
        raise FormatError("trailing bytes after payload", offset)
    return header, arrays


def write(path, magic: bytes, header: dict, arrays) -> int:
    data = encode(magic, header, arrays)
    Path(path).write_bytes(data)
    return len(data)


def read(path, magic: bytes):
    return decode(Path(path).read_bytes(), magic)
