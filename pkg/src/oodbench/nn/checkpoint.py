"""Model checkpoints ("OODB" containers)."""

from __future__ import annotations

import numpy as np

from .. import _binio
from .layers import layer_from_description
from .network import Network

MAGIC = b"OODB"


def network_arrays(net: Network, prefix=""):
    return [(f"{prefix}{i}.{name}", np.asarray(p)) for i, name, p in net.parameters()]


def network_from(description: dict, arrays: dict, prefix="") -> Network:
    layers = [layer_from_description(d) for d in description["layers"]]
    for i, layer in enumerate(layers):
        for name in layer.params:
            layer.params[name] = np.array(arrays[f"{prefix}{i}.{name}"], dtype=np.float64)
    net = Network(layers, description["input_shape"], description["capture_points"])
    return net.freeze()


def encode_network(net: Network, meta: dict | None = None) -> bytes:
    header = {"kind": "network", "network": net.describe(), "meta": meta or {}}
    return _binio.encode(MAGIC, header, network_arrays(net))


def save_network(net: Network, path, meta: dict | None = None) -> int:
    """Write ``net`` to ``path``; returns the file size in bytes."""
    data = encode_network(net, meta)
    with open(path, "wb") as fh:
        fh.write(data)
    return len(data)


def load_network(path):
    """Returns ``(network, meta)``."""
    header, arrays = _binio.read(path, MAGIC)
    return network_from(header["network"], arrays), header.get("meta", {})
