from .container import (
    MANIFEST_SCHEMA,
    read_container,
    read_manifest,
    write_container,
    write_manifest,
)
from .formats import read_cifar10_binary, read_idx, read_idx_pair
from .instances import (
    ID,
    OOD,
    BenchmarkDataset,
    LabeledInstance,
    as_arrays,
    assemble_benchmark,
    from_arrays,
    novelty_instances,
    split_id,
)

__all__ = [
    "ID",
    "MANIFEST_SCHEMA",
    "OOD",
    "BenchmarkDataset",
    "LabeledInstance",
    "as_arrays",
    "assemble_benchmark",
    "from_arrays",
    "novelty_instances",
    "read_cifar10_binary",
    "read_container",
    "read_idx",
    "read_idx_pair",
    "read_manifest",
    "split_id",
    "write_container",
    "write_manifest",
]
