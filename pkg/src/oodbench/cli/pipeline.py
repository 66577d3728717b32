"""The generate -> train -> run -> eval -> report stages.

Directory layout under the output root::

    data/train.oods                      ID training split
    benchmarks/<name>.oods               one container per fault template (+ control)
    benchmarks/<name>.manifest.json
    models/classifier.oodb               trained classifier
    models/<monitor>.oodm                fitted monitors
    models/train.json                    train accuracy and checkpoint sizes
    readouts/<benchmark>__<monitor>.csv  one row per streamed instance
    readouts/<benchmark>__<monitor>.timing.json
    readouts/provenance.json
    eval/report.json, eval/cd.svg, eval/cd.txt, eval/timing.json
    report.txt

Every stage is a pure function of the config and of the previous stage's
files, so re-running it reproduces the same bytes. The per-instance timing
files are the only exception.
"""

from __future__ import annotations

import json
import logging
import zlib
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import jsonschema
import numpy as np

from ..datasets import (
    MANIFEST_SCHEMA,
    BenchmarkDataset,
    as_arrays,
    assemble_benchmark,
    from_arrays,
    read_cifar10_binary,
    read_container,
    read_idx_pair,
    split_id,
    write_container,
    write_manifest,
)
from ..datasets.synthetic import foreign_shapes, shapes
from ..errors import ConfigError, DataError
from ..evaluation import benchmark_entry, cross_benchmark, render_tables, validate_report
from ..faults import apply_template
from ..harness import measure_resources, read_readouts, run_stream, write_readouts
from ..imageops import match_shape
from ..monitors import load_monitor, make_monitor, save_monitor
from ..nn import accuracy, load_network, save_network, train_classifier
from ..nn.training import default_classifier
from .config import ExperimentConfig

log = logging.getLogger(__name__)

CLASSIFIER_KEYS = ("seed", "data", "split", "classifier")


def _dump_json(path: Path, obj):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _load_json(path: Path):
    if not path.exists():
        raise DataError(f"missing stage input {path}")
    return json.loads(path.read_text())


def _load_source(cfg: ExperimentConfig, section: dict, synthetic_fn):
    fmt = section["format"]
    if fmt == "idx":
        return read_idx_pair(cfg.resolve(section["images"]), cfg.resolve(section["labels"]))
    if fmt == "cifar10":
        parts = [read_cifar10_binary(cfg.resolve(p)) for p in section["files"]]
        return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])
    kw = {k: section[k] for k in ("n_per_class", "size") if k in section}
    return synthetic_fn(seed=cfg.seeded(section.get("seed", 0)), **kw)


def _source_tag(section: dict) -> str:
    fmt = section["format"]
    if fmt == "idx":
        return f"idx:{Path(section['images']).name}"
    if fmt == "cifar10":
        return "cifar10:" + ",".join(Path(p).name for p in section["files"])
    return f"{fmt}:seed={section.get('seed', 0)}"


def benchmark_name(template) -> str:
    return template.variation.replace(":", "-")


def _stream_seed(cfg, name):
    return cfg.seeded(zlib.crc32(name.encode("utf-8")) % (2**31))


def _train_path(out: Path) -> Path:
    return out / "data" / "train.oods"


def _load_train(out: Path):
    path = _train_path(out)
    if not path.exists():
        raise DataError(f"{path} not found; run 'generate' first")
    bm = read_container(path)
    return as_arrays(bm.instances)


def ensure_classifier(cfg: ExperimentConfig, out: Path, x=None, y=None):
    """Load the classifier checkpoint if it matches the config, otherwise train and save it.

    Returns ``(net, meta)``. Training is deterministic, so whichever stage
    builds the checkpoint first, the bytes are the same.
    """
    path = out / "models" / "classifier.oodb"
    key = cfg.hash(CLASSIFIER_KEYS)
    if path.exists():
        net, meta = load_network(path)
        if meta.get("classifier_hash") == key:
            return net, meta
        log.info("classifier checkpoint is stale; retraining")
    if x is None:
        x, y = _load_train(out)
    net, acc = train_classifier(x, y, cfg.classifier, net=default_classifier(x.shape[1:], int(y.max()) + 1, cfg.classifier.seed))
    # keyed on the sections that shape the classifier only, so editing monitors keeps it
    meta = {"classifier_hash": key, "train_accuracy": acc}
    path.parent.mkdir(parents=True, exist_ok=True)
    save_network(net, path, meta)
    return net, meta


def _foreign(cfg: ExperimentConfig, image_shape, num_id_classes):
    section = cfg.novelty
    images, labels = _load_source(cfg, section, foreign_shapes)
    images = match_shape(np.asarray(images, dtype=np.float64), image_shape)
    return images, labels, num_id_classes


def cmd_generate(cfg: ExperimentConfig, out: Path) -> dict:
    images, labels = _load_source(cfg, cfg.data, shapes)
    if len(images) == 0:
        raise DataError("the ID dataset is empty")
    images = np.asarray(images, dtype=np.float64)
    num_classes = int(np.max(labels)) + 1
    train, holdout = split_id(from_arrays(images, labels, "id"), cfg.train_fraction, cfg.split_seed)
    chash = cfg.hash()
    sources = [_source_tag(cfg.data)]

    (out / "data").mkdir(parents=True, exist_ok=True)
    write_container(
        _train_path(out),
        BenchmarkDataset("train", train, cfg.split_seed, {"name": "train", "config_hash": chash, "sources": sources}),
    )
    templates = cfg.templates()
    net = None
    if any(t.name == "fgsm" for t in templates):
        x, y = as_arrays(train)
        net, _ = ensure_classifier(cfg, out, x, y)
    foreign = _foreign(cfg, images.shape[1:], num_classes) if any(t.kind == "novelty" for t in templates) else None

    bdir = out / "benchmarks"
    bdir.mkdir(parents=True, exist_ok=True)
    plan = [(benchmark_name(t), t) for t in templates]
    if cfg.control:
        plan.append(("control", None))
    written = {}
    for name, t in plan:
        ood = [] if t is None else apply_template(holdout, t, net=net, foreign=foreign)
        srcs = sources + ([_source_tag(cfg.novelty)] if t is not None and t.kind == "novelty" else [])
        manifest = {
            "name": name,
            "sources": srcs,
            "fault_template": None if t is None else t.to_dict(),
            "config_hash": chash,
        }
        bm = assemble_benchmark(holdout, ood, _stream_seed(cfg, name), name, manifest)
        jsonschema.validate(bm.manifest, MANIFEST_SCHEMA)
        write_container(bdir / f"{name}.oods", bm)
        write_manifest(bdir / f"{name}.manifest.json", bm.manifest)
        written[name] = bm.manifest["counts"]
        log.info("benchmark %s: %s", name, bm.manifest["counts"])
    return {"train": len(train), "holdout": len(holdout), "benchmarks": written}


def _select(specs, wanted):
    if not wanted:
        return specs
    chosen = [s for s in specs if s[0] in wanted or s[1] in wanted]
    if not chosen:
        raise ConfigError(f"--monitors {sorted(wanted)} matches no configured monitor")
    return chosen


def cmd_train(cfg: ExperimentConfig, out: Path, monitors=None) -> dict:
    x, y = _load_train(out)
    net, meta = ensure_classifier(cfg, out, x, y)
    mdir = out / "models"
    chash = cfg.hash()
    summary = {
        "config_hash": chash,
        "train_accuracy": meta["train_accuracy"],
        "classifier_bytes": (mdir / "classifier.oodb").stat().st_size,
        "monitor_bytes": {},
    }
    for name, kind, params in _select(cfg.monitor_specs(), monitors):
        mon = make_monitor(kind, name, **params)
        log.info("fitting monitor %s", name)
        mon.fit(net, x, y)
        summary["monitor_bytes"][name] = save_monitor(mon, mdir / f"{name}.oodm", {"config_hash": chash})
    _dump_json(mdir / "train.json", summary)
    return summary


def _run_benchmark(job):
    """Worker body: one benchmark, every monitor, sequential streams."""
    bench_path, model_dir, readout_dir, monitor_names = job
    net, _ = load_network(Path(model_dir) / "classifier.oodb")
    ml_bytes = (Path(model_dir) / "classifier.oodb").stat().st_size
    bm = read_container(bench_path)
    done = {}
    for name in monitor_names:
        mpath = Path(model_dir) / f"{name}.oodm"
        mon = load_monitor(mpath)
        readouts = run_stream(net, mon, bm)
        stem = f"{bm.name}__{name}"
        write_readouts(Path(readout_dir) / f"{stem}.csv", readouts)
        res = measure_resources(readouts, ml_bytes, mpath.stat().st_size)
        _dump_json(Path(readout_dir) / f"{stem}.timing.json", res.to_dict())
        done[stem] = len(readouts)
    return done


def cmd_run(cfg: ExperimentConfig, out: Path, workers: int = 1, monitors=None) -> dict:
    mdir = out / "models"
    train_info = _load_json(mdir / "train.json")
    names = [n for n, _, _ in _select(cfg.monitor_specs(), monitors)]
    for n in names:
        if not (mdir / f"{n}.oodm").exists():
            raise DataError(f"monitor checkpoint {mdir / (n + '.oodm')} not found; run 'train' first")
    benches = sorted((out / "benchmarks").glob("*.oods"))
    if not benches:
        raise DataError(f"no benchmark containers under {out / 'benchmarks'}; run 'generate' first")
    rdir = out / "readouts"
    rdir.mkdir(parents=True, exist_ok=True)
    jobs = [(str(b), str(mdir), str(rdir), names) for b in benches]
    results = {}
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for r in pool.map(_run_benchmark, jobs):
                results.update(r)
    else:
        for job in jobs:
            results.update(_run_benchmark(job))
    control = []
    for b in benches:
        manifest = json.loads(b.with_name(b.stem + ".manifest.json").read_text())
        if manifest.get("control"):
            control.append(manifest["name"])
    provenance = {
        "config_hash": cfg.hash(),
        "classifier_bytes": train_info["classifier_bytes"],
        "monitor_bytes": {n: (mdir / f"{n}.oodm").stat().st_size for n in names},
        "control": sorted(control),
        "runs": dict(sorted(results.items())),
    }
    _dump_json(rdir / "provenance.json", provenance)
    return provenance


def _split_stem(stem: str):
    bench, sep, mon = stem.rpartition("__")
    if not sep:
        raise DataError(f"readout file {stem}.csv is not named <benchmark>__<monitor>.csv")
    return bench, mon


def cmd_eval(readout_dir: Path, eval_dir: Path) -> dict:
    """Score every readout CSV in ``readout_dir``; writes report.json (+ CD diagram) under ``eval_dir``."""
    readout_dir, eval_dir = Path(readout_dir), Path(eval_dir)
    csvs = sorted(readout_dir.glob("*.csv"))
    if not csvs:
        raise DataError(f"no readout CSVs under {readout_dir}")
    prov_path = readout_dir / "provenance.json"
    prov = json.loads(prov_path.read_text()) if prov_path.exists() else {}
    entries, timing = {}, {}
    control = set(prov.get("control", []))
    for path in csvs:
        bench, mon = _split_stem(path.stem)
        try:
            readouts = read_readouts(path)
        except ValueError as exc:
            raise DataError(str(exc)) from None
        if not readouts:
            raise DataError(f"{path} has no rows")
        if not prov and all(r.origin == "ID" for r in readouts):
            control.add(bench)
        ml_bytes = int(prov.get("classifier_bytes", 0))
        sm_bytes = int(prov.get("monitor_bytes", {}).get(mon, 0))
        memory = {"ml_bytes": ml_bytes, "sm_bytes": sm_bytes, "ml_mb": ml_bytes / 1e6, "sm_mb": sm_bytes / 1e6}
        entries.setdefault(bench, {})[mon] = benchmark_entry(readouts, memory)
        tpath = path.with_name(path.stem + ".timing.json")
        if tpath.exists():
            timing.setdefault(bench, {})[mon] = json.loads(tpath.read_text())
    cross = cross_benchmark(entries, control)
    diagram = None
    if cross is not None:
        cross, diagram = cross
    report = {
        "config_hash": prov.get("config_hash", "unknown"),
        "benchmarks": entries,
        "control": sorted(control),
        "cross": cross,
        "timed_regions": {
            "ml_time_s": "classifier forward pass on one instance",
            "sm_time_s": "monitor detect call on one instance",
            "sut_time_s": "whole step: forward, detect, reaction policy and readout assembly",
        },
    }
    validate_report(report)
    eval_dir.mkdir(parents=True, exist_ok=True)
    _dump_json(eval_dir / "report.json", report)
    if timing:
        _dump_json(eval_dir / "timing.json", timing)
    for stale in ("cd.svg", "cd.txt"):
        (eval_dir / stale).unlink(missing_ok=True)
    if diagram is not None:
        (eval_dir / "cd.svg").write_text(diagram["svg"])
        (eval_dir / "cd.txt").write_text(diagram["text"])
    return report


def cmd_report(eval_dir: Path, dest: Path | None = None) -> str:
    report = _load_json(Path(eval_dir) / "report.json")
    tpath = Path(eval_dir) / "timing.json"
    timing = json.loads(tpath.read_text()) if tpath.exists() else None
    text = render_tables(report, timing)
    if dest is not None:
        Path(dest).write_text(text)
    return text


def holdout_accuracy(out: Path) -> float:
    """Classifier accuracy on the control benchmark (pure ID holdout), for logging."""
    net, _ = load_network(out / "models" / "classifier.oodb")
    bm = read_container(out / "benchmarks" / "control.oods")
    x, y = as_arrays(bm.instances)
    return accuracy(net, x, y)
