"""Experiment configuration: one YAML document, validated up front.

Top-level keys::

    seed: 0            # added to every component seed below (--seed-override sets it)
    data: {format: synthetic | idx | cifar10, ...}
    novelty: {format: foreign | idx | cifar10, ..., source: name}   # optional
    split: {train_fraction: 0.8, seed: 0}
    classifier: {optimizer: adam, lr: 0.002, epochs: 6, batch_size: 64, seed: 0}
    monitors: [{kind: oob, name: oob, params: {...}}, ...]
    faults: [{name: gaussian_noise, severity: 3, seed: 11, params: {}}, ...]
    control: true
    output: out

Relative paths are resolved against the directory holding the config file.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import yaml

from ..errors import ConfigError, OODBenchError
from ..faults import TRANSFORMS, FaultTemplate
from ..monitors import MONITORS, make_monitor
from ..nn import TrainConfig

DATA_FORMATS = ("synthetic", "idx", "cifar10")
NOVELTY_FORMATS = ("foreign", "idx", "cifar10")
_TOP_KEYS = {"seed", "data", "novelty", "split", "classifier", "monitors", "faults", "control", "output"}


@dataclass
class ExperimentConfig:
    raw: dict
    base_dir: Path

    @property
    def seed(self) -> int:
        return int(self.raw.get("seed", 0))

    def seeded(self, value) -> int:
        return int(value) + self.seed

    @property
    def data(self) -> dict:
        return self.raw["data"]

    @property
    def novelty(self) -> dict | None:
        return self.raw.get("novelty")

    @property
    def train_fraction(self) -> float:
        return float(self.raw.get("split", {}).get("train_fraction", 0.8))

    @property
    def split_seed(self) -> int:
        return self.seeded(self.raw.get("split", {}).get("seed", 0))

    @property
    def classifier(self) -> TrainConfig:
        c = dict(self.raw.get("classifier", {}))
        c["seed"] = self.seeded(c.get("seed", 0))
        return TrainConfig(**c)

    @property
    def control(self) -> bool:
        return bool(self.raw.get("control", True))

    @property
    def output(self) -> Path:
        return self.resolve(self.raw.get("output", "out"))

    def resolve(self, p) -> Path:
        p = Path(p)
        return p if p.is_absolute() else (self.base_dir / p)

    def monitor_specs(self):
        """``(name, kind, params)`` per configured monitor, seeds shifted by the global offset."""
        out = []
        for m in self.raw.get("monitors", []):
            params = dict(m.get("params", {}))
            if "seed" in params or m["kind"] in ("oob", "recon", "random"):
                params["seed"] = self.seeded(params.get("seed", 0))
            out.append((m.get("name", m["kind"]), m["kind"], params))
        return out

    def templates(self):
        out = []
        for f in self.raw.get("faults", []):
            name = f["name"]
            out.append(
                FaultTemplate(
                    kind=TRANSFORMS[name][0],
                    name=name,
                    severity=f.get("severity"),
                    params=dict(f.get("params", {})),
                    seed=self.seeded(f.get("seed", 0)),
                )
            )
        return out

    def hash(self, keys=None) -> str:
        """SHA-256 of the canonical config (or of the ``keys`` subset), never including the output location."""
        keys = set(self.raw) if keys is None else set(keys)
        body = {k: v for k, v in self.raw.items() if k in keys and k != "output"}
        text = json.dumps(body, sort_keys=True, separators=(",", ":"), default=str)
        return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _need(cond, msg):
    if not cond:
        raise ConfigError(msg)


def _check_paths(section: dict, keys, base: Path, where: str):
    for key in keys:
        val = section.get(key)
        paths = val if isinstance(val, list) else [val]
        _need(val is not None and all(paths), f"{where}.{key} is required")
        for p in paths:
            full = Path(p) if Path(p).is_absolute() else base / p
            _need(full.exists(), f"{where}.{key}: path does not exist: {full}")


def _check_source(section, formats, base, where):
    _need(isinstance(section, dict), f"{where} must be a mapping")
    fmt = section.get("format")
    _need(fmt in formats, f"{where}.format must be one of {formats}, got {fmt!r}")
    if fmt == "idx":
        _check_paths(section, ("images", "labels"), base, where)
    elif fmt == "cifar10":
        _check_paths(section, ("files",), base, where)
    else:
        for key in ("n_per_class", "size", "seed"):
            if key in section:
                _need(isinstance(section[key], int), f"{where}.{key} must be an integer")


def validate(raw: dict, base_dir: Path) -> ExperimentConfig:
    _need(isinstance(raw, dict), "config must be a mapping")
    unknown = set(raw) - _TOP_KEYS
    _need(not unknown, f"unknown config keys: {sorted(unknown)}")
    _need("data" in raw, "config needs a 'data' section")
    _need(isinstance(raw.get("seed", 0), int), "seed must be an integer")
    _check_source(raw["data"], DATA_FORMATS, base_dir, "data")
    if raw.get("novelty") is not None:
        _check_source(raw["novelty"], NOVELTY_FORMATS, base_dir, "novelty")
    split = raw.get("split", {})
    _need(isinstance(split, dict), "split must be a mapping")
    tf = split.get("train_fraction", 0.8)
    _need(isinstance(tf, (int, float)) and 0 < tf < 1, f"split.train_fraction must be in (0, 1), got {tf!r}")
    cfg = ExperimentConfig(copy.deepcopy(raw), base_dir)
    try:
        tc = cfg.classifier
    except TypeError as exc:
        raise ConfigError(f"classifier: {exc}") from None
    _need(tc.optimizer.lower() in ("adam", "sgd", "rmsprop"), f"classifier.optimizer unknown: {tc.optimizer!r}")
    _need(tc.epochs >= 1 and tc.batch_size >= 1 and tc.lr > 0, "classifier epochs, batch_size and lr must be positive")

    monitors = raw.get("monitors", [])
    _need(isinstance(monitors, list) and monitors, "config needs a non-empty 'monitors' list")
    for m in monitors:
        _need(isinstance(m, dict) and m.get("kind") in MONITORS, f"monitor kind must be one of {sorted(MONITORS)}: {m!r}")
    names = [name for name, _, _ in cfg.monitor_specs()]
    _need(len(set(names)) == len(names), f"monitor names must be unique: {names}")
    for name, kind, params in cfg.monitor_specs():
        _need("__" not in name and "/" not in name, f"monitor name {name!r} may not contain '__' or '/'")
        try:
            make_monitor(kind, name, **params)
        except OODBenchError as exc:
            raise ConfigError(f"monitor {name!r}: {exc}") from None

    faults = raw.get("faults", [])
    _need(isinstance(faults, list), "faults must be a list")
    for f in faults:
        _need(isinstance(f, dict) and f.get("name") in TRANSFORMS, f"fault name must be one of {sorted(TRANSFORMS)}: {f!r}")
    try:
        templates = cfg.templates()
    except OODBenchError as exc:
        raise ConfigError(f"faults: {exc}") from None
    variations = [t.variation for t in templates]
    _need(len(set(variations)) == len(variations), f"fault templates must be distinct: {variations}")
    if any(t.kind == "novelty" for t in templates):
        _need(cfg.novelty is not None, "a novelty fault needs a 'novelty' data section")
    _need(templates or cfg.control, "nothing to generate: no faults and control disabled")
    return cfg


def load_config(path, seed_override: int | None = None) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file does not exist: {path}")
    try:
        raw = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not valid YAML: {exc}") from None
    if seed_override is not None and isinstance(raw, dict):
        raw["seed"] = int(seed_override)
    return validate(raw, path.resolve().parent)
