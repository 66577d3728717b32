"""Common fit/detect interface, baseline stubs and "OODM" monitor checkpoints."""

from __future__ import annotations

import hashlib
import time
from dataclasses import asdict

import numpy as np

from .. import _binio
from ..errors import MonitorStateError, ParameterError
from ..nn.checkpoint import network_arrays, network_from
from ..nn.training import Autoencoder
from .oob import BoxAbstraction, ClassBoxes, OOBConfig, fit_oob, oob_detect
from .odin import DEFAULT_TEMPERATURE, OdinState, fit_odin, odin_detect
from .recon import ReconConfig, ReconState, fit_recon, recon_detect
from .reduction import REDUCERS

MAGIC = b"OODM"


class Monitor:
    """A safety monitor. ``fit`` once, then ``detect`` is pure and thread-safe."""

    kind = "base"

    def __init__(self, name=None):
        self.name = name or self.kind
        self._fitted = False

    @property
    def fitted(self) -> bool:
        return self._fitted

    def fit(self, net, x, y):
        self._fitted = True
        return self

    def detect(self, net, x, trace) -> bool:
        raise NotImplementedError

    def _require_fit(self):
        if not self._fitted:
            raise MonitorStateError(f"monitor {self.name!r} must be fitted before detect")

    def config(self) -> dict:
        return {}

    def state(self):
        return {}, []

    def load_state(self, header, arrays):
        self._fitted = True


class NeverMonitor(Monitor):
    """Stub that never raises an alarm (the ML-alone baseline)."""

    kind = "never"

    def detect(self, net, x, trace):
        self._require_fit()
        return False


class AlwaysMonitor(Monitor):
    kind = "always"

    def detect(self, net, x, trace):
        self._require_fit()
        return True


class RandomMonitor(Monitor):
    """Coin-flip detector; the flip is a keyed hash of the input, so detect stays pure."""

    kind = "random"

    def __init__(self, name=None, p=0.5, seed=0):
        super().__init__(name)
        self.p = float(p)
        self.seed = int(seed)

    def config(self):
        return {"p": self.p, "seed": self.seed}

    def detect(self, net, x, trace):
        self._require_fit()
        key = self.seed.to_bytes(8, "little", signed=True)
        digest = hashlib.blake2b(np.ascontiguousarray(x, dtype=np.float64).tobytes(), key=key, digest_size=8).digest()
        return int.from_bytes(digest, "little") / 2.0**64 < self.p


class SleepMonitor(Monitor):
    """Never flags, but spends ``seconds`` per call; used to check timing plumbing."""

    kind = "sleep"

    def __init__(self, name=None, seconds=0.001):
        super().__init__(name)
        self.seconds = float(seconds)

    def config(self):
        return {"seconds": self.seconds}

    def detect(self, net, x, trace):
        self._require_fit()
        time.sleep(self.seconds)
        return False


class OOBMonitor(Monitor):
    kind = "oob"

    def __init__(self, name=None, **cfg):
        super().__init__(name)
        self.cfg = OOBConfig(**cfg)
        self.abstraction: BoxAbstraction | None = None

    def config(self):
        return asdict(self.cfg)

    def fit(self, net, x, y):
        self.abstraction = fit_oob(net, x, y, self.cfg)
        return super().fit(net, x, y)

    def detect(self, net, x, trace):
        self._require_fit()
        return oob_detect(self.abstraction, trace)

    def state(self):
        abs_ = self.abstraction
        header = {"layer": abs_.layer, "gamma": abs_.gamma, "classes": {}}
        arrays = []
        for cls, entry in sorted(abs_.classes.items()):
            prefix = f"c{cls}."
            rh, ra = entry.reducer.state(prefix) if entry.reducer.kind != "simple" else ({}, [])
            header["classes"][str(cls)] = {"reducer": entry.reducer.kind, "n_points": entry.n_points, "reducer_state": rh}
            arrays += ra + [(prefix + "boxes", entry.boxes)]
        return header, arrays

    def load_state(self, header, arrays):
        abs_ = BoxAbstraction(header["layer"], header["gamma"], self.cfg)
        for cls, meta in header["classes"].items():
            prefix = f"c{cls}."
            reducer = REDUCERS[meta["reducer"]].from_state(meta["reducer_state"], arrays, prefix)
            abs_.classes[int(cls)] = ClassBoxes(reducer, np.array(arrays[prefix + "boxes"]), meta["n_points"])
        self.abstraction = abs_
        super().load_state(header, arrays)


class OdinMonitor(Monitor):
    kind = "odin"

    def __init__(self, name=None, temperature=DEFAULT_TEMPERATURE, magnitude=0.0014, threshold=None):
        super().__init__(name)
        self.temperature = float(temperature)
        self.magnitude = float(magnitude)
        self.threshold = None if threshold is None else float(threshold)
        self.odin: OdinState | None = None

    def config(self):
        return {"temperature": self.temperature, "magnitude": self.magnitude, "threshold": self.threshold}

    def fit(self, net, x, y):
        self.odin = fit_odin(net, x, self.temperature, self.magnitude, self.threshold)
        return super().fit(net, x, y)

    def detect(self, net, x, trace):
        self._require_fit()
        return odin_detect(self.odin, net, x, trace)

    def state(self):
        return asdict(self.odin), []

    def load_state(self, header, arrays):
        self.odin = OdinState(**header)
        super().load_state(header, arrays)


class ReconMonitor(Monitor):
    kind = "recon"

    def __init__(self, name=None, **cfg):
        super().__init__(name)
        if "hidden" in cfg:
            cfg["hidden"] = tuple(cfg["hidden"])
        self.cfg = ReconConfig(**cfg)
        self.recon: ReconState | None = None

    def config(self):
        c = asdict(self.cfg)
        c["hidden"] = list(c["hidden"])
        return c

    def fit(self, net, x, y):
        self.recon = fit_recon(x, y, self.cfg, num_classes=net.num_classes)
        return super().fit(net, x, y)

    def detect(self, net, x, trace):
        self._require_fit()
        return recon_detect(self.recon, trace, x)

    def state(self):
        header = {"classes": {}}
        arrays = []
        for cls, ae in sorted(self.recon.autoencoders.items()):
            prefix = f"ae{cls}."
            header["classes"][str(cls)] = {
                "network": ae.network.describe(),
                "train_loss_mean": ae.train_loss_mean,
                "threshold": self.recon.thresholds[cls],
            }
            arrays += network_arrays(ae.network, prefix)
        return header, arrays

    def load_state(self, header, arrays):
        state = ReconState()
        for cls, meta in header["classes"].items():
            net = network_from(meta["network"], arrays, f"ae{cls}.")
            state.autoencoders[int(cls)] = Autoencoder(net, int(cls), meta["train_loss_mean"])
            state.thresholds[int(cls)] = meta["threshold"]
        self.recon = state
        super().load_state(header, arrays)


MONITORS = {
    cls.kind: cls
    for cls in (NeverMonitor, AlwaysMonitor, RandomMonitor, SleepMonitor, OOBMonitor, OdinMonitor, ReconMonitor)
}


def make_monitor(kind: str, name=None, **params) -> Monitor:
    try:
        cls = MONITORS[kind]
    except KeyError:
        raise ParameterError(f"unknown monitor kind {kind!r}") from None
    try:
        return cls(name, **params)
    except TypeError as exc:
        raise ParameterError(f"bad parameters for monitor {kind!r}: {exc}") from None


def encode_monitor(monitor: Monitor, meta: dict | None = None) -> bytes:
    if not monitor.fitted:
        raise MonitorStateError("only fitted monitors can be saved")
    state_header, arrays = monitor.state()
    header = {
        "kind": monitor.kind,
        "name": monitor.name,
        "config": monitor.config(),
        "state": state_header,
        "meta": meta or {},
    }
    return _binio.encode(MAGIC, header, arrays)


def save_monitor(monitor: Monitor, path, meta: dict | None = None) -> int:
    """Write a fitted monitor; returns the file size in bytes."""
    data = encode_monitor(monitor, meta)
    with open(path, "wb") as fh:
        fh.write(data)
    return len(data)


def load_monitor(path) -> Monitor:
    header, arrays = _binio.read(path, MAGIC)
    monitor = make_monitor(header["kind"], header["name"], **header["config"])
    monitor.load_state(header["state"], arrays)
    return monitor
