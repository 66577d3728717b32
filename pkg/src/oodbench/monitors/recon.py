"""Per-class autoencoder monitor thresholded on the class's mean training loss."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ParameterError
from ..nn import TrainConfig, reconstruction_loss, train_autoencoder


@dataclass(frozen=True)
class ReconConfig:
    optimizer: str = "adam"
    lr: float = 1e-3
    epochs: int = 200
    batch_size: int = 32
    hidden: tuple = (64, 16)
    seed: int = 0


@dataclass
class ReconState:
    autoencoders: dict = field(default_factory=dict)
    thresholds: dict = field(default_factory=dict)


def fit_recon(x, y, cfg: ReconConfig = ReconConfig(), num_classes=None) -> ReconState:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if cfg.optimizer.lower() not in ("adam", "rmsprop", "sgd"):
        raise ParameterError(f"unknown optimizer {cfg.optimizer!r}")
    classes = range(num_classes) if num_classes is not None else np.unique(y)
    state = ReconState()
    for cls in classes:
        members = x[y == cls]
        if len(members) == 0:
            continue
        tc = TrainConfig(cfg.optimizer, cfg.lr, cfg.epochs, cfg.batch_size, seed=cfg.seed * 1000 + int(cls))
        ae = train_autoencoder(members, tc, class_id=int(cls), hidden=cfg.hidden)
        state.autoencoders[int(cls)] = ae
        state.thresholds[int(cls)] = ae.train_loss_mean
    return state


def recon_detect(state: ReconState, trace, x) -> bool:
    """Flag when the predicted class's autoencoder reconstructs ``x`` worse than its threshold."""
    cls = int(trace.prediction)
    ae = state.autoencoders.get(cls)
    if ae is None:
        return True
    return reconstruction_loss(ae, x) > state.thresholds[cls]
